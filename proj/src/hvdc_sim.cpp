#include "mmc/hvdc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mmc {

namespace {

constexpr double kTimeTolerance = 1e-9;

long steps_for(double duration, double t_s)
{
    return std::lround(duration / t_s);
}

bool is_multiple(double duration, double t_s)
{
    const double ratio = duration / t_s;
    return std::abs(ratio - std::round(ratio)) <= kTimeTolerance * std::max(1.0, ratio);
}

} // namespace

void NswSchedule::validate(double duration, int n) const
{
    require(!segments.empty(), "nsw_schedule: no segments");
    require(std::abs(segments.front().t_start) <= kTimeTolerance, "nsw_schedule: must start at 0");
    require(std::abs(segments.back().t_end - duration) <= kTimeTolerance,
            "nsw_schedule: must end at the run duration");
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        require(s.t_end > s.t_start, "nsw_schedule: empty segment");
        require(s.n_sw_max >= 0 && s.n_sw_max <= n, "nsw_schedule: n_sw_max outside [0, n]");
        if (k > 0)
            require(std::abs(s.t_start - segments[k - 1].t_end) <= kTimeTolerance,
                    "nsw_schedule: segments must be contiguous");
    }
}

std::vector<int> paper_staircase_levels()
{
    return {6, 0, 1, 2, 3, 4, 5, 6};
}

NswSchedule staircase_schedule(double warmup, double segment_length, const std::vector<int>& levels,
                               double duration, int n)
{
    require(segment_length > 0, "segment_length must be positive");
    require(!levels.empty(), "nsw_schedule: no levels");
    NswSchedule schedule;
    if (warmup > 0)
        schedule.segments.push_back({0.0, std::min(warmup, duration), n});
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double start = warmup + static_cast<double>(k) * segment_length;
        if (start >= duration - kTimeTolerance)
            break;
        schedule.segments.push_back({start, start + segment_length, levels[k]});
    }
    if (!schedule.segments.empty())
        schedule.segments.back().t_end = duration;
    return schedule;
}

int nsw_at(const NswSchedule& schedule, double t)
{
    require(!schedule.segments.empty(), "nsw_at: empty schedule");
    const auto& first = schedule.segments.front();
    require(t >= first.t_start - kTimeTolerance && t <= schedule.segments.back().t_end + kTimeTolerance,
            "nsw_at: time outside schedule span");
    for (const auto& s : schedule.segments)
        if (t <= s.t_end + kTimeTolerance)
            return s.n_sw_max;
    return schedule.segments.back().n_sw_max;
}

long ScenarioConfig::steps() const
{
    return steps_for(duration, params.t_s);
}

void ScenarioConfig::rebuild_schedule()
{
    nsw_schedule = staircase_schedule(warmup, segment_length, nsw_levels, duration, params.n);
}

void ScenarioConfig::validate() const
{
    params.validate();
    require(std::isfinite(duration) && duration > warmup, "duration must exceed warmup");
    require(warmup >= 0, "warmup must be non-negative");
    require(is_multiple(duration, params.t_s), "duration must be a multiple of t_s");
    require(v_s_peak > 0 && std::isfinite(v_s_peak), "v_s_peak must be positive");
    require(std::isfinite(p_ref), "p_ref must be finite");
    require(energy_gain >= 0 && std::isfinite(energy_gain), "energy_gain must be non-negative");
    if (dc_model == DcModel::PiLine)
        require(line_length > 0 && line_c > 0 && line_l > 0, "line parameters must be positive");
    nsw_schedule.validate(duration, params.n);
}

ScenarioConfig paper_profile()
{
    ScenarioConfig c;
    c.rebuild_schedule();
    return c;
}

ScenarioConfig fast_profile()
{
    ScenarioConfig c;
    c.duration = 0.5;
    c.warmup = 0.1;
    c.segment_length = 0.05;
    c.rebuild_schedule();
    return c;
}

double current_amplitude(const ScenarioConfig& config)
{
    return 2.0 * config.p_ref / (3.0 * config.v_s_peak);
}

double phase_offset(int phase)
{
    return 2.0 * std::numbers::pi / 3.0 * phase;
}

double reference_current(const ScenarioConfig& config, double t, int phase)
{
    const double omega = 2.0 * std::numbers::pi * config.params.f_grid;
    return current_amplitude(config) * std::sin(omega * t - phase_offset(phase));
}

double grid_voltage(const ScenarioConfig& config, double t, int phase)
{
    const double omega = 2.0 * std::numbers::pi * config.params.f_grid;
    return config.v_s_peak * std::sin(omega * t - phase_offset(phase));
}

void PhaseTrace::resize(long steps, int n)
{
    i_ref.resize(steps);
    i.resize(steps);
    i_z.resize(steps);
    v_s.resize(steps);
    v_c.resize(steps, 2 * n);
    u.resize(steps, 2 * n);
    transitions_upper.resize(steps);
    transitions_lower.resize(steps);
}

long SimTrace::index_of(double t) const
{
    return std::lround(t / t_s) - 1;
}

DivergenceError::DivergenceError(long step, double time)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "simulation diverged at step " << step << " (t = " << time << " s)";
          return os.str();
      }()),
      step_(step), time_(time)
{
}

namespace {

/// Lumped pi section between the remote DC source and the converter DC bus.
/// Only the bus-side shunt capacitor matters; the source-side one sits across
/// a stiff source.
struct PiLine {
    double v_source;
    double v_bus;
    double i_line = 0.0;
    double c_half;
    double l_total;

    void step(double i_converter, double t_s)
    {
        i_line += t_s / l_total * (v_source - v_bus);
        v_bus += t_s / c_half * (i_line - i_converter);
    }
};

double leg_mean_voltage(const PhaseLegState<double>& s)
{
    return (s.upper.v_c.sum() + s.lower.v_c.sum()) / static_cast<double>(2 * s.upper.size());
}

int transitions(const StatusVector& before, const StatusVector& after)
{
    return (before.cast<int>() - after.cast<int>()).cwiseAbs().sum();
}

} // namespace

SimTrace run_scenario(const ScenarioConfig& config)
{
    config.validate();
    const auto& base = config.params;
    const int n = base.n;
    const long steps = config.steps();

    SimTrace trace;
    trace.t_s = base.t_s;
    trace.n = n;
    trace.warmup = config.warmup;
    trace.i_m = current_amplitude(config);
    trace.schedule = config.nsw_schedule;
    trace.time.resize(steps);
    trace.nsw_max.resize(steps);
    trace.v_dc.resize(steps);
    for (auto& ph : trace.phases)
        ph.resize(steps, n);

    std::array<PhaseLegState<double>, kPhases> legs;
    for (int ph = 0; ph < kPhases; ++ph) {
        legs[ph] = initial_phase_state(base);
        legs[ph].v_s = grid_voltage(config, 0.0, ph);
    }

    PiLine line{base.v_dc, base.v_dc, 0.0, config.line_c * config.line_length / 2.0,
                config.line_l * config.line_length};
    const double dc_share = config.p_ref / (kPhases * base.v_dc);

    for (long k = 0; k < steps; ++k) {
        const double t_next = static_cast<double>(k + 1) * base.t_s;
        const int n_sw_max = nsw_at(config.nsw_schedule, t_next);

        SystemParams<double> p = base;
        if (config.dc_model == DcModel::PiLine)
            p.v_dc = line.v_bus;

        double i_dc = 0.0;
        for (int ph = 0; ph < kPhases; ++ph) {
            const auto& now = legs[ph];
            const double i_ref = reference_current(config, t_next, ph);
            const double i_z_ref =
                dc_share + config.energy_gain * (base.nominal_cap_voltage() - leg_mean_voltage(now));
            const auto selection = modulate_phase(now, i_ref, n_sw_max, config.algorithm, p, i_z_ref);
            auto next = step_phase(now, selection.decision, grid_voltage(config, t_next, ph), p);
            if (!is_finite(next))
                throw DivergenceError(k, t_next);

            auto& rec = trace.phases[ph];
            rec.i_ref(k) = i_ref;
            rec.i(k) = next.i;
            rec.i_z(k) = next.i_z;
            rec.v_s(k) = next.v_s;
            rec.v_c.row(k).head(n) = next.upper.v_c.transpose();
            rec.v_c.row(k).tail(n) = next.lower.v_c.transpose();
            rec.u.row(k).head(n) = next.upper.u.transpose();
            rec.u.row(k).tail(n) = next.lower.u.transpose();
            rec.transitions_upper(k) = transitions(now.upper.u, next.upper.u);
            rec.transitions_lower(k) = transitions(now.lower.u, next.lower.u);

            i_dc += next.i_z;
            legs[ph] = std::move(next);
        }

        if (config.dc_model == DcModel::PiLine) {
            line.step(i_dc, base.t_s);
            if (!std::isfinite(line.v_bus) || !std::isfinite(line.i_line))
                throw DivergenceError(k, t_next);
        }
        trace.time(k) = t_next;
        trace.nsw_max(k) = n_sw_max;
        trace.v_dc(k) = config.dc_model == DcModel::PiLine ? line.v_bus : base.v_dc;
    }
    return trace;
}

} // namespace mmc
