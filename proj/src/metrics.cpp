#include "mmc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mmc {

namespace {

struct RowRange {
    long first;
    long count;
};

/// Records k with t_begin < t_k <= t_end.
RowRange rows(const SimTrace& trace, TimeWindow window)
{
    require(window.length() > 0, "metrics: empty window");
    const long first = std::lround(window.t_begin / trace.t_s);
    const long end = std::lround(window.t_end / trace.t_s);
    require(first >= 0 && end <= trace.size() && end > first, "metrics: window outside trace");
    return {first, end - first};
}

void check_phase(int phase)
{
    require(phase >= 0 && phase < kPhases, "metrics: phase outside [0, 3)");
}

} // namespace

double effective_switching_frequency(const SimTrace& trace, int phase, int sm, TimeWindow window)
{
    check_phase(phase);
    require(sm >= 0 && sm < 2 * trace.n, "metrics: submodule index outside [0, 2n)");
    const auto r = rows(trace, window);
    const auto& u = trace.phases[phase].u;
    long turn_on = 0;
    for (long k = r.first; k < r.first + r.count; ++k) {
        const std::uint8_t before = k == 0 ? 0 : u(k - 1, sm);
        turn_on += (before == 0 && u(k, sm) == 1) ? 1 : 0;
    }
    return static_cast<double>(turn_on) / window.length();
}

double ripple_percent(const SimTrace& trace, int phase, int sm, TimeWindow window)
{
    check_phase(phase);
    require(sm >= 0 && sm < 2 * trace.n, "metrics: submodule index outside [0, 2n)");
    const auto r = rows(trace, window);
    const auto v = trace.phases[phase].v_c.col(sm).segment(r.first, r.count);
    return 100.0 * (v.maxCoeff() - v.minCoeff()) / v.mean();
}

double circulating_ratio(const SimTrace& trace, int phase, TimeWindow window)
{
    check_phase(phase);
    const auto r = rows(trace, window);
    const auto& ph = trace.phases[phase];
    const auto i_z = ph.i_z.segment(r.first, r.count);
    const double amplitude = ph.i.segment(r.first, r.count).cwiseAbs().maxCoeff();
    if (amplitude == 0.0)
        return 0.0;
    return 100.0 * (i_z.array() - i_z.mean()).abs().maxCoeff() / amplitude;
}

double tracking_rmse(const SimTrace& trace, int phase, TimeWindow window)
{
    check_phase(phase);
    require(trace.i_m > 0, "tracking_rmse: reference amplitude must be positive");
    const auto r = rows(trace, window);
    const auto& ph = trace.phases[phase];
    const Eigen::VectorXd err = ph.i.segment(r.first, r.count) - ph.i_ref.segment(r.first, r.count);
    const double rms = std::sqrt(err.squaredNorm() / static_cast<double>(r.count));
    return 100.0 * rms / (trace.i_m / std::sqrt(2.0));
}

double mean_arm_transitions(const SimTrace& trace, int phase, TimeWindow window)
{
    check_phase(phase);
    const auto r = rows(trace, window);
    const auto& ph = trace.phases[phase];
    const double total = ph.transitions_upper.segment(r.first, r.count).sum() +
                         ph.transitions_lower.segment(r.first, r.count).sum();
    return total / (2.0 * static_cast<double>(r.count));
}

std::vector<SegmentMetrics> segment_report(const SimTrace& trace, const NswSchedule& schedule,
                                           const ReportOptions& options)
{
    std::vector<SegmentMetrics> report;
    const int sms = 2 * trace.n;
    for (const auto& seg : schedule.segments) {
        if (seg.t_end <= trace.warmup + 1e-12)
            continue;
        SegmentMetrics m;
        m.id = static_cast<int>(report.size());
        m.t_start = seg.t_start;
        m.t_end = seg.t_end;
        m.n_sw_max = seg.n_sw_max;
        const double settle = std::min(options.settle, 0.5 * (seg.t_end - seg.t_start));
        const TimeWindow w{seg.t_start + settle, seg.t_end};

        m.f_s_per_sm.resize(sms);
        m.ripple_pct.resize(sms);
        for (int sm = 0; sm < sms; ++sm) {
            m.f_s_per_sm(sm) = effective_switching_frequency(trace, options.phase, sm, w);
            m.ripple_pct(sm) = ripple_percent(trace, options.phase, sm, w);
        }
        m.f_s_mean = m.f_s_per_sm.mean();
        m.izm_ratio = circulating_ratio(trace, options.phase, w);
        m.tracking_rmse_pct = tracking_rmse(trace, options.phase, w);
        m.mean_transitions = mean_arm_transitions(trace, options.phase, w);
        report.push_back(std::move(m));
    }

    double baseline = 0.0;
    int count = 0;
    for (const auto& m : report) {
        if (m.n_sw_max == trace.n) {
            baseline += m.f_s_mean;
            ++count;
        }
    }
    if (count > 0 && baseline > 0.0) {
        baseline /= count;
        for (auto& m : report)
            m.reduction_pct = 100.0 * (1.0 - m.f_s_mean / baseline);
    }
    return report;
}

} // namespace mmc
