#pragma once

// Back-to-back MMC-HVDC scenario: three phase legs of the converter under test
// fed from a DC link whose far end (the second converter) is a controlled DC
// source, connected to a stiff three-phase grid through R-L.

#include "mmc/core.hpp"
#include "mmc/modulation.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmc {

enum class DcModel { StiffSource, PiLine };

constexpr int kPhases = 3;

struct NswSegment {
    double t_start;
    double t_end;
    int n_sw_max;
};

/// Per-step switching-event budget over time. Segments cover (t_start, t_end];
/// the first segment also contains its start instant.
struct NswSchedule {
    std::vector<NswSegment> segments;

    void validate(double duration, int n) const;
};

/// Constant budget `levels[k]` on (warmup + k*segment, warmup + (k+1)*segment],
/// preceded by an unconstrained (n_sw_max = n) warm-up segment when warmup > 0.
/// The last segment is stretched or cut to end at `duration`; segments
/// starting at or beyond `duration` are dropped.
NswSchedule staircase_schedule(double warmup, double segment_length, const std::vector<int>& levels,
                               double duration, int n);

/// The 6, 0, 1, 2, 3, 4, 5, 6 staircase.
std::vector<int> paper_staircase_levels();

int nsw_at(const NswSchedule& schedule, double t);

struct ScenarioConfig {
    SystemParams<double> params;
    double duration = 2.6;
    double warmup = 1.0;
    double segment_length = 0.2;
    double p_ref = 13.18e6;   // W, positive = delivered to the grid
    double v_s_peak = 25.5e3; // V, grid phase peak
    Algorithm algorithm = Algorithm::V1FC;
    std::vector<int> nsw_levels = paper_staircase_levels();
    NswSchedule nsw_schedule;
    DcModel dc_model = DcModel::StiffSource;
    double line_length = 5.0; // km
    double line_c = 16e-6;    // F/km
    double line_l = 50e-6;    // H/km
    /// A/V gain from leg mean capacitor-voltage error to circulating-current reference.
    double energy_gain = 0.1;
    /// Interval excluded from metrics at the start of each schedule segment.
    double settle = 0.02;

    long steps() const;
    /// Rebuilds nsw_schedule from warmup / segment_length / nsw_levels / duration.
    void rebuild_schedule();
    void validate() const;
};

/// 2.6 s run, 1 s warm-up, 0.2 s staircase segments.
ScenarioConfig paper_profile();
/// 0.5 s run, 0.1 s warm-up, 0.05 s staircase segments.
ScenarioConfig fast_profile();

/// Peak of the phase reference current, 2 P / (3 V_peak).
double current_amplitude(const ScenarioConfig& config);
double phase_offset(int phase);
double reference_current(const ScenarioConfig& config, double t, int phase);
double grid_voltage(const ScenarioConfig& config, double t, int phase);

using StatusMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Time series of one phase leg. Row k holds the state at t = (k+1) T_s.
/// Submodule columns: [0, n) upper arm, [n, 2n) lower arm.
struct PhaseTrace {
    Eigen::VectorXd i_ref;
    Eigen::VectorXd i;
    Eigen::VectorXd i_z;
    Eigen::VectorXd v_s;
    Eigen::MatrixXd v_c;
    StatusMatrix u;
    Eigen::VectorXi transitions_upper; // sum_j |u_next - u_now| per step
    Eigen::VectorXi transitions_lower;

    void resize(long steps, int n);
};

struct SimTrace {
    double t_s = 0.0;
    int n = 0;
    double warmup = 0.0;
    double i_m = 0.0; // reference current amplitude
    NswSchedule schedule;
    Eigen::VectorXd time;
    Eigen::VectorXi nsw_max;
    Eigen::VectorXd v_dc;
    std::array<PhaseTrace, kPhases> phases;

    long size() const { return static_cast<long>(time.size()); }
    /// Record index holding time t (t a multiple of t_s within the trace).
    long index_of(double t) const;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(long step, double time);

    long step() const { return step_; }
    double time() const { return time_; }

private:
    long step_;
    double time_;
};

SimTrace run_scenario(const ScenarioConfig& config);

} // namespace mmc
