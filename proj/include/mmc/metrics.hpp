#pragma once

// Steady-state evaluation quantities computed from a SimTrace.

#include "mmc/hvdc_sim.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mmc {

/// Half-open time window (t_begin, t_end].
struct TimeWindow {
    double t_begin;
    double t_end;

    double length() const { return t_end - t_begin; }
};

/// Turn-on events of submodule `sm` (0-based, [0, 2n)) per second of window.
double effective_switching_frequency(const SimTrace& trace, int phase, int sm, TimeWindow window);

/// 100 (max v_C - min v_C) / mean v_C.
double ripple_percent(const SimTrace& trace, int phase, int sm, TimeWindow window);

/// 100 max|i_z - mean i_z| / max|i|.
double circulating_ratio(const SimTrace& trace, int phase, TimeWindow window);

/// 100 RMS(i - i_ref) / (I_m / sqrt 2).
double tracking_rmse(const SimTrace& trace, int phase, TimeWindow window);

/// Mean per-arm transition count sum_j |u_next - u_now| per step.
double mean_arm_transitions(const SimTrace& trace, int phase, TimeWindow window);

struct SegmentMetrics {
    int id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    int n_sw_max = 0;
    Eigen::VectorXd f_s_per_sm; // Hz, 2n entries
    double f_s_mean = 0.0;
    Eigen::VectorXd ripple_pct; // %, 2n entries
    double izm_ratio = 0.0;
    double tracking_rmse_pct = 0.0;
    double mean_transitions = 0.0;
    /// 100 (1 - f_s_mean / baseline), baseline = mean f_s of the unconstrained segments.
    double reduction_pct = 0.0;
};

struct ReportOptions {
    int phase = 0;
    double settle = 0.02; // s excluded at each segment start
};

/// One entry per schedule segment lying after the warm-up, in time order.
std::vector<SegmentMetrics> segment_report(const SimTrace& trace, const NswSchedule& schedule,
                                           const ReportOptions& options = {});

} // namespace mmc
