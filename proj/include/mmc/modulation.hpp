#pragma once

// Per-step switching decision for one phase leg: submodule sorting
// (conventional voltage balancing, or voltage balancing under a per-step
// switching-event budget) followed by selection of the inserted-submodule
// counts that minimise the weighted AC-tracking / circulating-current error.

#include "mmc/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <vector>

namespace mmc {

enum class Algorithm { V1F2, V1FC };

template <typename Scalar>
struct ArmTargets {
    Scalar v_up_star;
    Scalar v_low_star;
};

/// Result of sorting one arm. Every per-position key refers to the final order.
template <typename Scalar>
struct SortedArm {
    Eigen::VectorXi order;   // 0-based submodule indices, highest priority first
    Vector<Scalar> v_c;      // anticipated voltage (hypothetical insertion), final order
    Eigen::VectorXi penalty; // key of the last (switching-budget) sort; zero for V1-F2
    Eigen::VectorXi n_sw;    // n_sw(m-1): turn-on events if the first m positions are inserted
    Eigen::VectorXi mu;      // max(0, n_sw - n_sw_max)
    int n_sw_max = 0;

    int size() const { return static_cast<int>(order.size()); }
};

template <typename Scalar>
struct SelectionResult {
    int m_up = 0;
    int m_low = 0;
    Scalar f = Scalar(0);
    SwitchDecision decision;
};

/// Arm voltage targets that would give i(t+T_s) = i_ref and i_z(t+T_s) = i_z_ref.
/// With i_z_ref = 0 this is the exact-suppression target.
template <typename Scalar>
ArmTargets<Scalar> compute_targets(const SystemParams<Scalar>& p, Scalar i_ref, Scalar i_now,
                                   Scalar i_z_now, Scalar v_s_now, Scalar i_z_ref = Scalar(0))
{
    const Scalar common = p.v_dc / Scalar(2) + p.l_arm / p.t_s * (i_z_now - i_z_ref);
    const Scalar differential = p.k_prime() * i_ref + v_s_now - p.l_prime() / p.t_s * i_now;
    return {common - differential, common + differential};
}

/// Weighted |AC current error| + |circulating current error| at the next step.
template <typename Scalar>
Scalar objective_f(const SystemParams<Scalar>& p, const ArmTargets<Scalar>& targets,
                   Scalar v_up_next, Scalar v_low_next)
{
    const Scalar dv_up = targets.v_up_star - v_up_next;
    const Scalar dv_low = targets.v_low_star - v_low_next;
    return p.w / (Scalar(2) * p.k_prime()) * std::abs(dv_low - dv_up) +
           p.w_z * p.t_s / (Scalar(2) * p.l_arm) * std::abs(dv_low + dv_up);
}

namespace detail {

template <typename Key>
void stable_sort_by(std::vector<int>& order, Key key)
{
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return key(a) < key(b); });
}

/// Stable sort by status (inserted first), then by anticipated voltage:
/// ascending while the arm charges (i_arm >= 0), descending otherwise.
template <typename Scalar>
std::vector<int> voltage_order(const ArmState<Scalar>& arm, const Vector<Scalar>& v_ant,
                               Scalar i_arm)
{
    std::vector<int> order(static_cast<std::size_t>(arm.size()));
    std::iota(order.begin(), order.end(), 0);
    detail::stable_sort_by(order, [&](int j) { return -static_cast<int>(arm.u(j)); });
    if (i_arm >= Scalar(0))
        detail::stable_sort_by(order, [&](int j) { return v_ant(j); });
    else
        detail::stable_sort_by(order, [&](int j) { return -v_ant(j); });
    return order;
}

template <typename Scalar>
SortedArm<Scalar> finish(const ArmState<Scalar>& arm, const Vector<Scalar>& v_ant,
                         const std::vector<int>& order, const std::vector<int>& penalty_by_sm,
                         int n_sw_max)
{
    const int n = arm.size();
    SortedArm<Scalar> s;
    s.order.resize(n);
    s.v_c.resize(n);
    s.penalty.resize(n);
    s.n_sw.resize(n);
    s.mu.resize(n);
    s.n_sw_max = n_sw_max;
    int turned_on = 0;
    for (int m = 0; m < n; ++m) {
        const int j = order[static_cast<std::size_t>(m)];
        s.order(m) = j;
        s.v_c(m) = v_ant(j);
        s.penalty(m) = penalty_by_sm[static_cast<std::size_t>(j)];
        turned_on += arm.u(j) == 0 ? 1 : 0;
        s.n_sw(m) = turned_on;
        s.mu(m) = std::max(0, turned_on - n_sw_max);
    }
    return s;
}

template <typename Scalar>
Vector<Scalar> hypothetical_insertion(const ArmState<Scalar>& arm, Scalar i_arm,
                                      const SystemParams<Scalar>& p)
{
    require(arm.v_c.size() == arm.u.size(), "arm: v_c and u lengths differ");
    return anticipate_capacitor_voltages(arm, i_arm, StatusVector::Ones(arm.size()), p);
}

} // namespace detail

/// Conventional voltage-balancing sort. Inserted submodules precede bypassed
/// ones only as a tie-break on equal anticipated voltage.
template <typename Scalar>
SortedArm<Scalar> sort_v1f2(const ArmState<Scalar>& arm, Scalar i_arm,
                            const SystemParams<Scalar>& p)
{
    const Vector<Scalar> v_ant = detail::hypothetical_insertion(arm, i_arm, p);
    const auto order = detail::voltage_order(arm, v_ant, i_arm);
    return detail::finish(arm, v_ant, order, std::vector<int>(order.size(), 0), arm.size());
}

/// Voltage-balancing sort under a budget of `n_sw_max` turn-on events per step.
///
/// After the status / voltage cascade, each bypassed submodule is charged the
/// penalty max(0, N - n_sw_max), where N is the running count of turn-on
/// events up to and including it along the voltage order; inserted submodules
/// cost nothing to keep. A final stable sort on that penalty moves submodules
/// whose insertion would exceed the budget behind all others.
template <typename Scalar>
SortedArm<Scalar> sort_v1fc(const ArmState<Scalar>& arm, Scalar i_arm, int n_sw_max,
                            const SystemParams<Scalar>& p)
{
    require(n_sw_max >= 0 && n_sw_max <= arm.size(), "sort_v1fc: n_sw_max outside [0, n]");
    const Vector<Scalar> v_ant = detail::hypothetical_insertion(arm, i_arm, p);
    auto order = detail::voltage_order(arm, v_ant, i_arm);

    std::vector<int> penalty(order.size(), 0);
    int turned_on = 0;
    for (int j : order) {
        if (arm.u(j) == 0) {
            ++turned_on;
            penalty[static_cast<std::size_t>(j)] = std::max(0, turned_on - n_sw_max);
        }
    }
    detail::stable_sort_by(order, [&](int j) { return penalty[static_cast<std::size_t>(j)]; });
    return detail::finish(arm, v_ant, order, penalty, n_sw_max);
}

/// [0, v_1, v_1 + v_2, ...] over the sorted order; `v_c_next` is indexed by submodule.
template <typename Scalar>
Vector<Scalar> cumulative_sums(const SortedArm<Scalar>& sorted, const Vector<Scalar>& v_c_next)
{
    require(v_c_next.size() == sorted.order.size(), "cumulative_sums: length mismatch");
    Vector<Scalar> sums(sorted.size() + 1);
    sums(0) = Scalar(0);
    for (int k = 0; k < sorted.size(); ++k)
        sums(k + 1) = sums(k) + v_c_next(sorted.order(k));
    return sums;
}

namespace detail {

template <typename Scalar>
bool better(const SelectionResult<Scalar>& a, const SelectionResult<Scalar>& b)
{
    return std::tie(a.f, a.m_up, a.m_low) < std::tie(b.f, b.m_up, b.m_low);
}

template <typename Scalar>
bool non_decreasing(const Vector<Scalar>& sums)
{
    for (Eigen::Index k = 1; k < sums.size(); ++k)
        if (sums(k) < sums(k - 1))
            return false;
    return true;
}

template <typename Scalar>
bool within(const Vector<Scalar>& sums, Scalar v)
{
    return v >= sums(0) && v <= sums(sums.size() - 1);
}

/// Index i in [0, size-2] with sums(i) <= v < sums(i+1), clamped at both ends.
template <typename Scalar>
int bracket(const Vector<Scalar>& sums, Scalar v)
{
    const int last = static_cast<int>(sums.size()) - 2;
    int i = 0;
    while (i < last && sums(i + 1) <= v)
        ++i;
    return i;
}

} // namespace detail

/// Exhaustive scan over all (n+1)^2 insertion-count pairs.
template <typename Scalar>
SelectionResult<Scalar> brute_force_select(const Vector<Scalar>& alpha, const Vector<Scalar>& beta,
                                           const ArmTargets<Scalar>& targets,
                                           const SystemParams<Scalar>& p)
{
    require(alpha.size() >= 2 && beta.size() >= 2, "brute_force_select: empty arm");
    SelectionResult<Scalar> best;
    bool first = true;
    for (int a = 0; a < alpha.size(); ++a) {
        for (int b = 0; b < beta.size(); ++b) {
            SelectionResult<Scalar> c;
            c.m_up = a;
            c.m_low = b;
            c.f = objective_f(p, targets, alpha(a), beta(b));
            if (first || detail::better(c, best)) {
                best = c;
                first = false;
            }
        }
    }
    return best;
}

/// Evaluates only the four corners of the cell bracketing (v_up*, v_low*).
/// The corner argument needs monotone sums and targets inside their range;
/// anything else goes through the exhaustive scan.
template <typename Scalar>
SelectionResult<Scalar> select_optimal(const Vector<Scalar>& alpha, const Vector<Scalar>& beta,
                                       const ArmTargets<Scalar>& targets,
                                       const SystemParams<Scalar>& p)
{
    require(alpha.size() >= 2 && beta.size() >= 2, "select_optimal: empty arm");
    if (!detail::non_decreasing(alpha) || !detail::non_decreasing(beta) ||
        !detail::within(alpha, targets.v_up_star) || !detail::within(beta, targets.v_low_star))
        return brute_force_select(alpha, beta, targets, p);

    const int i = detail::bracket(alpha, targets.v_up_star);
    const int j = detail::bracket(beta, targets.v_low_star);
    SelectionResult<Scalar> best;
    bool first = true;
    for (int a : {i, i + 1}) {
        for (int b : {j, j + 1}) {
            SelectionResult<Scalar> c;
            c.m_up = a;
            c.m_low = b;
            c.f = objective_f(p, targets, alpha(a), beta(b));
            if (first || detail::better(c, best)) {
                best = c;
                first = false;
            }
        }
    }
    return best;
}

/// Inserts the first m_up (m_low) submodules of each sorted arm.
template <typename Scalar>
SwitchDecision decision_from_prefix(const SortedArm<Scalar>& upper, const SortedArm<Scalar>& lower,
                                    int m_up, int m_low)
{
    const int n = upper.size();
    require(lower.size() == n, "decision_from_prefix: arm sizes differ");
    require(m_up >= 0 && m_up <= n && m_low >= 0 && m_low <= n,
            "decision_from_prefix: insertion count outside [0, n]");
    SwitchDecision d;
    d.u_next = StatusVector::Zero(2 * n);
    for (int k = 0; k < m_up; ++k)
        d.u_next(upper.order(k)) = 1;
    for (int k = 0; k < m_low; ++k)
        d.u_next(n + lower.order(k)) = 1;
    return d;
}

template <typename Scalar>
SortedArm<Scalar> sort_arm(const ArmState<Scalar>& arm, Scalar i_arm, int n_sw_max,
                           Algorithm algorithm, const SystemParams<Scalar>& p)
{
    return algorithm == Algorithm::V1FC ? sort_v1fc(arm, i_arm, n_sw_max, p)
                                        : sort_v1f2(arm, i_arm, p);
}

/// One modulation step for a phase leg: sort both arms, build the cumulative
/// sums of anticipated voltages, pick the insertion counts and map them back
/// to submodule indices.
template <typename Scalar>
SelectionResult<Scalar> modulate_phase(const PhaseLegState<Scalar>& state, Scalar i_ref,
                                       int n_sw_max, Algorithm algorithm,
                                       const SystemParams<Scalar>& p,
                                       Scalar i_z_ref = Scalar(0))
{
    const SortedArm<Scalar> upper = sort_arm(state.upper, state.upper.i_arm, n_sw_max, algorithm, p);
    const SortedArm<Scalar> lower = sort_arm(state.lower, state.lower.i_arm, n_sw_max, algorithm, p);

    const Vector<Scalar> alpha = cumulative_sums(upper, detail::hypothetical_insertion(state.upper, state.upper.i_arm, p));
    const Vector<Scalar> beta = cumulative_sums(lower, detail::hypothetical_insertion(state.lower, state.lower.i_arm, p));
    const auto targets = compute_targets(p, i_ref, state.i, state.i_z, state.v_s, i_z_ref);

    SelectionResult<Scalar> result = select_optimal(alpha, beta, targets, p);
    result.decision = decision_from_prefix(upper, lower, result.m_up, result.m_low);
    return result;
}

} // namespace mmc
