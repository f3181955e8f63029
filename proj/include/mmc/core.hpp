#pragma once

// Discrete-time model of one MMC phase leg built from half-bridge submodules.
//
// All quantities are SI. A phase leg holds an upper and a lower arm of n
// submodules each; the leg output current i flows into the grid through the
// series R-L branch and the circulating current i_z flows between the DC rails.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace mmc {

/// Raised when an operation is called with arguments that break its contract
/// (length mismatch, out-of-range constraint, non-finite input).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// 0 = bypassed, 1 = inserted.
using StatusVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

inline void require(bool condition, const std::string& what)
{
    if (!condition)
        throw ContractViolation(what);
}

template <typename Scalar>
struct SystemParams {
    int n = 6;                    // submodules per arm
    Scalar v_dc = Scalar(60e3);   // V
    Scalar c = Scalar(2.5e-3);    // F, submodule capacitance
    Scalar l_arm = Scalar(3e-3);  // H
    Scalar r = Scalar(0.03);      // Ohm, grid-side series resistance
    Scalar l_grid = Scalar(5e-3); // H, grid-side series inductance
    Scalar t_s = Scalar(25e-6);   // s
    Scalar f_grid = Scalar(60);   // Hz
    Scalar w = Scalar(1);         // AC tracking weight
    Scalar w_z = Scalar(1);       // circulating current weight

    /// L' = L + l/2
    Scalar l_prime() const { return l_grid + l_arm / Scalar(2); }
    /// K' = R + L'/T_s
    Scalar k_prime() const { return r + l_prime() / t_s; }

    Scalar nominal_cap_voltage() const { return v_dc / Scalar(n); }

    /// Throws ContractViolation naming the first offending field.
    void validate() const
    {
        require(n >= 1, "n must be >= 1");
        require(v_dc > 0 && std::isfinite(v_dc), "v_dc must be positive");
        require(c > 0 && std::isfinite(c), "c must be positive");
        require(l_arm > 0 && std::isfinite(l_arm), "l_arm must be positive");
        require(l_grid > 0 && std::isfinite(l_grid), "l_grid must be positive");
        require(t_s > 0 && std::isfinite(t_s), "t_s must be positive");
        require(r >= 0 && std::isfinite(r), "r must be non-negative");
        require(f_grid > 0 && std::isfinite(f_grid), "f_grid must be positive");
        require(w >= 0 && std::isfinite(w), "w must be non-negative");
        require(w_z >= 0 && std::isfinite(w_z), "w_z must be non-negative");
        require(l_prime() > 0 && k_prime() > 0, "derived L', K' must be positive");
    }
};

template <typename Scalar>
struct ArmState {
    Vector<Scalar> v_c;
    StatusVector u;
    Scalar i_arm = Scalar(0);

    int size() const { return static_cast<int>(v_c.size()); }
};

template <typename Scalar>
struct PhaseLegState {
    ArmState<Scalar> upper;
    ArmState<Scalar> lower;
    Scalar i = Scalar(0);   // AC output current
    Scalar i_z = Scalar(0); // circulating current
    Scalar v_s = Scalar(0); // grid phase voltage sample
};

/// Insertion vector for one phase leg: entries [0, n) upper arm, [n, 2n) lower arm.
struct SwitchDecision {
    StatusVector u_next;

    int arm_size() const { return static_cast<int>(u_next.size() / 2); }
    auto upper() const { return u_next.head(arm_size()); }
    auto lower() const { return u_next.tail(arm_size()); }
    int inserted_upper() const { return upper().template cast<int>().sum(); }
    int inserted_lower() const { return lower().template cast<int>().sum(); }
};

inline bool is_binary(const StatusVector& u)
{
    return (u.array() <= std::uint8_t(1)).all();
}

inline void validate_decision(const SwitchDecision& d, int n)
{
    require(d.u_next.size() == 2 * n, "switch decision must have 2n entries");
    require(is_binary(d.u_next), "switch decision entries must be 0 or 1");
}

template <typename Scalar>
struct ArmCurrents {
    Scalar upper;
    Scalar lower;
};

/// i_up = i_z + i/2, i_low = i_z - i/2.
template <typename Scalar>
ArmCurrents<Scalar> arm_currents(Scalar i, Scalar i_z)
{
    return {i_z + i / Scalar(2), i_z - i / Scalar(2)};
}

/// Inverse of arm_currents: returns {i, i_z}.
template <typename Scalar>
std::pair<Scalar, Scalar> leg_currents(Scalar i_up, Scalar i_low)
{
    return {i_up - i_low, (i_up + i_low) / Scalar(2)};
}

/// Next-step AC current with v_s(t+T_s) approximated by v_s(t).
template <typename Scalar>
Scalar predict_ac_current(const SystemParams<Scalar>& p, Scalar v_up_next, Scalar v_low_next,
                          Scalar v_s, Scalar i_now)
{
    require(std::isfinite(v_up_next) && std::isfinite(v_low_next) && std::isfinite(v_s) &&
                std::isfinite(i_now),
            "predict_ac_current: non-finite input");
    return ((v_low_next - v_up_next) / Scalar(2) - v_s + p.l_prime() / p.t_s * i_now) /
           p.k_prime();
}

/// v_C + (T_s i_arm / C) u_next; bypassed submodules keep their voltage.
template <typename Scalar>
Vector<Scalar> anticipate_capacitor_voltages(const ArmState<Scalar>& arm, Scalar i_arm,
                                             const StatusVector& u_next,
                                             const SystemParams<Scalar>& p)
{
    require(u_next.size() == arm.v_c.size(), "anticipate_capacitor_voltages: length mismatch");
    return arm.v_c + (p.t_s * i_arm / p.c) * u_next.template cast<Scalar>();
}

template <typename Scalar>
Scalar arm_voltage(const Vector<Scalar>& v_c_next, const StatusVector& u_next)
{
    require(u_next.size() == v_c_next.size(), "arm_voltage: length mismatch");
    return v_c_next.dot(u_next.template cast<Scalar>());
}

template <typename Scalar>
Scalar predict_circulating_current(const SystemParams<Scalar>& p, Scalar v_up_next,
                                   Scalar v_low_next, Scalar i_z_now)
{
    return p.t_s / (Scalar(2) * p.l_arm) * (p.v_dc - v_low_next - v_up_next) + i_z_now;
}

/// Capacitors at V_dc/n, everything bypassed, no current.
template <typename Scalar>
PhaseLegState<Scalar> initial_phase_state(const SystemParams<Scalar>& p)
{
    PhaseLegState<Scalar> s;
    for (auto* arm : {&s.upper, &s.lower}) {
        arm->v_c = Vector<Scalar>::Constant(p.n, p.nominal_cap_voltage());
        arm->u = StatusVector::Zero(p.n);
        arm->i_arm = Scalar(0);
    }
    return s;
}

template <typename Scalar>
bool is_finite(const PhaseLegState<Scalar>& s)
{
    return s.upper.v_c.allFinite() && s.lower.v_c.allFinite() && std::isfinite(s.i) &&
           std::isfinite(s.i_z) && std::isfinite(s.v_s) && std::isfinite(s.upper.i_arm) &&
           std::isfinite(s.lower.i_arm);
}

/// Advances one phase leg by T_s under `decision`.
///
/// Ordering: capacitors integrate the arm currents measured at t, the arm
/// voltages follow from the updated capacitors, then i and i_z advance and the
/// arm currents are recomposed from them.
template <typename Scalar>
PhaseLegState<Scalar> step_phase(const PhaseLegState<Scalar>& state, const SwitchDecision& decision,
                                 Scalar v_s_next, const SystemParams<Scalar>& p)
{
    validate_decision(decision, p.n);
    const StatusVector u_up = decision.upper();
    const StatusVector u_low = decision.lower();

    PhaseLegState<Scalar> next;
    next.upper.v_c = anticipate_capacitor_voltages(state.upper, state.upper.i_arm, u_up, p);
    next.lower.v_c = anticipate_capacitor_voltages(state.lower, state.lower.i_arm, u_low, p);
    next.upper.u = u_up;
    next.lower.u = u_low;

    const Scalar v_up = arm_voltage(next.upper.v_c, u_up);
    const Scalar v_low = arm_voltage(next.lower.v_c, u_low);
    next.i = predict_ac_current(p, v_up, v_low, state.v_s, state.i);
    next.i_z = predict_circulating_current(p, v_up, v_low, state.i_z);

    const auto currents = arm_currents(next.i, next.i_z);
    next.upper.i_arm = currents.upper;
    next.lower.i_arm = currents.lower;
    next.v_s = v_s_next;
    return next;
}

} // namespace mmc
