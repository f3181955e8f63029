#pragma once

// Shared test inputs: random selection instances and phase states lifted out
// of a recorded trace.

#include "mmc/hvdc_sim.hpp"
#include "mmc/modulation.hpp"

#include <random>
#include <vector>

namespace fixtures {

struct SelectionInstance {
    mmc::Vector<double> alpha;
    mmc::Vector<double> beta;
    mmc::ArmTargets<double> targets;
};

/// Cumulative sums of n capacitor voltages drawn from nominal * (1 +- spread),
/// targets uniform over [lo, hi] * V_dc.
inline SelectionInstance random_selection(std::mt19937_64& rng, const mmc::SystemParams<double>& p,
                                          double spread = 0.1, double lo = -0.1, double hi = 1.1)
{
    const double nominal = p.nominal_cap_voltage();
    std::uniform_real_distribution<double> cap(nominal * (1 - spread), nominal * (1 + spread));
    std::uniform_real_distribution<double> target(lo * p.v_dc, hi * p.v_dc);
    SelectionInstance s;
    s.alpha.resize(p.n + 1);
    s.beta.resize(p.n + 1);
    s.alpha(0) = s.beta(0) = 0.0;
    for (int k = 0; k < p.n; ++k) {
        s.alpha(k + 1) = s.alpha(k) + cap(rng);
        s.beta(k + 1) = s.beta(k) + cap(rng);
    }
    s.targets = {target(rng), target(rng)};
    return s;
}

/// Random arm: voltages nominal +- spread, random statuses.
inline mmc::ArmState<double> random_arm(std::mt19937_64& rng, const mmc::SystemParams<double>& p,
                                        double spread = 0.1)
{
    const double nominal = p.nominal_cap_voltage();
    std::uniform_real_distribution<double> cap(nominal * (1 - spread), nominal * (1 + spread));
    std::bernoulli_distribution on(0.5);
    mmc::ArmState<double> arm;
    arm.v_c.resize(p.n);
    arm.u.resize(p.n);
    for (int j = 0; j < p.n; ++j) {
        arm.v_c(j) = cap(rng);
        arm.u(j) = on(rng) ? 1 : 0;
    }
    return arm;
}

/// Phase-leg state held in record k of a trace.
inline mmc::PhaseLegState<double> state_at(const mmc::SimTrace& trace, int phase, long k)
{
    const auto& ph = trace.phases[static_cast<std::size_t>(phase)];
    const int n = trace.n;
    mmc::PhaseLegState<double> s;
    s.upper.v_c = ph.v_c.row(k).head(n).transpose();
    s.lower.v_c = ph.v_c.row(k).tail(n).transpose();
    s.upper.u = ph.u.row(k).head(n).transpose();
    s.lower.u = ph.u.row(k).tail(n).transpose();
    s.i = ph.i(k);
    s.i_z = ph.i_z(k);
    s.v_s = ph.v_s(k);
    const auto c = mmc::arm_currents(s.i, s.i_z);
    s.upper.i_arm = c.upper;
    s.lower.i_arm = c.lower;
    return s;
}

inline std::vector<double> to_std(const mmc::Vector<double>& v)
{
    return {v.data(), v.data() + v.size()};
}

inline std::vector<int> to_std(const mmc::StatusVector& u)
{
    return {u.data(), u.data() + u.size()};
}

inline std::vector<int> to_std(const Eigen::VectorXi& v)
{
    return {v.data(), v.data() + v.size()};
}

} // namespace fixtures
