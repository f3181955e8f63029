#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmc/core.hpp"
#include "mmc/hvdc_sim.hpp"
#include "oracles.hpp"

#include <random>

using namespace mmc;
using doctest::Approx;

namespace {

SystemParams<double> table_one()
{
    return {};
}

ArmState<double> arm_of(std::initializer_list<double> v, std::initializer_list<int> u, double i = 0)
{
    ArmState<double> a;
    a.v_c.resize(static_cast<Eigen::Index>(v.size()));
    a.u.resize(static_cast<Eigen::Index>(u.size()));
    Eigen::Index k = 0;
    for (double x : v)
        a.v_c(k++) = x;
    k = 0;
    for (int x : u)
        a.u(k++) = static_cast<std::uint8_t>(x);
    a.i_arm = i;
    return a;
}

StatusVector status(std::initializer_list<int> u)
{
    StatusVector s(static_cast<Eigen::Index>(u.size()));
    Eigen::Index k = 0;
    for (int x : u)
        s(k++) = static_cast<std::uint8_t>(x);
    return s;
}

bool close(double a, double b, double rel = 1e-12)
{
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

TEST_CASE("derived constants")
{
    const auto p = table_one();
    CHECK(p.l_prime() == Approx(6.5e-3));
    CHECK(p.k_prime() == Approx(260.03));
    CHECK_NOTHROW(p.validate());

    auto bad = p;
    bad.c = 0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = p;
    bad.n = 0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = p;
    bad.r = -1;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("predict_ac_current")
{
    const auto p = table_one();
    const oracle::Params o;

    CHECK(predict_ac_current(p, 30000.0, 30000.0, 0.0, 0.0) == 0.0);

    const double drive = predict_ac_current(p, 29000.0, 31000.0, 0.0, 0.0);
    CHECK(close(drive, static_cast<double>(oracle::ac_current(o, 29000, 31000, 0, 0))));
    CHECK(drive == Approx(3.8457).epsilon(1e-4));

    const double memory = predict_ac_current(p, 30000.0, 30000.0, 0.0, 10.0);
    CHECK(close(memory, static_cast<double>(oracle::ac_current(o, 30000, 30000, 0, 10))));
    CHECK(memory == Approx(9.99885).epsilon(1e-6));

    CHECK_THROWS_AS(predict_ac_current(p, std::nan(""), 0.0, 0.0, 0.0), ContractViolation);
}

TEST_CASE("predict_ac_current is affine with the closed-form coefficients")
{
    const auto p = table_one();
    const double kp = p.k_prime();
    const double h = 1.0;
    const double x0[4] = {21000.0, 33000.0, 12000.0, 150.0};
    const auto f = [&](const double* x) { return predict_ac_current(p, x[0], x[1], x[2], x[3]); };
    const double expected[4] = {-1 / (2 * kp), 1 / (2 * kp), -1 / kp, p.l_prime() / p.t_s / kp};
    for (int k = 0; k < 4; ++k) {
        double plus[4], minus[4];
        std::copy(x0, x0 + 4, plus);
        std::copy(x0, x0 + 4, minus);
        plus[k] += h;
        minus[k] -= h;
        const double slope = (f(plus) - f(minus)) / (2 * h);
        CHECK(slope == Approx(expected[k]).epsilon(1e-9));
    }
}

TEST_CASE("anticipate_capacitor_voltages")
{
    const auto p = table_one();
    const auto arm = arm_of({10000, 9900, 10100}, {1, 0, 1});

    CHECK(anticipate_capacitor_voltages(arm, 250.0, status({0, 0, 0}), p) == arm.v_c);
    CHECK(anticipate_capacitor_voltages(arm, 0.0, status({1, 1, 1}), p) == arm.v_c);

    const auto one = arm_of({10000}, {0});
    CHECK(close(anticipate_capacitor_voltages(one, 100.0, status({1}), p)(0), 10001.0));

    const auto next = anticipate_capacitor_voltages(arm, -40.0, status({0, 1, 0}), p);
    CHECK(next(0) == 10000);
    CHECK(close(next(1), 9900 - 0.4));
    CHECK(next(2) == 10100);

    CHECK_THROWS_AS(anticipate_capacitor_voltages(arm, 1.0, status({1, 1}), p), ContractViolation);
}

TEST_CASE("arm_voltage")
{
    Vector<double> v = Vector<double>::Constant(6, 10000);
    CHECK(arm_voltage(v, status({0, 0, 0, 0, 0, 0})) == 0);
    CHECK(arm_voltage(v, status({1, 1, 1, 0, 0, 0})) == 30000);

    v << 10100, 9900, 10000, 10000, 10050, 9950;
    CHECK(arm_voltage(v, status({1, 0, 1, 0, 1, 0})) == 30150);

    CHECK_THROWS_AS(arm_voltage(v, status({1, 0})), ContractViolation);
}

TEST_CASE("arm_voltage is additive over disjoint insertion sets")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> volt(9000, 11000);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 1000; ++trial) {
        Vector<double> v(6);
        StatusVector a = StatusVector::Zero(6), b = StatusVector::Zero(6);
        for (int j = 0; j < 6; ++j) {
            v(j) = volt(rng);
            (coin(rng) ? a : b)(j) = coin(rng) ? 1 : 0;
        }
        const StatusVector both = a + b;
        CHECK(close(arm_voltage(v, a) + arm_voltage(v, b), arm_voltage(v, both)));
    }
}

TEST_CASE("predict_circulating_current")
{
    const auto p = table_one();
    CHECK(predict_circulating_current(p, 30000.0, 30000.0, 0.0) == 0.0);
    CHECK(close(predict_circulating_current(p, 29880.0, 29880.0, 0.0), 1.0));
    CHECK(predict_circulating_current(p, 25000.0, 35000.0, 5.0) == 5.0);

    const oracle::Params o;
    CHECK(close(predict_circulating_current(p, 21000.0, 40000.0, -3.0),
                static_cast<double>(oracle::circulating(o, 21000, 40000, -3))));
}

TEST_CASE("arm current decomposition round-trips")
{
    const auto c = arm_currents(120.0, 30.0);
    CHECK(c.upper == 90.0);
    CHECK(c.lower == -30.0);
    const auto [i, i_z] = leg_currents(c.upper, c.lower);
    CHECK(i == 120.0);
    CHECK(i_z == 30.0);
}

TEST_CASE("step_phase")
{
    const auto p = table_one();

    SUBCASE("equilibrium is a fixed point")
    {
        auto s = initial_phase_state(p);
        SwitchDecision d{status({1, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0})};
        for (int k = 0; k < 100; ++k)
            s = step_phase(s, d, 0.0, p);
        CHECK(s.i == 0.0);
        CHECK(s.i_z == 0.0);
        CHECK((s.upper.v_c.array() == 10000.0).all());
        CHECK((s.lower.v_c.array() == 10000.0).all());
    }

    SUBCASE("inserted capacitors drift by T_s i_arm / C, bypassed hold")
    {
        auto s = initial_phase_state(p);
        s.i = 100.0;
        s.i_z = 20.0;
        s.upper.i_arm = 70.0;
        s.lower.i_arm = -30.0;
        s.upper.u = status({1, 0, 1, 0, 1, 0});
        s.lower.u = status({0, 1, 0, 1, 0, 1});
        SwitchDecision d{status({1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1})};
        const auto next = step_phase(s, d, 100.0, p);
        for (int j = 0; j < 6; ++j) {
            const double up = s.upper.u(j) ? 10000.0 + p.t_s * 70.0 / p.c : 10000.0;
            const double low = s.lower.u(j) ? 10000.0 + p.t_s * -30.0 / p.c : 10000.0;
            CHECK(close(next.upper.v_c(j), up));
            CHECK(close(next.lower.v_c(j), low));
        }
        CHECK(next.v_s == 100.0);
        CHECK(next.upper.u == d.upper());
        const auto c = arm_currents(next.i, next.i_z);
        CHECK(next.upper.i_arm == c.upper);
        CHECK(next.lower.i_arm == c.lower);
    }

    SUBCASE("currents follow the one-step predictions")
    {
        const oracle::Params o;
        auto s = initial_phase_state(p);
        s.i = 50.0;
        s.i_z = 10.0;
        s.v_s = 5000.0;
        const auto c = arm_currents(s.i, s.i_z);
        s.upper.i_arm = c.upper;
        s.lower.i_arm = c.lower;
        SwitchDecision d{status({1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0})};
        const auto next = step_phase(s, d, 0.0, p);
        const double v_up = 2 * (10000 + p.t_s * c.upper / p.c);
        const double v_low = 4 * (10000 + p.t_s * c.lower / p.c);
        CHECK(close(next.i, static_cast<double>(oracle::ac_current(o, v_up, v_low, 5000, 50))));
        CHECK(close(next.i_z, static_cast<double>(oracle::circulating(o, v_up, v_low, 10))));
    }

    SUBCASE("constant arm-voltage sum keeps i_z constant")
    {
        auto s = initial_phase_state(p);
        s.i_z = 7.5;
        for (int k = 0; k < 50; ++k) {
            SwitchDecision d{status({1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0})};
            s.upper.i_arm = 0.0;
            s.lower.i_arm = 0.0;
            s = step_phase(s, d, 0.0, p);
            CHECK(s.i_z == 7.5);
        }
    }

    SUBCASE("bad decision")
    {
        const auto s = initial_phase_state(p);
        CHECK_THROWS_AS(step_phase(s, SwitchDecision{status({1, 0})}, 0.0, p), ContractViolation);
        SwitchDecision not_binary{StatusVector::Constant(12, 2)};
        CHECK_THROWS_AS(step_phase(s, not_binary, 0.0, p), ContractViolation);
    }
}

TEST_CASE("templated on scalar")
{
    SystemParams<float> pf;
    CHECK(predict_ac_current(pf, 30000.f, 30000.f, 0.f, 0.f) == 0.f);
    SystemParams<long double> pl;
    const long double i = predict_ac_current<long double>(pl, 29000, 31000, 0, 0);
    CHECK(static_cast<double>(i) == Approx(1000.0 / 260.03));
}

TEST_CASE("one 60 Hz cycle under V1-F2 keeps capacitors near nominal")
{
    ScenarioConfig c;
    c.duration = 0.0167; // 668 steps
    c.warmup = 0.0;
    c.segment_length = c.duration;
    c.nsw_levels = {6};
    c.algorithm = Algorithm::V1F2;
    c.rebuild_schedule();
    const auto trace = run_scenario(c);
    for (int ph = 0; ph < kPhases; ++ph) {
        const double mean = trace.phases[ph].v_c.row(trace.size() - 1).mean();
        CHECK(std::abs(mean - 10000.0) <= 100.0);
    }
}
