#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "scmi/averaged_model.hpp"

using namespace scmi;

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

CircuitParams ideal_params() {
    CircuitParams p;
    p.L1_H = 8e-6;
    p.L2_H = 100e-6;
    p.C1_F = 0.47e-6;
    p.C2_F = 0.47e-6;
    p.diode_vf_V = 0.0;
    p.sw.ron_s1_ohm = 0.0;
    p.sw.ron_unfolder_ohm = 0.0;
    return p;
}

OperatingPoint rated_op() {
    OperatingPoint op;
    op.Vdc_V = 35.0;
    op.Vo_rms_V = 220.0;
    op.fg_Hz = 50.0;
    op.fs_Hz = 100e3;
    op.Ipv_A = 7.13;
    op.load = LoadModel::resistive(194.0);
    return op;
}

constexpr double kTs = 1e-5;
constexpr double kVdc = 35.0;

} // namespace

TEST_CASE("voltage gain follows D/(1-D-D0) with the half-cycle sign") {
    CHECK(voltage_gain(0.5, 0.25, HalfCycle::Sepic) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(voltage_gain(0.5, 0.25, HalfCycle::Cuk) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(voltage_gain(0.78, 0.1322, HalfCycle::Sepic) ==
          doctest::Approx(8.883826879271075).epsilon(1e-12));
    CHECK_THROWS_AS(voltage_gain(0.7, 0.35, HalfCycle::Sepic), DegenerateDuty);
    CHECK_THROWS_AS(voltage_gain(0.8, 0.3, HalfCycle::Cuk), DegenerateDuty);
}

TEST_CASE("solve_d0 inverts the gain relation") {
    const double d0 = solve_d0(0.78, 35.0, 311.0);
    CHECK(d0 == doctest::Approx(0.13221864951768492).epsilon(1e-12));
    CHECK(voltage_gain(0.78, d0, HalfCycle::Sepic) * 35.0 ==
          doctest::Approx(311.0).epsilon(1e-12));

    CHECK(solve_d0(0.5, 35.0, 35.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("solve_d0 flags continuous conduction and reports the unclamped value") {
    // At D = 0.9 the algebraic result is -0.00129: past the conduction-mode
    // boundary, so the solver must refuse rather than clamp silently.
    CHECK_THROWS_AS(solve_d0(0.9, 35.0, 311.0), CcmViolation);
    try {
        solve_d0(0.9, 35.0, 311.0);
    } catch (const CcmViolation& e) {
        CHECK(e.unclamped_d0() == doctest::Approx(-0.0012861736334406348).epsilon(1e-9));
    }
    CHECK(solve_d0_unclamped(0.9, 35.0, 311.0) ==
          doctest::Approx(-0.0012861736334406348).epsilon(1e-12));
}

TEST_CASE("ripple currents scale with the on-interval volt-seconds") {
    const CircuitParams p = ideal_params();
    const RippleCurrents r = ripple_currents(p, kTs, kVdc, 0.78);
    CHECK(r.dIL1_A == doctest::Approx(34.125).epsilon(1e-12));
    CHECK(r.dIL2_A == doctest::Approx(2.73).epsilon(1e-12));

    const RippleCurrents z = ripple_currents(p, kTs, kVdc, 0.0);
    CHECK(z.dIL1_A == 0.0);
    CHECK(z.dIL2_A == 0.0);
}

TEST_CASE("valley current is negative at the rated point") {
    const CircuitParams p = ideal_params();
    const double d0 = solve_d0(0.78, kVdc, 311.0);
    CHECK(valley_current(p, kTs, kVdc, 0.78, d0) ==
          doctest::Approx(-0.4330692926045008).epsilon(1e-9));
    CHECK(valley_current(p, kTs, kVdc, 0.0, 0.0) == 0.0);
}

TEST_CASE("valley current vanishes exactly on the inductance-ratio boundary") {
    CircuitParams p = ideal_params();
    const double d = 0.6, d0 = 0.1;
    // L2/L1 = D/(1-D-D0) makes the two terms cancel.
    p.L1_H = 10e-6;
    p.L2_H = p.L1_H * d / (1.0 - d - d0);
    CHECK(valley_current(p, kTs, kVdc, d, d0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(dcm_inequality_margin(p, d, d0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("average source current matches the equivalent-inductance form") {
    const CircuitParams p = ideal_params();
    CHECK(avg_dc_current(p, kTs, kVdc, 0.777) == doctest::Approx(14.263097625).epsilon(1e-12));
    CHECK(avg_dc_current(p, kTs, kVdc, 0.5) == doctest::Approx(5.90625).epsilon(1e-12));
    CHECK(avg_dc_current(p, kTs, kVdc, 0.0) == 0.0);
}

TEST_CASE("average output current agrees between the two published routes") {
    const CircuitParams p = ideal_params();
    const double d = 0.78;
    const double d0 = solve_d0(d, kVdc, 311.0);
    const double i2 = avg_output_current(p, kTs, kVdc, d, d0, HalfCycle::Sepic);
    CHECK(i2 == doctest::Approx(1.617590836012861).epsilon(1e-9));
    CHECK(avg_output_current(p, kTs, kVdc, d, d0, HalfCycle::Cuk) ==
          doctest::Approx(i2).epsilon(1e-12));

    // Output-inductor route: IL2v + dIL2/2*(1-D0).
    const RippleCurrents r = ripple_currents(p, kTs, kVdc, d);
    const double il2v = -valley_current(p, kTs, kVdc, d, d0);
    CHECK(il2v + 0.5 * r.dIL2_A * (1.0 - d0) == doctest::Approx(i2).epsilon(1e-12));

    CHECK(avg_output_current(p, kTs, kVdc, 0.0, 0.0, HalfCycle::Sepic) == 0.0);
}

TEST_CASE("duty law produces a rectified sine capped below unity") {
    const CircuitParams p = ideal_params();
    CHECK(duty_peak(7.13, p, kTs, kVdc) == doctest::Approx(0.7769156219293595).epsilon(1e-12));
    CHECK(duty_law(7.13, p, kTs, kVdc, 0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(duty_law(7.13, p, kTs, kVdc, kPi / 2.0) ==
          doctest::Approx(0.7769156219293595).epsilon(1e-12));
    CHECK(duty_law(0.0, p, kTs, kVdc, 1.0) == 0.0);
    CHECK_THROWS_AS(duty_peak(30.0, p, kTs, kVdc), DutyOverflow);
}

TEST_CASE("inductance-ratio margin stays negative at the rated point") {
    const CircuitParams p = ideal_params();
    const double d0 = solve_d0(0.78, kVdc, 311.0);
    CHECK(dcm_inequality_margin(p, 0.78, d0) ==
          doctest::Approx(-3.6142857142857103).epsilon(1e-9));

    CircuitParams eq = p;
    eq.L2_H = eq.L1_H;
    CHECK(dcm_inequality_margin(eq, 0.5, 0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // Toward the zero crossing the required ratio collapses to -L2/L1.
    CHECK(dcm_inequality_margin(p, 1e-9, 0.5) == doctest::Approx(-12.5).epsilon(1e-6));
}

TEST_CASE("steady state at the line peak reproduces the rated numbers") {
    const CircuitParams p = ideal_params();
    const OperatingPoint op = rated_op();
    const SteadyStateSolution s = steady_state_at_angle(p, op, kPi / 2.0);
    CHECK(s.D == doctest::Approx(0.7769156219293595).epsilon(1e-12));
    CHECK(s.D0 == doctest::Approx(0.13568582959945652).epsilon(1e-9));
    CHECK(s.IL1v_A == doctest::Approx(-0.4290445896052428).epsilon(1e-9));
    CHECK(s.Idc_avg_A == doctest::Approx(14.26).epsilon(1e-3));
    CHECK(s.IL1p_A == doctest::Approx(s.IL1v_A + s.dIL1_A).epsilon(1e-12));
    CHECK(s.IL2p_A == doctest::Approx(s.IL2v_A + s.dIL2_A).epsilon(1e-12));
    CHECK(s.IL2v_A == doctest::Approx(-s.IL1v_A).epsilon(1e-12));
    CHECK(s.VC1_avg_V == doctest::Approx(35.0).epsilon(1e-12));
}

TEST_CASE("steady state at a zero crossing is the all-zero solution") {
    const SteadyStateSolution s = steady_state_at_angle(ideal_params(), rated_op(), 0.0);
    CHECK(s.D == 0.0);
    CHECK(s.D0 == 0.0);
    CHECK(s.Idc_avg_A == 0.0);
    CHECK(s.I2_avg_A == 0.0);
    CHECK(s.IL1v_A == 0.0);
    CHECK(s.VC1_avg_V == doctest::Approx(35.0).epsilon(1e-12));
}

TEST_CASE("steady state at 30 degrees matches the gain inversion") {
    const SteadyStateSolution s = steady_state_at_angle(ideal_params(), rated_op(), kPi / 6.0);
    CHECK(s.D == doctest::Approx(0.3884578109646797).epsilon(1e-12));
    CHECK(s.D0 == doctest::Approx(0.5241436405641362).epsilon(1e-9));
}

TEST_CASE("steady state in the negative half carries the boosted capacitor voltage") {
    const OperatingPoint op = rated_op();
    const SteadyStateSolution s = steady_state_at_angle(ideal_params(), op, 1.5 * kPi);
    CHECK(s.VC1_avg_V == doctest::Approx(35.0 + op.Vom_V()).epsilon(1e-9));
    CHECK(s.I2_avg_A > 0.0);
}

TEST_CASE("closed-form identities hold over randomized operating points") {
    std::mt19937 rng(987654);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        CircuitParams p = ideal_params();
        p.L1_H = 1e-6 + 40e-6 * u01(rng);
        p.L2_H = 5e-6 + 400e-6 * u01(rng);
        const double ts = 2e-6 + 2e-5 * u01(rng);
        const double vdc = 10.0 + 90.0 * u01(rng);
        const double d = 0.05 + 0.85 * u01(rng);
        const double d0 = (1.0 - d - 0.02) * u01(rng);
        if (d0 < 0.0) continue;

        // Gain identity through the inversion.
        const double vo = voltage_gain(d, d0, HalfCycle::Sepic) * vdc;
        CHECK(solve_d0(d, vdc, vo) == doctest::Approx(d0).epsilon(1e-9));

        // Source-side average: direct form vs valley-plus-ripple form.
        const RippleCurrents r = ripple_currents(p, ts, vdc, d);
        const double idc = avg_dc_current(p, ts, vdc, d);
        const double idc2 = valley_current(p, ts, vdc, d, d0) + 0.5 * r.dIL1_A * (1.0 - d0);
        CHECK(std::abs(idc - idc2) < 1e-9);

        // Output-side average: both published routes.
        const double i2a = avg_output_current(p, ts, vdc, d, d0, HalfCycle::Sepic);
        const double il2v = -valley_current(p, ts, vdc, d, d0);
        const double i2b = il2v + 0.5 * r.dIL2_A * (1.0 - d0);
        CHECK(std::abs(i2a - i2b) < 1e-9);

        // Loss-less power balance.
        CHECK(vdc * idc == doctest::Approx(vo * i2a).epsilon(1e-9));

        // A valid discontinuous solution always leaves a non-negative flat interval.
        CHECK((1.0 - d - d0) * ts >= 0.0);
    }
}

TEST_CASE("duty law is self-consistent with the average source current") {
    const CircuitParams p = ideal_params();
    const double ipv = 7.13;
    // Quadrature of the per-angle source current over a half line cycle must
    // return the commanded average.
    const int n = 20000;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double wt = kPi * static_cast<double>(i) / n;
        const double d = duty_law(ipv, p, kTs, kVdc, wt);
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * avg_dc_current(p, kTs, kVdc, d);
    }
    acc /= n;
    CHECK(acc == doctest::Approx(ipv).epsilon(1e-6));
}
