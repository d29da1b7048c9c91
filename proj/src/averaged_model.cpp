#include "scmi/averaged_model.hpp"

#include <cmath>
#include <sstream>

namespace scmi {

double voltage_gain(double d, double d0, HalfCycle half) {
    const double denom = 1.0 - d - d0;
    if (denom <= 0.0) {
        std::ostringstream os;
        os << "degenerate duty: D=" << d << " D0=" << d0 << " leaves no diode interval";
        throw DegenerateDuty(os.str());
    }
    const double g = d / denom;
    return half == HalfCycle::Sepic ? g : -g;
}

double solve_d0_unclamped(double d, double vdc_V, double vo_abs_V) {
    return 1.0 - d * (1.0 + vdc_V / vo_abs_V);
}

double solve_d0(double d, double vdc_V, double vo_abs_V) {
    const double d0 = solve_d0_unclamped(d, vdc_V, vo_abs_V);
    if (d0 < 0.0) {
        std::ostringstream os;
        os << "continuous conduction at D=" << d << ", Vdc=" << vdc_V << " V, |vo|=" << vo_abs_V
           << " V (unclamped D0=" << d0 << ")";
        throw CcmViolation(os.str(), d0);
    }
    return d0;
}

RippleCurrents ripple_currents(const CircuitParams& p, double ts_s, double vdc_V, double d) {
    const double vs = d * ts_s * vdc_V;
    return {vs / p.L1_H, vs / p.L2_H};
}

double valley_current(const CircuitParams& p, double ts_s, double vdc_V, double d, double d0) {
    return 0.5 * d * ts_s * vdc_V * (d / p.L2_H - (1.0 - d - d0) / p.L1_H);
}

double avg_dc_current(const CircuitParams& p, double ts_s, double vdc_V, double d) {
    return d * d * ts_s * vdc_V / (2.0 * leq(p));
}

double avg_output_current(const CircuitParams& p, double ts_s, double vdc_V, double d, double d0,
                          HalfCycle /*half*/) {
    return (1.0 - d - d0) * d * ts_s * vdc_V / (2.0 * leq(p));
}

double duty_peak(double ipv_A, const CircuitParams& p, double ts_s, double vpv_V) {
    const double dp = 2.0 * std::sqrt(ipv_A * leq(p) / (ts_s * vpv_V));
    if (dp >= 1.0) {
        std::ostringstream os;
        os << "peak duty " << dp << " >= 1: source current " << ipv_A << " A is unattainable";
        throw DutyOverflow(os.str());
    }
    return dp;
}

double duty_law(double ipv_A, const CircuitParams& p, double ts_s, double vpv_V, double omega_t) {
    return duty_peak(ipv_A, p, ts_s, vpv_V) * std::abs(std::sin(omega_t));
}

double dcm_inequality_margin(const CircuitParams& p, double d, double d0) {
    return d / (1.0 - d - d0) - p.L2_H / p.L1_H;
}

SteadyStateSolution steady_state_at_angle(const CircuitParams& p, const OperatingPoint& op,
                                          double omega_t) {
    const double ts = op.Ts_s();
    const double s = std::sin(omega_t);
    const HalfCycle half = s >= 0.0 ? HalfCycle::Sepic : HalfCycle::Cuk;
    const double vo_abs = op.Vom_V() * std::abs(s);

    SteadyStateSolution sol;
    sol.VC1_avg_V = op.Vdc_V + (half == HalfCycle::Cuk ? vo_abs : 0.0);
    if (vo_abs == 0.0) return sol; // converter idles at the zero crossing

    sol.D = duty_law(op.Ipv_A, p, ts, op.Vdc_V, omega_t);
    if (sol.D == 0.0) return sol;

    sol.D0 = solve_d0(sol.D, op.Vdc_V, vo_abs);

    const RippleCurrents r = ripple_currents(p, ts, op.Vdc_V, sol.D);
    sol.dIL1_A = r.dIL1_A;
    sol.dIL2_A = r.dIL2_A;
    sol.IL1v_A = valley_current(p, ts, op.Vdc_V, sol.D, sol.D0);
    sol.IL1p_A = sol.IL1v_A + sol.dIL1_A;
    sol.IL2v_A = -sol.IL1v_A;
    sol.IL2p_A = sol.IL2v_A + sol.dIL2_A;
    sol.Idc_avg_A = avg_dc_current(p, ts, op.Vdc_V, sol.D);
    sol.I2_avg_A = avg_output_current(p, ts, op.Vdc_V, sol.D, sol.D0, half);
    return sol;
}

} // namespace scmi
