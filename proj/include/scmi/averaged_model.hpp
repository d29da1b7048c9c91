#pragma once

#include "scmi/types.hpp"

// Closed-form steady-state relations of the converter in discontinuous
// conduction, evaluated with ideal (loss-less) element values. All functions
// are pure; durations are expressed as fractions of the switching period Ts.

namespace scmi {

/// Conversion ratio vo/Vdc for a given on-interval fraction D and
/// discontinuous-interval fraction D0. Positive in the Sepic half,
/// negative in the Cuk half. Throws DegenerateDuty when D + D0 >= 1.
double voltage_gain(double d, double d0, HalfCycle half);

/// Discontinuous-interval fraction that produces |vo| from Vdc at duty D,
/// without range checking. Negative result means the point is continuous-mode.
double solve_d0_unclamped(double d, double vdc_V, double vo_abs_V);

/// Same as solve_d0_unclamped but throws CcmViolation (carrying the unclamped
/// value) when the result is negative, i.e. DCM cannot hold at this point.
double solve_d0(double d, double vdc_V, double vo_abs_V);

struct RippleCurrents {
    double dIL1_A;
    double dIL2_A;
};

/// Peak-to-valley current ripple of both inductors over the on interval.
RippleCurrents ripple_currents(const CircuitParams& p, double ts_s, double vdc_V, double d);

/// Inductor-1 current at the start of the on interval. Negative for a
/// correctly sized converter; the sign carries the design condition.
double valley_current(const CircuitParams& p, double ts_s, double vdc_V, double d, double d0);

/// Switching-period average of the source-side current, D^2*Ts*Vdc/(2*Leq).
double avg_dc_current(const CircuitParams& p, double ts_s, double vdc_V, double d);

/// Switching-period average magnitude of the unfolder-input current.
/// Identical for both half cycles.
double avg_output_current(const CircuitParams& p, double ts_s, double vdc_V, double d, double d0,
                          HalfCycle half);

/// Peak duty ratio 2*sqrt(Ipv*Leq/(Ts*Vpv)) that draws an average Ipv from the
/// source over a half line cycle. Throws DutyOverflow when the result is >= 1.
double duty_peak(double ipv_A, const CircuitParams& p, double ts_s, double vpv_V);

/// Rectified-sine duty command duty_peak * |sin(omega_t)|.
double duty_law(double ipv_A, const CircuitParams& p, double ts_s, double vpv_V, double omega_t);

/// D/(1-D-D0) - L2/L1. Positive means the valley current would be positive;
/// the design keeps this negative so the expression is reported, not enforced.
double dcm_inequality_margin(const CircuitParams& p, double d, double d0);

/// Full closed-form solution at one line angle. Returns the all-zero solution
/// at voltage zero crossings. Propagates CcmViolation and DutyOverflow.
SteadyStateSolution steady_state_at_angle(const CircuitParams& p, const OperatingPoint& op,
                                          double omega_t);

} // namespace scmi
