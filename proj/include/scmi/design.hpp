#pragma once

#include <string>
#include <vector>

#include "scmi/types.hpp"

// Component sizing rules and verification of a parts set against them.

namespace scmi {

/// Default ripple allowances, back-solved so that the bundled rated scenario
/// reproduces its own component values exactly.
inline constexpr double kDefaultC1RippleRatio = 1.2086956714776085; // dVC1/VC1
inline constexpr double kDefaultL2RippleRatio = 2.3972151027273365; // dIL2/IL2

struct L1Sizing {
    double L1_max_H;      ///< upper bound keeping the converter discontinuous at rated peak
    double D_at_boundary; ///< duty at the conduction-mode boundary, Vom/(Vom+Vpv)
};

/// Input-inductor bound Ts*Vom*Vpv / (4*Ipv*(Vpv+Vom)).
L1Sizing size_L1(const OperatingPoint& op);

/// Intermediate capacitor for a given voltage-ripple allowance, evaluated at
/// the conduction-boundary duty where the ripple is worst.
double size_C1(const OperatingPoint& op, double L1_H, double ripple_ratio);

/// Output inductor for a given current-ripple allowance at duty D.
/// io_rms_A <= 0 selects the rated output current Vdc*Ipv/Vo_rms.
double size_L2(const OperatingPoint& op, double d, double ripple_ratio, double io_rms_A = 0.0);

/// Output capacitor from the L2-C2 cutoff frequency; fc must satisfy
/// 10*fg <= fc <= fs/4 or RangeError is thrown.
double size_C2(double L2_H, double fc_Hz, const OperatingPoint& op);

/// Inverse of size_C2: cutoff frequency of the L2-C2 filter.
double cutoff_frequency(double L2_H, double C2_F);

struct DesignCriterion {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    double margin = 0.0; ///< positive = pass, as a fraction of the limit where sensible
    bool pass = false;
    std::string note;
};

struct DesignReport {
    std::vector<DesignCriterion> criteria;
    bool all_pass() const;
};

struct DesignOptions {
    double c1_ripple_ratio = kDefaultC1RippleRatio;
    double l2_ripple_ratio = kDefaultL2RippleRatio;
};

/// Evaluates every sizing rule plus the negative-valley condition across the
/// line cycle for the given parts set.
DesignReport verify_design(const CircuitParams& p, const OperatingPoint& op,
                           const DesignOptions& opt = {});

std::string to_text(const DesignReport& report);
std::string to_key_values(const DesignReport& report);

} // namespace scmi
