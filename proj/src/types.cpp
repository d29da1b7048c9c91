#include "scmi/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace scmi {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

} // namespace

void CircuitParams::validate() const {
    require(L1_H > 0.0, "L1 must be positive");
    require(L2_H > 0.0, "L2 must be positive");
    require(C1_F > 0.0, "C1 must be positive");
    require(C2_F > 0.0, "C2 must be positive");
    require(Lg_H >= 0.0, "Lg must be non-negative");
    require(rL1_ohm >= 0.0 && rL2_ohm >= 0.0 && rC1_ohm >= 0.0 && rC2_ohm >= 0.0,
            "series resistances must be non-negative");
    require(diode_vf_V >= 0.0, "diode forward drop must be non-negative");
    require(sw.ron_s1_ohm >= 0.0 && sw.ron_unfolder_ohm >= 0.0,
            "switch on-resistances must be non-negative");
    require(sw.t_fall_s >= 0.0, "switch fall time must be non-negative");
    require(std::isfinite(leq(*this)) && leq(*this) > 0.0, "L1||L2 must be positive");
}

double leq(const CircuitParams& p) {
    return p.L1_H * p.L2_H / (p.L1_H + p.L2_H);
}

LoadModel LoadModel::resistive(double ro_ohm) {
    LoadModel m;
    m.kind = Kind::Resistive;
    m.Ro_ohm = ro_ohm;
    return m;
}

LoadModel LoadModel::grid(double vo_rms_V, double phase_rad, double lg_H, double fg_Hz) {
    LoadModel m;
    m.kind = Kind::GridSource;
    m.Vo_rms_V = vo_rms_V;
    m.phase_rad = phase_rad;
    m.Lg_H = lg_H;
    m.fg_Hz = fg_Hz;
    return m;
}

void LoadModel::validate() const {
    if (kind == Kind::Resistive) {
        if (Ro_ohm <= 0.0) throw ConfigError("load resistance must be positive");
    } else {
        if (Lg_H <= 0.0) throw ConfigError("grid coupling inductance must be positive");
        if (Vo_rms_V <= 0.0) throw ConfigError("grid EMF must be positive");
        if (fg_Hz < 0.0) throw ConfigError("grid frequency must be non-negative");
    }
}

double LoadModel::rectified_emf(double t_s) const {
    if (kind != Kind::GridSource) return 0.0;
    const double vom = std::sqrt(2.0) * Vo_rms_V;
    return vom * std::abs(std::sin(2.0 * std::numbers::pi * fg_Hz * t_s + phase_rad));
}

void OperatingPoint::validate() const {
    if (Vdc_V <= 0.0) throw ConfigError("source voltage must be positive");
    if (Vo_rms_V <= 0.0) throw ConfigError("target rms voltage must be positive");
    if (fg_Hz <= 0.0) throw ConfigError("grid frequency must be positive");
    if (fs_Hz <= 0.0) throw ConfigError("switching frequency must be positive");
    if (Ipv_A < 0.0) throw ConfigError("source current must be non-negative");
    if (fs_Hz / fg_Hz < 100.0)
        throw ConfigError("switching frequency must be at least 100x the line frequency");
    load.validate();
}

} // namespace scmi
