#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "scmi/errors.hpp"

namespace scmi {

/// Sub-interval of one switching period.
/// Mode I: high-frequency switch on, both inductor currents ramp up.
/// Mode II: switch off, freewheeling diode conducts, energy transfers to the output.
/// Mode III: diode current has reached zero; the remaining circulating loop
/// carries iL1 = -iL2 until the next switch turn-on.
enum class ModeId : std::uint8_t {
    ModeI = 1,
    ModeII = 2,
    ModeIII = 3,
};

/// Which half of the line cycle the unfolding bridge has selected.
/// Sepic while the reference grid voltage is >= 0, Cuk otherwise.
enum class HalfCycle : std::uint8_t {
    Sepic = 0,
    Cuk = 1,
};

/// Loss parameters of the semiconductor switches.
struct SwitchParams {
    double ron_s1_ohm = 24e-3;       ///< on-resistance of the high-frequency switch
    double ron_unfolder_ohm = 37e-3; ///< on-resistance of each line-frequency switch
    double t_fall_s = 30e-9;         ///< current fall time at turn-off (loss model only)
};

/// Passive and parasitic element values of the power stage.
struct CircuitParams {
    double L1_H = 8e-6;
    double L2_H = 100e-6;
    double C1_F = 0.47e-6;
    double C2_F = 0.47e-6;
    double Lg_H = 1e-3;

    double rL1_ohm = 0.0;
    double rL2_ohm = 0.0;
    double rC1_ohm = 0.0;
    double rC2_ohm = 0.0;
    double diode_vf_V = 0.7;

    SwitchParams sw;

    /// Throws ConfigError if any element value is out of range.
    void validate() const;
};

/// Parallel combination L1*L2/(L1+L2) of the two converter inductors.
double leq(const CircuitParams& p);

/// Load attached to the unfolded output terminals.
struct LoadModel {
    enum class Kind : std::uint8_t { Resistive, GridSource };

    Kind kind = Kind::Resistive;

    // Resistive
    double Ro_ohm = 194.0;

    // GridSource: stiff sinusoidal EMF behind a coupling inductance.
    // fg_Hz = 0 degenerates to a dc clamp at Vo_rms*sqrt(2)*|sin(phase)|.
    double Vo_rms_V = 220.0;
    double phase_rad = 0.0;
    double Lg_H = 1e-3;
    double fg_Hz = 50.0;

    static LoadModel resistive(double ro_ohm);
    static LoadModel grid(double vo_rms_V, double phase_rad, double lg_H, double fg_Hz);

    void validate() const;

    /// Rectified EMF magnitude seen by the internal (pre-unfolder) output node.
    double rectified_emf(double t_s) const;
};

/// Source, grid and switching conditions for one scenario.
struct OperatingPoint {
    double Vdc_V = 35.0;
    double Vo_rms_V = 220.0;
    double fg_Hz = 50.0;
    double fs_Hz = 100e3;
    double Ipv_A = 7.13;
    LoadModel load;

    double Ts_s() const { return 1.0 / fs_Hz; }
    double Vom_V() const { return std::sqrt(2.0) * Vo_rms_V; }

    void validate() const;
};

/// Instantaneous converter state. Rectified (pre-unfolder) frame: vC2 and iLg
/// hold the magnitudes that map to the bipolar terminal quantities through
/// vo = +vC2 / io = +iLg in the Sepic half and vo = -vC2 / io = -iLg in the Cuk half.
struct ConverterState {
    double iL1_A = 0.0;
    double iL2_A = 0.0;
    double vC1_V = 0.0;
    double vC2_V = 0.0;
    double iLg_A = 0.0;
    ModeId mode = ModeId::ModeIII;
    HalfCycle half = HalfCycle::Sepic;
};

/// Closed-form DCM quantities at one line angle.
struct SteadyStateSolution {
    double D = 0.0;        ///< switch-on fraction of the period
    double D0 = 0.0;       ///< discontinuous-interval fraction
    double dIL1_A = 0.0;   ///< ripple of iL1
    double dIL2_A = 0.0;   ///< ripple of iL2
    double IL1v_A = 0.0;   ///< iL1 at the start of the on interval (valley)
    double IL1p_A = 0.0;   ///< iL1 at the end of the on interval (peak)
    double IL2v_A = 0.0;
    double IL2p_A = 0.0;
    double Idc_avg_A = 0.0; ///< switching-period average source current
    double I2_avg_A = 0.0;  ///< switching-period average unfolder-input current (magnitude)
    double VC1_avg_V = 0.0; ///< switching-period average intermediate capacitor voltage
};

/// Per-switching-period bookkeeping kept alongside the sampled waveforms.
struct PeriodRecord {
    double t_start_s = 0.0;
    double duty = 0.0;
    HalfCycle half = HalfCycle::Sepic;
    bool blanked = false;    ///< switch held off for the half-cycle swap
    bool had_mode3 = false;  ///< diode current reached zero within the period
    bool ccm = false;        ///< diode still conducting at the next turn-on
    double mode3_frac = 0.0; ///< fraction of the period spent in Mode III
    double turnoff_v_V = 0.0; ///< blocking voltage right after S1 turn-off
    double turnoff_i_A = 0.0; ///< switch current right before S1 turn-off
    double turnon_v_V = 0.0;  ///< blocking voltage right before a hard (CCM) turn-on
    double turnon_i_A = 0.0;  ///< diode current commutated at a hard turn-on
    double e_in_J = 0.0;      ///< source energy drawn over the period
    double e_out_J = 0.0;     ///< energy delivered to the load over the period
};

/// Uniformly sampled trajectory of states and derived terminal signals.
struct WaveformRecord {
    double dt_s = 0.0; ///< nominal sample spacing (strictly uniform)

    std::vector<double> t_s;
    std::vector<double> iL1_A;
    std::vector<double> iL2_A;
    std::vector<double> vC1_V;
    std::vector<double> vC2_V;
    std::vector<double> iLg_A;
    std::vector<double> duty;
    std::vector<double> vo_V; ///< unfolded terminal voltage
    std::vector<double> io_A; ///< unfolded terminal current
    std::vector<std::uint8_t> mode;
    std::vector<std::uint8_t> half;

    std::vector<PeriodRecord> periods; ///< empty when re-loaded from CSV

    std::size_t size() const { return t_s.size(); }
};

} // namespace scmi
