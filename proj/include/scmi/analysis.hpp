#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scmi/types.hpp"

// Post-processing of recorded waveforms: distortion, per-period aggregation,
// conduction-mode occupancy, loss breakdown and efficiency estimation.

namespace scmi {

struct LossBreakdown {
    double conduction_switches_W = 0.0;
    double conduction_diode_W = 0.0;
    double conduction_esr_W = 0.0;
    double switching_turnoff_W = 0.0;
    double switching_turnon_W = 0.0;

    double total_W() const {
        return conduction_switches_W + conduction_diode_W + conduction_esr_W +
               switching_turnoff_W + switching_turnon_W;
    }
};

/// Total harmonic distortion in percent, harmonics 2..40 relative to the
/// fundamental, computed from discrete Fourier coefficients of the window.
/// The window must span an integer number of fundamental cycles (within one
/// sample) at >= 200 samples per cycle, else WindowError.
double thd_percent(std::span<const double> samples, double dt_s, double fundamental_Hz);

/// Amplitude of the fundamental component over the same kind of window.
double fundamental_amplitude(std::span<const double> samples, double dt_s,
                             double fundamental_Hz);

/// Trapezoidal average of a per-sample signal over each switching period.
/// The selector maps a sample index to the signal value.
std::vector<std::pair<std::size_t, double>>
per_period_average(const WaveformRecord& rec, double ts_s,
                   const std::function<double(std::size_t)>& selector);

/// Fraction of switching periods containing Mode III, over periods starting at
/// or after t_from_s. Periods without any conduction count as discontinuous.
/// Uses the period log when present, otherwise the per-sample mode annotation.
double dcm_occupancy(const WaveformRecord& rec, double ts_s, double t_from_s = 0.0);

struct EfficiencyResult {
    double eta = 1.0;
    LossBreakdown losses;
    double p_in_W = 0.0;  ///< source power plus estimated switching loss
    double p_out_W = 0.0; ///< terminal output power
};

/// Efficiency over the steady-state portion (final two line cycles) of the
/// record. Conduction losses come from per-device mean-square currents,
/// switching losses from the per-period turn-off/turn-on snapshots.
/// Throws EnergyMismatch when the accounting misses by more than 1% of Pin.
EfficiencyResult efficiency(const WaveformRecord& rec, const CircuitParams& p,
                            const OperatingPoint& op);

struct AnalysisReport {
    double thd_pct = 0.0;
    double vo_rms_V = 0.0;
    double vo_peak_V = 0.0;    ///< amplitude of the fundamental (the sinusoid's peak)
    double vo_abs_max_V = 0.0; ///< largest instantaneous |vo| sample, ripple included
    double io_rms_A = 0.0;
    double d_peak_measured = 0.0;
    double dcm_occupancy = 0.0;
    double eta = 1.0;
    LossBreakdown losses;
    double p_in_W = 0.0;
    double p_out_W = 0.0;
    double vc1_sepic_avg_V = 0.0; ///< mean per-period vC1 average over Sepic halves
    double vc1_cuk_peak_V = 0.0;  ///< peak per-period vC1 average over Cuk halves
    std::optional<double> io_phase_deg; ///< fundamental io phase vs the grid EMF
};

/// Full report over the steady-state window (final two line cycles).
AnalysisReport analyze(const WaveformRecord& rec, const CircuitParams& p,
                       const OperatingPoint& op);

std::string to_key_values(const AnalysisReport& report);

/// Index range [first, last) of the final `cycles` line cycles of the record.
std::pair<std::size_t, std::size_t> steady_window(const WaveformRecord& rec, double fg_Hz,
                                                  int cycles = 2);

} // namespace scmi
