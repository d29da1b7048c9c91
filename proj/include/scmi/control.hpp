#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scmi/switched_sim.hpp"
#include "scmi/types.hpp"

namespace scmi {

/// PI regulator state with output clamping and conditional anti-windup:
/// the integral stops accumulating while the output is saturated in the
/// direction the error keeps pushing.
struct PiState {
    double kp = 0.5;
    double ki = 60.0; // 1/s
    double integral = 0.0;
    double out_lo = 0.0;
    double out_hi = 0.95;

    double step(double error, double dt_s);
};

double pi_step(PiState& pi, double error, double dt_s);

/// Sepic while the reference sine is non-negative, Cuk otherwise.
HalfCycle half_cycle_select(double t_s, double fg_Hz);

/// Discrete rms over a window spanning an integer number of half line cycles.
/// Throws WindowError when the span is off by more than one sample.
double measure_rms(std::span<const double> samples, double dt_s, double fg_Hz);

enum class ControlMode : std::uint8_t {
    CurrentReference,  ///< track an output-current rms reference
    VoltageRegulation, ///< hold the terminal rms voltage (resistive load runs)
};

/// Closed-loop duty controller: an rms-error PI produces the peak duty ratio,
/// which modulates a rectified sine locked to the ideal phase reference
/// theta = 2*pi*fg*t. The rms is measured over a sliding full line cycle and
/// the PI updates once per half cycle, starting after two full cycles.
class ControllerHandle final : public DutyController {
public:
    struct Setup {
        ControlMode mode = ControlMode::VoltageRegulation;
        double reference = 220.0; ///< V rms or A rms depending on mode
        PiState pi{};
        double fg_Hz = 50.0;
        double fs_Hz = 100e3;
        /// Converts a voltage error to the current-loop unit the PI gains are
        /// tuned for; 1/Ro for voltage regulation on a resistive load.
        double error_scale = 1.0;
        /// Initial peak duty (feedforward); seeds the PI integral.
        double d_peak_ff = 0.0;
        /// Largest allowed change of the peak duty per update. Keeps one
        /// update from jumping across the conduction-mode knee where the
        /// plant gain rises steeply.
        double d_peak_slew = 0.02;
    };

    explicit ControllerHandle(const Setup& setup);

    Command period_begin(double t_start_s, std::size_t period_index) override;
    void period_end(double t_end_s, double int_vo2, double int_io2) override;

    double d_peak() const { return d_peak_; }

private:
    void update_d_peak();

    Setup su_;
    double d_peak_ = 0.0;
    HalfCycle prev_half_ = HalfCycle::Sepic;
    std::size_t periods_per_half_;
    std::size_t first_update_period_;
    std::vector<double> vo2_int_; // per-period integral of vo^2
    std::vector<double> io2_int_;
};

} // namespace scmi
