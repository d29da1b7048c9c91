#include "scmi/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scmi {

double PiState::step(double error, double dt_s) {
    if (!(out_lo < out_hi)) throw ConfigError("PI output limits must satisfy lo < hi");
    if (dt_s <= 0.0) throw ConfigError("PI update interval must be positive");
    const double pre = kp * error + ki * integral;
    const bool saturating = (pre > out_hi && error > 0.0) || (pre < out_lo && error < 0.0);
    if (!saturating) integral += error * dt_s;
    return std::clamp(kp * error + ki * integral, out_lo, out_hi);
}

double pi_step(PiState& pi, double error, double dt_s) {
    return pi.step(error, dt_s);
}

HalfCycle half_cycle_select(double t_s, double fg_Hz) {
    // sin(2*pi*fg*t) >= 0 selects the Sepic half; evaluated on the phase
    // fraction so the boundary instants resolve exactly.
    double frac = std::fmod(t_s * fg_Hz, 1.0);
    if (frac < 0.0) frac += 1.0;
    return frac <= 0.5 ? HalfCycle::Sepic : HalfCycle::Cuk;
}

double measure_rms(std::span<const double> samples, double dt_s, double fg_Hz) {
    if (samples.empty() || dt_s <= 0.0 || fg_Hz <= 0.0)
        throw WindowError("rms window must be non-empty with positive sample spacing");
    const double span = static_cast<double>(samples.size()) * dt_s;
    const double half_period = 0.5 / fg_Hz;
    const double k = span / half_period;
    if (std::abs(k - std::round(k)) * half_period > dt_s || std::round(k) < 1.0)
        throw WindowError("rms window must span an integer number of half line cycles");
    double sum2 = 0.0;
    for (double v : samples) sum2 += v * v;
    return std::sqrt(sum2 / static_cast<double>(samples.size()));
}

ControllerHandle::ControllerHandle(const Setup& setup) : su_(setup) {
    if (su_.fg_Hz <= 0.0 || su_.fs_Hz <= 0.0) throw ConfigError("controller frequencies must be positive");
    periods_per_half_ = static_cast<std::size_t>(std::llround(0.5 * su_.fs_Hz / su_.fg_Hz));
    if (periods_per_half_ < 1) periods_per_half_ = 1;
    // Measurements start once two full line cycles of history exist.
    first_update_period_ = 4 * periods_per_half_;
    d_peak_ = std::clamp(su_.d_peak_ff, su_.pi.out_lo, su_.pi.out_hi);
    su_.pi.integral = su_.pi.ki != 0.0 ? d_peak_ / su_.pi.ki : 0.0;
}

DutyController::Command ControllerHandle::period_begin(double t_start_s,
                                                       std::size_t period_index) {
    if (period_index >= first_update_period_ &&
        (period_index - first_update_period_) % periods_per_half_ == 0) {
        update_d_peak();
    }
    const double theta = 2.0 * std::numbers::pi_v<double> * su_.fg_Hz * t_start_s;
    Command cmd;
    cmd.half = half_cycle_select(t_start_s, su_.fg_Hz);
    cmd.duty = d_peak_ * std::abs(std::sin(theta));
    return cmd;
}

void ControllerHandle::period_end(double, double int_vo2, double int_io2) {
    vo2_int_.push_back(int_vo2);
    io2_int_.push_back(int_io2);
}

void ControllerHandle::update_d_peak() {
    const std::size_t window = 2 * periods_per_half_; // one full line cycle
    if (vo2_int_.size() < window) return;
    const double ts = 1.0 / su_.fs_Hz;
    double vo2 = 0.0, io2 = 0.0;
    for (std::size_t i = vo2_int_.size() - window; i < vo2_int_.size(); ++i) {
        vo2 += vo2_int_[i];
        io2 += io2_int_[i];
    }
    const double span = static_cast<double>(window) * ts;
    const double vrms = std::sqrt(vo2 / span);
    const double irms = std::sqrt(io2 / span);

    const double measured = su_.mode == ControlMode::VoltageRegulation ? vrms : irms;
    const double error = (su_.reference - measured) * su_.error_scale;
    const double target = su_.pi.step(error, 0.5 / su_.fg_Hz);
    const double limited =
        std::clamp(target, d_peak_ - su_.d_peak_slew, d_peak_ + su_.d_peak_slew);
    if (limited != target && su_.pi.ki != 0.0) {
        // Back-calculate the integral onto the issued command so the loop does
        // not wind up against the rate limiter.
        su_.pi.integral = (limited - su_.pi.kp * error) / su_.pi.ki;
    }
    d_peak_ = limited;
}

} // namespace scmi
