#include "scmi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace scmi {

namespace {

struct Phasor {
    double re, im;
};

/// Goertzel evaluation of the DFT bin `bin` over N samples.
Phasor goertzel(std::span<const double> x, std::size_t bin) {
    const double n = static_cast<double>(x.size());
    const double w = 2.0 * std::numbers::pi_v<double> * static_cast<double>(bin) / n;
    const double cw = std::cos(w);
    const double sw = std::sin(w);
    const double coeff = 2.0 * cw;
    double s1 = 0.0, s2 = 0.0;
    for (double v : x) {
        const double s0 = v + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    return {s1 - s2 * cw, s2 * sw};
}

double amplitude(const Phasor& ph, std::size_t n) {
    return 2.0 * std::hypot(ph.re, ph.im) / static_cast<double>(n);
}

} // namespace

double thd_percent(std::span<const double> samples, double dt_s, double fundamental_Hz) {
    if (samples.empty() || dt_s <= 0.0 || fundamental_Hz <= 0.0)
        throw WindowError("distortion window must be non-empty with positive sample spacing");
    const std::size_t n = samples.size();
    const double span = static_cast<double>(n) * dt_s;
    const double cycles = span * fundamental_Hz;
    const double k = std::round(cycles);
    if (k < 1.0 || std::abs(cycles - k) / fundamental_Hz > dt_s)
        throw WindowError("distortion window must span an integer number of fundamental cycles");
    if (static_cast<double>(n) / k < 200.0)
        throw WindowError("distortion window needs at least 200 samples per cycle");

    const auto kbin = static_cast<std::size_t>(k);
    const double a1 = amplitude(goertzel(samples, kbin), n);
    if (a1 <= 0.0) return 0.0;
    double sum2 = 0.0;
    for (std::size_t h = 2; h <= 40; ++h) {
        const std::size_t bin = h * kbin;
        if (bin * 2 >= n) break;
        const double ah = amplitude(goertzel(samples, bin), n);
        sum2 += ah * ah;
    }
    return 100.0 * std::sqrt(sum2) / a1;
}

double fundamental_amplitude(std::span<const double> samples, double dt_s,
                             double fundamental_Hz) {
    if (samples.empty() || dt_s <= 0.0 || fundamental_Hz <= 0.0)
        throw WindowError("window must be non-empty with positive sample spacing");
    const std::size_t n = samples.size();
    const double cycles = static_cast<double>(n) * dt_s * fundamental_Hz;
    const double k = std::round(cycles);
    if (k < 1.0 || std::abs(cycles - k) / fundamental_Hz > dt_s)
        throw WindowError("window must span an integer number of fundamental cycles");
    return amplitude(goertzel(samples, static_cast<std::size_t>(k)), n);
}

std::vector<std::pair<std::size_t, double>>
per_period_average(const WaveformRecord& rec, double ts_s,
                   const std::function<double(std::size_t)>& selector) {
    std::vector<std::pair<std::size_t, double>> out;
    if (rec.size() < 2 || rec.dt_s <= 0.0) return out;
    const auto m = static_cast<std::size_t>(std::llround(ts_s / rec.dt_s));
    if (m < 1) return out;
    const std::size_t n_periods = rec.size() / m;
    out.reserve(n_periods);
    for (std::size_t k = 0; k < n_periods; ++k) {
        const std::size_t a = k * m;
        double acc = 0.0;
        if (a + m < rec.size()) {
            // closing sample available: trapezoidal average
            acc = 0.5 * (selector(a) + selector(a + m));
            for (std::size_t i = a + 1; i < a + m; ++i) acc += selector(i);
            acc /= static_cast<double>(m);
        } else {
            for (std::size_t i = a; i < a + m && i < rec.size(); ++i) acc += selector(i);
            acc /= static_cast<double>(std::min(rec.size(), a + m) - a);
        }
        out.emplace_back(k, acc);
    }
    return out;
}

double dcm_occupancy(const WaveformRecord& rec, double ts_s, double t_from_s) {
    if (!rec.periods.empty()) {
        std::size_t total = 0, with3 = 0;
        for (const auto& pr : rec.periods) {
            if (pr.t_start_s + 0.5 * ts_s < t_from_s) continue;
            ++total;
            if (pr.had_mode3) ++with3;
        }
        return total == 0 ? 1.0 : static_cast<double>(with3) / static_cast<double>(total);
    }
    if (rec.size() == 0 || rec.dt_s <= 0.0) return 1.0;
    const auto m = static_cast<std::size_t>(std::llround(ts_s / rec.dt_s));
    if (m < 1) return 1.0;
    const double t0 = rec.t_s.front();
    std::size_t total = 0, with3 = 0;
    for (std::size_t a = 0; a + m <= rec.size(); a += m) {
        if (t0 + static_cast<double>(a) * rec.dt_s + 0.5 * ts_s < t_from_s) continue;
        ++total;
        for (std::size_t i = a; i < a + m; ++i) {
            if (rec.mode[i] == static_cast<std::uint8_t>(ModeId::ModeIII)) {
                ++with3;
                break;
            }
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(with3) / static_cast<double>(total);
}

std::pair<std::size_t, std::size_t> steady_window(const WaveformRecord& rec, double fg_Hz,
                                                  int cycles) {
    if (rec.dt_s <= 0.0 || fg_Hz <= 0.0 || rec.size() == 0)
        throw WindowError("record is empty or has no sample spacing");
    const auto n_win =
        static_cast<std::size_t>(std::llround(static_cast<double>(cycles) / (fg_Hz * rec.dt_s)));
    if (n_win == 0 || n_win > rec.size())
        throw WindowError("record shorter than the requested steady-state window");
    return {rec.size() - n_win, rec.size()};
}

namespace {

struct DeviceMeanSquares {
    double iL1 = 0, iL2 = 0, ic1 = 0, ic2 = 0, is1 = 0, i_diode_ms = 0, i_diode_mean = 0,
           i_unf_series = 0, i_unf_return = 0;
};

DeviceMeanSquares device_mean_squares(const WaveformRecord& rec, std::size_t a, std::size_t b) {
    DeviceMeanSquares ms;
    const double n = static_cast<double>(b - a);
    for (std::size_t i = a; i < b; ++i) {
        const double il1 = rec.iL1_A[i], il2 = rec.iL2_A[i];
        const bool sepic = rec.half[i] == static_cast<std::uint8_t>(HalfCycle::Sepic);
        const auto mode = static_cast<ModeId>(rec.mode[i]);
        const double i_load = std::abs(rec.io_A[i]);
        const double i2 = sepic ? (mode == ModeId::ModeII ? il1 + il2 : 0.0) : il2;
        const double id = mode == ModeId::ModeII ? il1 + il2 : 0.0;
        const double is1 = mode == ModeId::ModeI ? il1 + il2 : 0.0;
        const double ic1 = mode == ModeId::ModeI ? -il2 : il1;
        const double ic2 = i2 - i_load;
        ms.iL1 += il1 * il1;
        ms.iL2 += il2 * il2;
        ms.ic1 += ic1 * ic1;
        ms.ic2 += ic2 * ic2;
        ms.is1 += is1 * is1;
        ms.i_diode_ms += id * id;
        ms.i_diode_mean += id;
        ms.i_unf_series += id * id;
        ms.i_unf_return += il2 * il2;
    }
    ms.iL1 /= n;
    ms.iL2 /= n;
    ms.ic1 /= n;
    ms.ic2 /= n;
    ms.is1 /= n;
    ms.i_diode_ms /= n;
    ms.i_diode_mean /= n;
    ms.i_unf_series /= n;
    ms.i_unf_return /= n;
    return ms;
}

double stored_energy_sample(const WaveformRecord& rec, const CircuitParams& p,
                            const OperatingPoint& op, std::size_t i) {
    double e = 0.5 * (p.L1_H * rec.iL1_A[i] * rec.iL1_A[i] + p.L2_H * rec.iL2_A[i] * rec.iL2_A[i] +
                      p.C1_F * rec.vC1_V[i] * rec.vC1_V[i] + p.C2_F * rec.vC2_V[i] * rec.vC2_V[i]);
    if (op.load.kind == LoadModel::Kind::GridSource && i < rec.iLg_A.size())
        e += 0.5 * op.load.Lg_H * rec.iLg_A[i] * rec.iLg_A[i];
    return e;
}

} // namespace

EfficiencyResult efficiency(const WaveformRecord& rec, const CircuitParams& p,
                            const OperatingPoint& op) {
    const auto [a, b] = steady_window(rec, op.fg_Hz, 2);
    const double n = static_cast<double>(b - a);
    const double span = n * rec.dt_s;
    const double t_window = rec.t_s[a];

    // Terminal powers: the per-period energy integrals carry the full
    // integration resolution; sampled means are the CSV fallback.
    double p_in_raw = 0.0, p_out = 0.0;
    if (!rec.periods.empty()) {
        double e_in = 0.0, e_out = 0.0, t_span = 0.0;
        const double ts = op.Ts_s();
        for (const auto& pr : rec.periods) {
            if (pr.t_start_s < t_window - 0.25 * rec.dt_s) continue;
            e_in += pr.e_in_J;
            e_out += pr.e_out_J;
            t_span += ts;
        }
        if (t_span <= 0.0) throw WindowError("no switching periods inside the steady window");
        p_in_raw = e_in / t_span;
        p_out = e_out / t_span;
    } else {
        for (std::size_t i = a; i < b; ++i) {
            p_in_raw += op.Vdc_V * rec.iL1_A[i];
            p_out += rec.vo_V[i] * rec.io_A[i];
        }
        p_in_raw /= n;
        p_out /= n;
    }

    const DeviceMeanSquares ms = device_mean_squares(rec, a, b);
    EfficiencyResult res;
    res.losses.conduction_esr_W =
        p.rL1_ohm * ms.iL1 + p.rL2_ohm * ms.iL2 + p.rC1_ohm * ms.ic1 + p.rC2_ohm * ms.ic2;
    res.losses.conduction_diode_W = p.diode_vf_V * ms.i_diode_mean;
    res.losses.conduction_switches_W =
        p.sw.ron_s1_ohm * ms.is1 +
        p.sw.ron_unfolder_ohm * (ms.i_unf_series + ms.i_unf_return);

    // Switching energies from the per-period snapshots.
    double e_off = 0.0, e_on = 0.0;
    if (!rec.periods.empty()) {
        for (const auto& pr : rec.periods) {
            if (pr.t_start_s < t_window - 0.25 * rec.dt_s) continue;
            if (pr.duty > 0.0)
                e_off += 0.5 * pr.turnoff_v_V * pr.turnoff_i_A * p.sw.t_fall_s;
            if (pr.ccm) e_on += 0.5 * pr.turnon_v_V * pr.turnon_i_A * p.sw.t_fall_s;
        }
    } else {
        // CSV-reloaded records lack the period log; approximate the turn-off
        // point from the last Mode I sample of each period.
        const double ts = op.Ts_s();
        const auto m = static_cast<std::size_t>(std::llround(ts / rec.dt_s));
        for (std::size_t pa = a; pa + m <= b; pa += m) {
            double v = 0.0, i_off = 0.0;
            for (std::size_t i = pa; i < pa + m; ++i) {
                if (rec.mode[i] == static_cast<std::uint8_t>(ModeId::ModeI)) {
                    const bool sepic = rec.half[i] == static_cast<std::uint8_t>(HalfCycle::Sepic);
                    i_off = rec.iL1_A[i] + rec.iL2_A[i];
                    v = rec.vC1_V[i] + (sepic ? std::abs(rec.vo_V[i]) : 0.0) + p.diode_vf_V;
                }
            }
            e_off += 0.5 * v * std::max(0.0, i_off) * p.sw.t_fall_s;
        }
    }
    res.losses.switching_turnoff_W = e_off / span;
    res.losses.switching_turnon_W = e_on / span;

    // Stored-energy drift across the window; removes the bias a not fully
    // periodic window would otherwise put on the efficiency figure.
    const double de = (stored_energy_sample(rec, p, op, b - 1) -
                       stored_energy_sample(rec, p, op, a)) /
                      span;

    const double p_sw = res.losses.switching_turnoff_W + res.losses.switching_turnon_W;
    res.p_in_W = p_in_raw - de + p_sw;
    res.p_out_W = p_out;
    res.eta = res.p_in_W > 0.0 ? p_out / res.p_in_W : 1.0;

    if (p_in_raw > 1e-9) {
        const double conduction = res.losses.conduction_esr_W + res.losses.conduction_diode_W +
                                  res.losses.conduction_switches_W;
        const double resid = p_in_raw - p_out - conduction - de;
        if (std::abs(resid) > 0.01 * p_in_raw) {
            std::ostringstream os;
            os << "loss accounting misses by " << 100.0 * std::abs(resid) / p_in_raw
               << "% of input power";
            throw EnergyMismatch(os.str());
        }
    }
    return res;
}

AnalysisReport analyze(const WaveformRecord& rec, const CircuitParams& p,
                       const OperatingPoint& op) {
    AnalysisReport rep;
    const auto [a, b] = steady_window(rec, op.fg_Hz, 2);
    const double n = static_cast<double>(b - a);

    double vo2 = 0.0, io2 = 0.0;
    for (std::size_t i = a; i < b; ++i) {
        vo2 += rec.vo_V[i] * rec.vo_V[i];
        io2 += rec.io_A[i] * rec.io_A[i];
        rep.vo_abs_max_V = std::max(rep.vo_abs_max_V, std::abs(rec.vo_V[i]));
        rep.d_peak_measured = std::max(rep.d_peak_measured, rec.duty[i]);
    }
    rep.vo_rms_V = std::sqrt(vo2 / n);
    rep.io_rms_A = std::sqrt(io2 / n);

    const auto vo_window = std::span<const double>(rec.vo_V).subspan(a, b - a);
    rep.thd_pct = thd_percent(vo_window, rec.dt_s, op.fg_Hz);
    rep.vo_peak_V = fundamental_amplitude(vo_window, rec.dt_s, op.fg_Hz);
    rep.dcm_occupancy = scmi::dcm_occupancy(rec, op.Ts_s(), rec.t_s[a]);

    const auto eff = efficiency(rec, p, op);
    rep.eta = eff.eta;
    rep.losses = eff.losses;
    rep.p_in_W = eff.p_in_W;
    rep.p_out_W = eff.p_out_W;

    // Per-period vC1 averages split by half cycle.
    const auto m = static_cast<std::size_t>(std::llround(op.Ts_s() / rec.dt_s));
    if (m >= 1) {
        double sepic_sum = 0.0;
        std::size_t sepic_n = 0;
        for (std::size_t pa = a; pa + m <= b; pa += m) {
            double acc = 0.0;
            for (std::size_t i = pa; i < pa + m; ++i) acc += rec.vC1_V[i];
            acc /= static_cast<double>(m);
            if (rec.half[pa] == static_cast<std::uint8_t>(HalfCycle::Sepic)) {
                sepic_sum += acc;
                ++sepic_n;
            } else {
                rep.vc1_cuk_peak_V = std::max(rep.vc1_cuk_peak_V, acc);
            }
        }
        if (sepic_n > 0) rep.vc1_sepic_avg_V = sepic_sum / static_cast<double>(sepic_n);
    }

    if (op.load.kind == LoadModel::Kind::GridSource && op.load.fg_Hz > 0.0) {
        // Fundamental phase of io relative to the grid EMF.
        double c = 0.0, s = 0.0;
        for (std::size_t i = a; i < b; ++i) {
            const double theta = 2.0 * std::numbers::pi_v<double> * op.load.fg_Hz * rec.t_s[i] +
                                 op.load.phase_rad;
            c += rec.io_A[i] * std::cos(theta);
            s += rec.io_A[i] * std::sin(theta);
        }
        rep.io_phase_deg = std::atan2(c, s) * 180.0 / std::numbers::pi_v<double>;
    }
    return rep;
}

std::string to_key_values(const AnalysisReport& r) {
    std::ostringstream os;
    char buf[96];
    auto kv = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.10g\n", key, v);
        os << buf;
    };
    kv("thd_pct", r.thd_pct);
    kv("vo_rms", r.vo_rms_V);
    kv("vo_peak", r.vo_peak_V);
    kv("vo_abs_max", r.vo_abs_max_V);
    kv("io_rms", r.io_rms_A);
    kv("d_peak_measured", r.d_peak_measured);
    kv("dcm_occupancy", r.dcm_occupancy);
    kv("eta", r.eta);
    kv("p_in_W", r.p_in_W);
    kv("p_out_W", r.p_out_W);
    kv("loss_conduction_switches_W", r.losses.conduction_switches_W);
    kv("loss_conduction_diode_W", r.losses.conduction_diode_W);
    kv("loss_conduction_esr_W", r.losses.conduction_esr_W);
    kv("loss_switching_turnoff_W", r.losses.switching_turnoff_W);
    kv("loss_switching_turnon_W", r.losses.switching_turnon_W);
    kv("loss_total_W", r.losses.total_W());
    kv("vc1_sepic_avg_V", r.vc1_sepic_avg_V);
    kv("vc1_cuk_peak_V", r.vc1_cuk_peak_V);
    if (r.io_phase_deg) kv("io_phase_deg", *r.io_phase_deg);
    return os.str();
}

} // namespace scmi
