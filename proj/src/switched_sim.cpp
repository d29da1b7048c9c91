#include "scmi/switched_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace scmi {

namespace {

using Vec5 = std::array<double, 5>; // iL1, iL2, vC1, vC2, iLg

Vec5 to_vec(const ConverterState& s) {
    return {s.iL1_A, s.iL2_A, s.vC1_V, s.vC2_V, s.iLg_A};
}

void from_vec(const Vec5& v, ConverterState& s) {
    s.iL1_A = v[0];
    s.iL2_A = v[1];
    s.vC1_V = v[2];
    s.vC2_V = v[3];
    s.iLg_A = v[4];
}

/// Terminal flow at the output node for a given injected current i2.
/// The output capacitor ESR couples the node voltage to the net capacitor
/// current, so the resistive-load current is solved algebraically.
void load_flow(const CircuitParams& p, const LoadModel& load, double vC2, double iLg, double i2,
               double& i_load, double& v_out) {
    if (load.kind == LoadModel::Kind::Resistive) {
        i_load = (vC2 + p.rC2_ohm * i2) / (load.Ro_ohm + p.rC2_ohm);
    } else {
        i_load = iLg;
    }
    v_out = vC2 + p.rC2_ohm * (i2 - i_load);
}

DerivedSignals derived_impl(const CircuitParams& p, const Vec5& x, ModeId mode, HalfCycle half,
                            const LoadModel& load) {
    const double iL1 = x[0], iL2 = x[1];
    DerivedSignals d;
    if (half == HalfCycle::Sepic) {
        switch (mode) {
        case ModeId::ModeI:
            d.i_s1_A = iL1 + iL2;
            d.i_unf_return_A = iL2;
            d.i_c1_A = -iL2;
            d.i2_A = 0.0;
            break;
        case ModeId::ModeII:
            d.i_diode_A = iL1 + iL2;
            d.i_unf_series_A = d.i_diode_A;
            d.i_unf_return_A = iL2;
            d.i_c1_A = iL1;
            d.i2_A = d.i_diode_A;
            break;
        case ModeId::ModeIII:
            d.i_unf_return_A = iL2;
            d.i_c1_A = iL1;
            d.i2_A = 0.0;
            break;
        }
    } else {
        // Cuk half: the output inductor feeds the load in every mode.
        d.i2_A = iL2;
        switch (mode) {
        case ModeId::ModeI:
            d.i_s1_A = iL1 + iL2;
            d.i_unf_return_A = iL2;
            d.i_c1_A = -iL2;
            break;
        case ModeId::ModeII:
            d.i_diode_A = iL1 + iL2;
            d.i_unf_series_A = d.i_diode_A;
            d.i_unf_return_A = iL2;
            d.i_c1_A = iL1;
            break;
        case ModeId::ModeIII:
            d.i_unf_return_A = iL2;
            d.i_c1_A = iL1;
            break;
        }
    }
    load_flow(p, load, x[3], x[4], d.i2_A, d.i_load_A, d.v_out_V);
    return d;
}

Vec5 rhs(const CircuitParams& p, double vdc, const Vec5& x, ModeId mode, HalfCycle half,
         const LoadModel& load, double vg_rect) {
    const double iL1 = x[0], iL2 = x[1], vC1 = x[2];
    const double ron1 = p.sw.ron_s1_ohm;
    const double ronu = p.sw.ron_unfolder_ohm;
    const double vf = p.diode_vf_V;

    const DerivedSignals d = derived_impl(p, x, mode, half, load);

    Vec5 dx{};
    if (half == HalfCycle::Sepic) {
        switch (mode) {
        case ModeId::ModeI: {
            dx[0] = (vdc - p.rL1_ohm * iL1 - ron1 * (iL1 + iL2)) / p.L1_H;
            dx[1] = (vC1 - (p.rC1_ohm + p.rL2_ohm + ronu) * iL2 - ron1 * (iL1 + iL2)) / p.L2_H;
            dx[2] = -iL2 / p.C1_F;
            break;
        }
        case ModeId::ModeII: {
            const double iD = iL1 + iL2;
            const double vB = d.v_out_V + vf + ronu * iD;
            dx[0] = (vdc - (p.rL1_ohm + p.rC1_ohm) * iL1 - vC1 - vB) / p.L1_H;
            dx[1] = (-vB - (ronu + p.rL2_ohm) * iL2) / p.L2_H;
            dx[2] = iL1 / p.C1_F;
            break;
        }
        case ModeId::ModeIII: {
            // Circulating loop through source, L1, C1, L2 with iL2 = -iL1.
            const double rloop = p.rL1_ohm + p.rC1_ohm + p.rL2_ohm + ronu;
            dx[0] = (vdc - vC1 - rloop * iL1) / (p.L1_H + p.L2_H);
            dx[1] = -dx[0];
            dx[2] = iL1 / p.C1_F;
            break;
        }
        }
    } else {
        switch (mode) {
        case ModeId::ModeI: {
            dx[0] = (vdc - p.rL1_ohm * iL1 - ron1 * (iL1 + iL2)) / p.L1_H;
            dx[1] = (vC1 - d.v_out_V - (p.rC1_ohm + p.rL2_ohm + ronu) * iL2 -
                     ron1 * (iL1 + iL2)) /
                    p.L2_H;
            dx[2] = -iL2 / p.C1_F;
            break;
        }
        case ModeId::ModeII: {
            const double iD = iL1 + iL2;
            dx[0] = (vdc - (p.rL1_ohm + p.rC1_ohm) * iL1 - vC1 - vf - ronu * iD) / p.L1_H;
            dx[1] = (-d.v_out_V - vf - ronu * iD - (ronu + p.rL2_ohm) * iL2) / p.L2_H;
            dx[2] = iL1 / p.C1_F;
            break;
        }
        case ModeId::ModeIII: {
            const double rloop = p.rL1_ohm + p.rC1_ohm + p.rL2_ohm + ronu;
            dx[1] = (vC1 - d.v_out_V - vdc - rloop * iL2) / (p.L1_H + p.L2_H);
            dx[0] = -dx[1];
            dx[2] = iL1 / p.C1_F;
            break;
        }
        }
    }
    dx[3] = (d.i2_A - d.i_load_A) / p.C2_F;
    dx[4] = load.kind == LoadModel::Kind::GridSource ? (d.v_out_V - vg_rect) / load.Lg_H : 0.0;
    return dx;
}

struct StepCtx {
    const CircuitParams& p;
    double vdc;
    const LoadModel& load;
    ModeId mode;
    HalfCycle half;
    Integrator integrator;
};

double rect_emf(const LoadModel& load, double t) {
    return load.kind == LoadModel::Kind::GridSource ? load.rectified_emf(t) : 0.0;
}

Vec5 axpy(const Vec5& x, double a, const Vec5& d) {
    Vec5 r;
    for (int i = 0; i < 5; ++i) r[i] = x[i] + a * d[i];
    return r;
}

Vec5 integrate_step(const StepCtx& c, const Vec5& x, double t, double h) {
    if (c.integrator == Integrator::RK4) {
        const Vec5 k1 = rhs(c.p, c.vdc, x, c.mode, c.half, c.load, rect_emf(c.load, t));
        const double vg_mid = rect_emf(c.load, t + 0.5 * h);
        const Vec5 k2 = rhs(c.p, c.vdc, axpy(x, 0.5 * h, k1), c.mode, c.half, c.load, vg_mid);
        const Vec5 k3 = rhs(c.p, c.vdc, axpy(x, 0.5 * h, k2), c.mode, c.half, c.load, vg_mid);
        const Vec5 k4 =
            rhs(c.p, c.vdc, axpy(x, h, k3), c.mode, c.half, c.load, rect_emf(c.load, t + h));
        Vec5 r;
        for (int i = 0; i < 5; ++i)
            r[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        return r;
    }
    // Trapezoidal (explicit predictor-corrector form).
    const Vec5 k1 = rhs(c.p, c.vdc, x, c.mode, c.half, c.load, rect_emf(c.load, t));
    const Vec5 xp = axpy(x, h, k1);
    const Vec5 k2 = rhs(c.p, c.vdc, xp, c.mode, c.half, c.load, rect_emf(c.load, t + h));
    Vec5 r;
    for (int i = 0; i < 5; ++i) r[i] = x[i] + 0.5 * h * (k1[i] + k2[i]);
    return r;
}

/// Reverse voltage across the freewheeling diode in Mode III; positive values
/// above the forward drop mean the idealized flat interval is optimistic.
double diode_forward_voltage_mode3(const CircuitParams& p, double vdc, const Vec5& x,
                                   HalfCycle half, const LoadModel& load, double vg_rect) {
    const Vec5 dx = rhs(p, vdc, x, ModeId::ModeIII, half, load, vg_rect);
    const DerivedSignals d = derived_impl(p, x, ModeId::ModeIII, half, load);
    const double iL2 = x[1];
    if (half == HalfCycle::Sepic) {
        const double v_l2node = -p.sw.ron_unfolder_ohm * iL2;
        const double vB = v_l2node - p.rL2_ohm * iL2 - p.L2_H * dx[1];
        return vB - d.v_out_V; // cathode tied to the output node through S3
    }
    const double v_l2node = d.v_out_V - p.sw.ron_unfolder_ohm * iL2;
    const double vB = v_l2node - p.rL2_ohm * iL2 - p.L2_H * dx[1];
    return vB; // cathode tied to the source return through S5
}

} // namespace

void SimConfig::validate(double ts_s) const {
    if (t_end_s <= 0.0) throw ConfigError("simulation duration must be positive");
    if (event_tol_A <= 0.0) throw ConfigError("event tolerance must be positive");
    if (record_decimation < 1) throw ConfigError("record decimation must be >= 1");
    const double dt = dt_max_s > 0.0 ? dt_max_s : ts_s / 200.0;
    if (dt > ts_s / 100.0 + 1e-18)
        throw ConfigError("integration step must be at most Ts/100");
}

StateDeriv mode_dynamics(const CircuitParams& p, double vdc_V, const ConverterState& state,
                         GateInput gates, const LoadModel& load, double vg_rect_V) {
    if (gates.s1 != (state.mode == ModeId::ModeI)) {
        throw InconsistentMode(gates.s1 ? "switch commanded on outside Mode I"
                                        : "switch commanded off while in Mode I");
    }
    const Vec5 dx = rhs(p, vdc_V, to_vec(state), state.mode, gates.half, load, vg_rect_V);
    return {dx[0], dx[1], dx[2], dx[3], dx[4]};
}

DerivedSignals derived_signals(const CircuitParams& p, const ConverterState& state,
                               const LoadModel& load) {
    return derived_impl(p, to_vec(state), state.mode, state.half, load);
}

double s1_blocking_voltage(const CircuitParams& p, const ConverterState& state,
                           const LoadModel& load) {
    const DerivedSignals d = derived_impl(p, to_vec(state), state.mode, state.half, load);
    const double iD = std::max(0.0, state.iL1_A + state.iL2_A);
    if (state.half == HalfCycle::Sepic) {
        const double vB = d.v_out_V + p.diode_vf_V + p.sw.ron_unfolder_ohm * iD;
        return state.vC1_V + p.rC1_ohm * state.iL1_A + vB;
    }
    const double vB = p.diode_vf_V + p.sw.ron_unfolder_ohm * iD;
    return state.vC1_V + p.rC1_ohm * state.iL1_A + vB;
}

std::optional<ModeTransition> detect_mode_transition(const CircuitParams& p, double vdc_V,
                                                     const ConverterState& before, double h_s,
                                                     GateInput gates, const LoadModel& load,
                                                     double vg_rect_V, double event_tol_A,
                                                     Integrator integrator) {
    if (before.mode != ModeId::ModeII) return std::nullopt;

    // Frozen EMF over the step: h is a fraction of a switching period, so the
    // line-frequency variation within it is negligible.
    LoadModel frozen = load;
    if (frozen.kind == LoadModel::Kind::GridSource) {
        frozen.fg_Hz = 0.0;
        frozen.phase_rad = std::numbers::pi_v<double> / 2.0;
        frozen.Vo_rms_V = vg_rect_V / std::sqrt(2.0);
    }
    StepCtx ctx{p, vdc_V, frozen, ModeId::ModeII, gates.half, integrator};

    const Vec5 x0 = to_vec(before);
    const double id0 = x0[0] + x0[1];
    auto make_result = [&](double frac, const Vec5& xe) {
        ConverterState s = before;
        from_vec(xe, s);
        // Distribute the residual diode current symmetrically onto the
        // circulating-loop constraint iL1 = -iL2.
        const double j = 0.5 * (s.iL1_A - s.iL2_A);
        s.iL1_A = j;
        s.iL2_A = j == 0.0 ? 0.0 : -j;
        s.mode = ModeId::ModeIII;
        return ModeTransition{frac, ModeId::ModeIII, s};
    };

    if (id0 <= event_tol_A) return make_result(0.0, x0);

    const Vec5 x1 = integrate_step(ctx, x0, 0.0, h_s);
    if (x1[0] + x1[1] > 0.0) return std::nullopt;

    double lo = 0.0, hi = h_s;
    Vec5 xe = x1;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec5 xm = integrate_step(ctx, x0, 0.0, mid);
        const double idm = xm[0] + xm[1];
        if (std::abs(idm) <= event_tol_A) return make_result(mid / h_s, xm);
        if (idm > 0.0)
            lo = mid;
        else
            hi = mid;
        xe = xm;
    }
    return make_result(hi / h_s, xe);
}

Unfolded unfold(double vC2_V, double i_out_A, HalfCycle half) {
    return half == HalfCycle::Sepic ? Unfolded{vC2_V, i_out_A} : Unfolded{-vC2_V, -i_out_A};
}

double RunDiagnostics::energy_residual_frac() const {
    if (e_in_J <= 0.0) return 0.0;
    const double losses = e_loss_esr_J + e_loss_diode_J + e_loss_switch_J;
    const double resid = e_in_J - e_out_J - losses - (e_stored_end_J - e_stored_start_J);
    return std::abs(resid) / e_in_J;
}

namespace {

struct EnergyAccum {
    double e_in = 0, e_out = 0, e_esr = 0, e_diode = 0, e_switch = 0;
    double vo2 = 0, io2 = 0; // per-period integrals, reset by caller
};

struct Powers {
    double in, out, esr, diode, sw, vo2, io2;
};

Powers instant_powers(const CircuitParams& p, double vdc, const Vec5& x, ModeId mode,
                      HalfCycle half, const LoadModel& load) {
    const DerivedSignals d = derived_impl(p, x, mode, half, load);
    const double ic2 = d.i2_A - d.i_load_A;
    Powers w;
    w.in = vdc * x[0];
    w.out = d.v_out_V * d.i_load_A;
    w.esr = p.rL1_ohm * x[0] * x[0] + p.rL2_ohm * x[1] * x[1] + p.rC1_ohm * d.i_c1_A * d.i_c1_A +
            p.rC2_ohm * ic2 * ic2;
    w.diode = p.diode_vf_V * d.i_diode_A;
    w.sw = p.sw.ron_s1_ohm * d.i_s1_A * d.i_s1_A +
           p.sw.ron_unfolder_ohm *
               (d.i_unf_series_A * d.i_unf_series_A + d.i_unf_return_A * d.i_unf_return_A);
    w.vo2 = d.v_out_V * d.v_out_V;
    w.io2 = d.i_load_A * d.i_load_A;
    return w;
}

double stored_energy(const CircuitParams& p, const LoadModel& load, const Vec5& x) {
    double e = 0.5 * (p.L1_H * x[0] * x[0] + p.L2_H * x[1] * x[1] + p.C1_F * x[2] * x[2] +
                      p.C2_F * x[3] * x[3]);
    if (load.kind == LoadModel::Kind::GridSource) e += 0.5 * load.Lg_H * x[4] * x[4];
    return e;
}

class Engine {
public:
    Engine(const CircuitParams& p, const OperatingPoint& op, DutyController& ctl,
           const SimConfig& cfg)
        : p_(p), op_(op), ctl_(ctl), cfg_(cfg), load_(op.load) {
        p_.validate();
        op_.validate();
        const double ts = op_.Ts_s();
        cfg_.validate(ts);
        ts_ = ts;
        const double dt_req = cfg_.dt_max_s > 0.0 ? cfg_.dt_max_s : ts / 200.0;
        spp_ = static_cast<std::size_t>(std::llround(ts / dt_req));
        if (spp_ < 100) spp_ = 100;
        dt_ = ts / static_cast<double>(spp_);
        stride_ = cfg_.record_decimation;
        if (spp_ % stride_ != 0)
            throw ConfigError("record decimation must divide the steps per switching period (" +
                              std::to_string(spp_) + ")");
        n_periods_ = static_cast<std::size_t>(std::llround(cfg_.t_end_s / ts));
        if (n_periods_ < 1) n_periods_ = 1;
    }

    SimResult run() {
        SimResult out;
        WaveformRecord& rec = out.record;
        rec.dt_s = dt_ * static_cast<double>(stride_);
        const std::size_t n_samples = n_periods_ * (spp_ / stride_);
        for (auto* v : {&rec.t_s, &rec.iL1_A, &rec.iL2_A, &rec.vC1_V, &rec.vC2_V, &rec.iLg_A,
                        &rec.duty, &rec.vo_V, &rec.io_A})
            v->reserve(n_samples);
        rec.mode.reserve(n_samples);
        rec.half.reserve(n_samples);
        rec.periods.reserve(n_periods_);

        x_ = to_vec(cfg_.initial_state);
        mode_ = cfg_.initial_state.mode;
        half_ = cfg_.initial_state.half;
        for (int i = 0; i < 5; ++i) {
            out.diag.state_min[i] = x_[i];
            out.diag.state_max[i] = x_[i];
        }
        out.diag.e_stored_start_J = stored_energy(p_, load_, x_);

        for (std::size_t k = 0; k < n_periods_; ++k) {
            run_period(k, rec, out.diag);
        }

        out.diag.total_periods = n_periods_;
        out.diag.e_in_J = acc_.e_in;
        out.diag.e_out_J = acc_.e_out;
        out.diag.e_loss_esr_J = acc_.e_esr;
        out.diag.e_loss_diode_J = acc_.e_diode;
        out.diag.e_loss_switch_J = acc_.e_switch;
        out.diag.e_stored_end_J = stored_energy(p_, load_, x_);
        return out;
    }

private:
    void run_period(std::size_t k, WaveformRecord& rec, RunDiagnostics& diag) {
        const double t0 = static_cast<double>(k) * ts_;
        DutyController::Command cmd = ctl_.period_begin(t0, k);
        double duty = std::clamp(cmd.duty, 0.0, 0.999);

        PeriodRecord pr;
        pr.t_start_s = t0;
        pr.half = cmd.half;

        if (cmd.half != half_) {
            // Unfolder swap: the rectified-frame output quantities flip sign so
            // the physical terminal waveforms stay continuous. The switch is
            // held off for this one period.
            x_[3] = -x_[3];
            x_[4] = -x_[4];
            half_ = cmd.half;
            duty = 0.0;
            pr.blanked = true;
        }
        pr.duty = duty;

        const double iD0 = x_[0] + x_[1];
        if (duty > 0.0) {
            if (mode_ == ModeId::ModeII && iD0 > cfg_.event_tol_A) {
                pr.ccm = true;
                pr.turnon_i_A = iD0;
                ConverterState snap;
                from_vec(x_, snap);
                snap.mode = ModeId::ModeII;
                snap.half = half_;
                pr.turnon_v_V = s1_blocking_voltage(p_, snap, load_);
                diag.ccm_periods++;
            }
            mode_ = ModeId::ModeI;
        } else {
            enter_off_mode(iD0);
        }

        acc_.vo2 = 0.0;
        acc_.io2 = 0.0;
        mode3_accum_ = 0.0;
        const double e_in0 = acc_.e_in;
        const double e_out0 = acc_.e_out;

        // Position of the switch turn-off inside the period, on the step grid.
        const double j_off_real = duty * static_cast<double>(spp_);
        const auto j_off = static_cast<std::size_t>(j_off_real);
        const double frac = j_off_real - static_cast<double>(j_off);

        for (std::size_t j = 0; j < spp_; ++j) {
            const double t_node = t0 + static_cast<double>(j) * dt_;
            if (j % stride_ == 0) record_sample(rec, t_node, duty, diag);

            if (duty > 0.0 && j == j_off && frac > 1e-12) {
                advance(t_node, frac * dt_, diag);
                turn_off(pr);
                advance(t_node + frac * dt_, (1.0 - frac) * dt_, diag);
            } else {
                if (duty > 0.0 && j == j_off && frac <= 1e-12 && mode_ == ModeId::ModeI)
                    turn_off(pr);
                advance(t_node, dt_, diag);
            }
        }
        // Turn-off exactly at the period end (duty saturated to the grid).
        if (duty > 0.0 && j_off >= spp_ && mode_ == ModeId::ModeI) turn_off(pr);

        pr.had_mode3 = mode3_accum_ > 0.0;
        pr.mode3_frac = mode3_accum_ / ts_;
        pr.e_in_J = acc_.e_in - e_in0;
        pr.e_out_J = acc_.e_out - e_out0;
        if (!pr.had_mode3) diag.mode3_missing++;
        rec.periods.push_back(pr);

        ctl_.period_end(t0 + ts_, acc_.vo2, acc_.io2);
    }

    void enter_off_mode(double iD) {
        if (iD > cfg_.event_tol_A) {
            mode_ = ModeId::ModeII;
        } else {
            const double j = 0.5 * (x_[0] - x_[1]);
            x_[0] = j;
            x_[1] = j == 0.0 ? 0.0 : -j;
            mode_ = ModeId::ModeIII;
        }
    }

    void turn_off(PeriodRecord& pr) {
        pr.turnoff_i_A = std::max(0.0, x_[0] + x_[1]);
        enter_off_mode(x_[0] + x_[1]);
        ConverterState snap;
        from_vec(x_, snap);
        snap.mode = mode_;
        snap.half = half_;
        pr.turnoff_v_V = s1_blocking_voltage(p_, snap, load_);
    }

    void advance(double t, double h, RunDiagnostics& diag) {
        if (h <= 0.0) return;
        StepCtx ctx{p_, op_.Vdc_V, load_, mode_, half_, cfg_.integrator};
        const Powers w0 = instant_powers(p_, op_.Vdc_V, x_, mode_, half_, load_);
        Vec5 x1 = integrate_step(ctx, x_, t, h);

        if (mode_ == ModeId::ModeII && x1[0] + x1[1] <= 0.0) {
            ConverterState before;
            from_vec(x_, before);
            before.mode = ModeId::ModeII;
            before.half = half_;
            const auto ev =
                detect_mode_transition(p_, op_.Vdc_V, before, h, GateInput{false, half_}, load_,
                                       rect_emf(load_, t), cfg_.event_tol_A, cfg_.integrator);
            if (ev) {
                const double h1 = ev->fraction * h;
                const Powers we = instant_powers(p_, op_.Vdc_V, to_vec(ev->state_at_event),
                                                 ModeId::ModeII, half_, load_);
                accumulate(w0, we, h1);
                x_ = to_vec(ev->state_at_event);
                mode_ = ModeId::ModeIII;
                track_extremes(diag);
                advance(t + h1, h - h1, diag);
                return;
            }
        }

        const Powers w1 = instant_powers(p_, op_.Vdc_V, x1, mode_, half_, load_);
        accumulate(w0, w1, h);
        x_ = x1;
        if (mode_ == ModeId::ModeIII) mode3_accum_ += h;
        track_extremes(diag);
        for (double v : x_)
            if (!(std::abs(v) <= 1e6))
                throw NumericalDivergence("state magnitude exceeded 1e6 at t=" +
                                          std::to_string(t + h));
    }

    void accumulate(const Powers& a, const Powers& b, double h) {
        acc_.e_in += 0.5 * h * (a.in + b.in);
        acc_.e_out += 0.5 * h * (a.out + b.out);
        acc_.e_esr += 0.5 * h * (a.esr + b.esr);
        acc_.e_diode += 0.5 * h * (a.diode + b.diode);
        acc_.e_switch += 0.5 * h * (a.sw + b.sw);
        acc_.vo2 += 0.5 * h * (a.vo2 + b.vo2);
        acc_.io2 += 0.5 * h * (a.io2 + b.io2);
    }

    void track_extremes(RunDiagnostics& diag) {
        for (int i = 0; i < 5; ++i) {
            diag.state_min[i] = std::min(diag.state_min[i], x_[i]);
            diag.state_max[i] = std::max(diag.state_max[i], x_[i]);
        }
    }

    void record_sample(WaveformRecord& rec, double t, double duty, RunDiagnostics& diag) {
        const DerivedSignals d = derived_impl(p_, x_, mode_, half_, load_);
        const Unfolded u = unfold(d.v_out_V, d.i_load_A, half_);
        rec.t_s.push_back(t);
        rec.iL1_A.push_back(x_[0]);
        rec.iL2_A.push_back(x_[1]);
        rec.vC1_V.push_back(x_[2]);
        rec.vC2_V.push_back(x_[3]);
        rec.iLg_A.push_back(x_[4]);
        rec.duty.push_back(duty);
        rec.vo_V.push_back(u.vo_V);
        rec.io_A.push_back(u.io_A);
        rec.mode.push_back(static_cast<std::uint8_t>(mode_));
        rec.half.push_back(static_cast<std::uint8_t>(half_));
        if (mode_ == ModeId::ModeIII) {
            const double vd =
                diode_forward_voltage_mode3(p_, op_.Vdc_V, x_, half_, load_, rect_emf(load_, t));
            if (vd > p_.diode_vf_V) diag.diode_bias_warnings++;
        }
    }

    CircuitParams p_;
    OperatingPoint op_;
    DutyController& ctl_;
    SimConfig cfg_;
    LoadModel load_;

    double ts_ = 0, dt_ = 0;
    std::size_t spp_ = 0, stride_ = 1, n_periods_ = 0;

    Vec5 x_{};
    ModeId mode_ = ModeId::ModeIII;
    HalfCycle half_ = HalfCycle::Sepic;
    EnergyAccum acc_;
    double mode3_accum_ = 0.0;
};

} // namespace

SimResult run_simulation(const CircuitParams& p, const OperatingPoint& op,
                         DutyController& controller, const SimConfig& cfg) {
    Engine engine(p, op, controller, cfg);
    return engine.run();
}

void write_waveform_csv(const WaveformRecord& rec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << "t,iL1,iL2,vC1,vC2,vo,io,idc,duty,mode,half\n";
    char buf[360];
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const char* half = rec.half[i] == static_cast<std::uint8_t>(HalfCycle::Sepic) ? "sepic"
                                                                                      : "cuk";
        std::snprintf(buf, sizeof(buf),
                      "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%u,%s\n", rec.t_s[i],
                      rec.iL1_A[i], rec.iL2_A[i], rec.vC1_V[i], rec.vC2_V[i], rec.vo_V[i],
                      rec.io_A[i], rec.iL1_A[i], rec.duty[i], static_cast<unsigned>(rec.mode[i]),
                      half);
        os << buf;
    }
}

WaveformRecord read_waveform_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    WaveformRecord rec;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty waveform file '" + path + "'");
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string field;
        std::array<double, 9> num{};
        for (double& v : num) {
            if (!std::getline(ls, field, ',')) throw ConfigError("short row in '" + path + "'");
            v = std::stod(field);
        }
        if (!std::getline(ls, field, ',')) throw ConfigError("short row in '" + path + "'");
        const int mode = std::stoi(field);
        if (!std::getline(ls, field, ',')) throw ConfigError("short row in '" + path + "'");
        rec.t_s.push_back(num[0]);
        rec.iL1_A.push_back(num[1]);
        rec.iL2_A.push_back(num[2]);
        rec.vC1_V.push_back(num[3]);
        rec.vC2_V.push_back(num[4]);
        rec.vo_V.push_back(num[5]);
        rec.io_A.push_back(num[6]);
        rec.duty.push_back(num[8]);
        rec.mode.push_back(static_cast<std::uint8_t>(mode));
        rec.half.push_back(
            static_cast<std::uint8_t>(field == "cuk" ? HalfCycle::Cuk : HalfCycle::Sepic));
        rec.iLg_A.push_back(0.0);
    }
    if (rec.size() >= 2) rec.dt_s = rec.t_s[1] - rec.t_s[0];
    return rec;
}

} // namespace scmi
