#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include "scmi/types.hpp"

// Event-driven time-domain simulation of the switched circuit. Each
// (half-cycle, mode) pair is a linear circuit; the integrator steps inside
// fixed switching-period segments and locates the diode cutoff by bisection.

namespace scmi {

enum class Integrator : std::uint8_t { RK4, Trapezoidal };

struct SimConfig {
    double dt_max_s = 0.0;    ///< 0 selects the default Ts/200
    double event_tol_A = 1e-3;
    double t_end_s = 0.1;     ///< rounded to a whole number of switching periods
    std::size_t record_decimation = 4; ///< record every Nth integration node
    Integrator integrator = Integrator::RK4;
    ConverterState initial_state{};

    void validate(double ts_s) const;
};

/// Gate command for one instant: state of the high-frequency switch plus the
/// unfolder selection.
struct GateInput {
    bool s1 = false;
    HalfCycle half = HalfCycle::Sepic;
};

struct StateDeriv {
    double diL1 = 0.0;
    double diL2 = 0.0;
    double dvC1 = 0.0;
    double dvC2 = 0.0;
    double diLg = 0.0;
};

/// Signals derived from one state snapshot (device currents, terminal flow).
struct DerivedSignals {
    double i2_A = 0.0;     ///< current injected toward the output node
    double i_load_A = 0.0; ///< current drawn by the load network (rectified)
    double v_out_V = 0.0;  ///< rectified terminal voltage at the output node
    double i_diode_A = 0.0;
    double i_s1_A = 0.0;
    double i_c1_A = 0.0;
    double i_unf_series_A = 0.0; ///< unfolder device in the diode path (S3/S5)
    double i_unf_return_A = 0.0; ///< unfolder device in the L2 path (S2/S4)
};

/// Right-hand side of the piecewise-linear state equations for the topology
/// selected by (state.mode, gates.half). vg_rect_V is the rectified grid EMF
/// (0 for a resistive load). Throws InconsistentMode if gates.s1 is true while
/// state.mode is not Mode I.
StateDeriv mode_dynamics(const CircuitParams& p, double vdc_V, const ConverterState& state,
                         GateInput gates, const LoadModel& load, double vg_rect_V);

DerivedSignals derived_signals(const CircuitParams& p, const ConverterState& state,
                               const LoadModel& load);

/// Blocking voltage across the high-frequency switch while it is off.
double s1_blocking_voltage(const CircuitParams& p, const ConverterState& state,
                           const LoadModel& load);

struct ModeTransition {
    double fraction;   ///< position of the event within the step, in [0, 1]
    ModeId new_mode;
    ConverterState state_at_event;
};

/// Checks one integration step of size h_s from `before` (which must be in
/// Mode II) for the diode current reaching zero. Returns the bisection-refined
/// crossing, or nullopt if the diode keeps conducting. Switch-edge events come
/// from the gate schedule, not from this detector.
std::optional<ModeTransition> detect_mode_transition(const CircuitParams& p, double vdc_V,
                                                     const ConverterState& before, double h_s,
                                                     GateInput gates, const LoadModel& load,
                                                     double vg_rect_V, double event_tol_A,
                                                     Integrator integrator);

/// Controller seen by the simulation loop: latches one duty command per
/// switching period and selects the unfolder half.
class DutyController {
public:
    virtual ~DutyController() = default;

    struct Command {
        double duty = 0.0;
        HalfCycle half = HalfCycle::Sepic;
    };

    virtual Command period_begin(double t_start_s, std::size_t period_index) = 0;

    /// Integrals of vo^2 and io^2 over the period just completed.
    virtual void period_end(double /*t_end_s*/, double /*int_vo2*/, double /*int_io2*/) {}
};

/// Constant duty and fixed half selection; used by open-loop studies and tests.
class FixedDutyController final : public DutyController {
public:
    FixedDutyController(double duty, HalfCycle half = HalfCycle::Sepic)
        : duty_(duty), half_(half) {}

    Command period_begin(double, std::size_t) override { return {duty_, half_}; }

private:
    double duty_;
    HalfCycle half_;
};

struct RunDiagnostics {
    std::size_t total_periods = 0;
    std::size_t ccm_periods = 0;        ///< diode still conducting at S1 turn-on
    std::size_t mode3_missing = 0;      ///< periods that never reached Mode III
    std::size_t diode_bias_warnings = 0;///< Mode III samples with forward-biased diode

    std::array<double, 5> state_min{};
    std::array<double, 5> state_max{};

    double e_in_J = 0.0;
    double e_out_J = 0.0;
    double e_loss_esr_J = 0.0;
    double e_loss_diode_J = 0.0;
    double e_loss_switch_J = 0.0;
    double e_stored_start_J = 0.0;
    double e_stored_end_J = 0.0;

    /// |Ein - Eout - Elosses - dEstored| / Ein, 0 when no energy was drawn.
    double energy_residual_frac() const;
};

struct SimResult {
    WaveformRecord record;
    RunDiagnostics diag;
};

/// Runs the switched simulation from t = 0 over cfg.t_end_s. Deterministic:
/// identical inputs produce bit-identical records. Throws NumericalDivergence
/// if any state magnitude exceeds 1e6 and ConfigError on invalid setup.
SimResult run_simulation(const CircuitParams& p, const OperatingPoint& op,
                         DutyController& controller, const SimConfig& cfg);

struct Unfolded {
    double vo_V;
    double io_A;
};

/// Maps the rectified internal quantities to the bipolar terminal waveforms.
Unfolded unfold(double vC2_V, double i_out_A, HalfCycle half);

/// Waveform CSV: header t,iL1,iL2,vC1,vC2,vo,io,idc,duty,mode,half with
/// >= 9 significant digits per value.
void write_waveform_csv(const WaveformRecord& rec, const std::string& path);
WaveformRecord read_waveform_csv(const std::string& path);

} // namespace scmi
