#pragma once

#include <string>
#include <string_view>

#include "scmi/control.hpp"
#include "scmi/switched_sim.hpp"
#include "scmi/types.hpp"

// Flat key-value scenario configuration: one `key = value` per line,
// `#` starts a comment. Unknown keys are rejected. Keys mirror the type
// field names (L1_H, Vo_rms_V, rL1_ohm, ...).

namespace scmi {

struct ScenarioConfig {
    CircuitParams params;
    OperatingPoint op;

    ControlMode control_mode = ControlMode::VoltageRegulation;
    double vorms_ref_V = 220.0;
    double iorms_ref_A = 1.136;
    double kp = 0.5;
    double ki_per_s = 60.0;
    double d_peak_max = 0.95;

    SimConfig sim;

    void validate() const;
};

ScenarioConfig parse_config_text(std::string_view text);
ScenarioConfig parse_config_file(const std::string& path);

/// Builds the closed-loop controller described by the config, including the
/// feedforward duty seed derived from the closed-form operating point.
ControllerHandle make_controller(const ScenarioConfig& cfg);

/// Reference remap used by parameter sweeps over the source current: keeps the
/// delivered power tracking Ipv for either load kind.
double sweep_current_reference(const ScenarioConfig& cfg, double ipv_A);

} // namespace scmi
