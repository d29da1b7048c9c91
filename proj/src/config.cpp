#include "scmi/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "scmi/averaged_model.hpp"

namespace scmi {

namespace {

std::string trim(std::string_view sv) {
    const auto a = sv.find_first_not_of(" \t\r");
    const auto b = sv.find_last_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    return std::string(sv.substr(a, b - a + 1));
}

double to_number(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + value + "'");
    }
}

} // namespace

void ScenarioConfig::validate() const {
    params.validate();
    op.validate();
    if (kp < 0.0 || ki_per_s < 0.0) throw ConfigError("PI gains must be non-negative");
    if (d_peak_max <= 0.0 || d_peak_max >= 1.0)
        throw ConfigError("d_peak_max must lie in (0, 1)");
    if (vorms_ref_V <= 0.0 || iorms_ref_A <= 0.0)
        throw ConfigError("controller references must be positive");
    sim.validate(op.Ts_s());
}

ScenarioConfig parse_config_text(std::string_view text) {
    ScenarioConfig cfg;
    cfg.op.load = LoadModel::resistive(194.0);

    std::map<std::string, std::string> kv;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "'");
    }

    std::string load_kind = "resistive";
    std::string control = "voltage";
    std::string integrator = "rk4";
    double lg = 1e-3;
    double grid_phase = 0.0;
    double grid_fg = -1.0; // default: follow op.fg_Hz
    double ro = 194.0;

    for (const auto& [key, value] : kv) {
        if (key == "Vdc_V") cfg.op.Vdc_V = to_number(key, value);
        else if (key == "Vo_rms_V") cfg.op.Vo_rms_V = to_number(key, value);
        else if (key == "fg_Hz") cfg.op.fg_Hz = to_number(key, value);
        else if (key == "fs_Hz") cfg.op.fs_Hz = to_number(key, value);
        else if (key == "Ipv_A") cfg.op.Ipv_A = to_number(key, value);
        else if (key == "load") load_kind = value;
        else if (key == "Ro_ohm") ro = to_number(key, value);
        else if (key == "Lg_H") lg = to_number(key, value);
        else if (key == "grid_phase_rad") grid_phase = to_number(key, value);
        else if (key == "grid_fg_Hz") grid_fg = to_number(key, value);
        else if (key == "L1_H") cfg.params.L1_H = to_number(key, value);
        else if (key == "L2_H") cfg.params.L2_H = to_number(key, value);
        else if (key == "C1_F") cfg.params.C1_F = to_number(key, value);
        else if (key == "C2_F") cfg.params.C2_F = to_number(key, value);
        else if (key == "rL1_ohm") cfg.params.rL1_ohm = to_number(key, value);
        else if (key == "rL2_ohm") cfg.params.rL2_ohm = to_number(key, value);
        else if (key == "rC1_ohm") cfg.params.rC1_ohm = to_number(key, value);
        else if (key == "rC2_ohm") cfg.params.rC2_ohm = to_number(key, value);
        else if (key == "diode_vf_V") cfg.params.diode_vf_V = to_number(key, value);
        else if (key == "ron_s1_ohm") cfg.params.sw.ron_s1_ohm = to_number(key, value);
        else if (key == "ron_unfolder_ohm") cfg.params.sw.ron_unfolder_ohm = to_number(key, value);
        else if (key == "t_fall_s") cfg.params.sw.t_fall_s = to_number(key, value);
        else if (key == "control") control = value;
        else if (key == "Vorms_ref_V") cfg.vorms_ref_V = to_number(key, value);
        else if (key == "Iorms_ref_A") cfg.iorms_ref_A = to_number(key, value);
        else if (key == "kp") cfg.kp = to_number(key, value);
        else if (key == "ki_per_s") cfg.ki_per_s = to_number(key, value);
        else if (key == "d_peak_max") cfg.d_peak_max = to_number(key, value);
        else if (key == "dt_max_s") cfg.sim.dt_max_s = to_number(key, value);
        else if (key == "event_tol_A") cfg.sim.event_tol_A = to_number(key, value);
        else if (key == "t_end_s") cfg.sim.t_end_s = to_number(key, value);
        else if (key == "record_decimation")
            cfg.sim.record_decimation = static_cast<std::size_t>(to_number(key, value));
        else if (key == "integrator") integrator = value;
        else throw ConfigError("unknown key '" + key + "'");
    }

    if (load_kind == "resistive") {
        cfg.op.load = LoadModel::resistive(ro);
    } else if (load_kind == "grid") {
        cfg.op.load = LoadModel::grid(cfg.op.Vo_rms_V, grid_phase, lg,
                                      grid_fg >= 0.0 ? grid_fg : cfg.op.fg_Hz);
    } else {
        throw ConfigError("load must be 'resistive' or 'grid'");
    }
    cfg.params.Lg_H = lg;

    if (control == "voltage") cfg.control_mode = ControlMode::VoltageRegulation;
    else if (control == "current") cfg.control_mode = ControlMode::CurrentReference;
    else throw ConfigError("control must be 'voltage' or 'current'");

    if (integrator == "rk4") cfg.sim.integrator = Integrator::RK4;
    else if (integrator == "trapezoidal") cfg.sim.integrator = Integrator::Trapezoidal;
    else throw ConfigError("integrator must be 'rk4' or 'trapezoidal'");

    cfg.validate();
    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

ControllerHandle make_controller(const ScenarioConfig& cfg) {
    ControllerHandle::Setup su;
    su.mode = cfg.control_mode;
    su.fg_Hz = cfg.op.fg_Hz;
    su.fs_Hz = cfg.op.fs_Hz;
    su.pi.kp = cfg.kp;
    su.pi.ki = cfg.ki_per_s;
    su.pi.out_lo = 0.0;
    su.pi.out_hi = cfg.d_peak_max;

    double ipv_est = 0.0;
    if (cfg.control_mode == ControlMode::VoltageRegulation) {
        if (cfg.op.load.kind != LoadModel::Kind::Resistive)
            throw ConfigError("voltage regulation requires a resistive load");
        su.reference = cfg.vorms_ref_V;
        // The PI gains are tuned for a current-unit error; the load conductance
        // converts the voltage error accordingly.
        su.error_scale = 1.0 / cfg.op.load.Ro_ohm;
        ipv_est = cfg.vorms_ref_V * cfg.vorms_ref_V / (cfg.op.load.Ro_ohm * cfg.op.Vdc_V);
    } else {
        su.reference = cfg.iorms_ref_A;
        su.error_scale = 1.0;
        const double vorms = cfg.op.load.kind == LoadModel::Kind::GridSource
                                 ? cfg.op.load.Vo_rms_V
                                 : cfg.iorms_ref_A * cfg.op.load.Ro_ohm;
        ipv_est = cfg.iorms_ref_A * vorms / cfg.op.Vdc_V;
    }
    try {
        su.d_peak_ff = duty_peak(ipv_est, cfg.params, cfg.op.Ts_s(), cfg.op.Vdc_V);
    } catch (const DutyOverflow&) {
        su.d_peak_ff = cfg.d_peak_max;
    }
    su.d_peak_ff = std::min(su.d_peak_ff, cfg.d_peak_max);
    return ControllerHandle(su);
}

double sweep_current_reference(const ScenarioConfig& cfg, double ipv_A) {
    if (cfg.op.load.kind == LoadModel::Kind::GridSource)
        return ipv_A * cfg.op.Vdc_V / cfg.op.load.Vo_rms_V;
    return std::sqrt(std::max(0.0, ipv_A * cfg.op.Vdc_V / cfg.op.load.Ro_ohm));
}

} // namespace scmi
