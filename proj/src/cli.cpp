#include "scmi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "scmi/analysis.hpp"
#include "scmi/averaged_model.hpp"
#include "scmi/config.hpp"
#include "scmi/control.hpp"
#include "scmi/design.hpp"
#include "scmi/switched_sim.hpp"

namespace scmi {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << text;
}

std::string sanitize_csv(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

int cmd_design(const std::string& config_path, const std::string& out_path,
               const std::string& kv_path) {
    const ScenarioConfig cfg = parse_config_file(config_path);
    const DesignReport rep = verify_design(cfg.params, cfg.op);
    const std::string text = to_text(rep);
    std::cout << text;
    if (!out_path.empty()) write_text_file(out_path, text);
    if (!kv_path.empty()) write_text_file(kv_path, to_key_values(rep));
    return rep.all_pass() ? kExitOk : kExitDomain;
}

int cmd_steady(const std::string& config_path, int angles, const std::string& out_path) {
    const ScenarioConfig cfg = parse_config_file(config_path);
    std::ostringstream os;
    os << "omega_t_rad,half,D,D0,dIL1_A,dIL2_A,IL1v_A,IL1p_A,IL2v_A,IL2p_A,Idc_avg_A,I2_avg_A,"
          "VC1_avg_V,status\n";
    char buf[480];
    for (int i = 0; i < angles; ++i) {
        const double wt = 2.0 * std::numbers::pi_v<double> * static_cast<double>(i) /
                          static_cast<double>(angles - 1);
        SteadyStateSolution sol;
        std::string status = "ok";
        try {
            sol = steady_state_at_angle(cfg.params, cfg.op, wt);
        } catch (const CcmViolation&) {
            // Flag the row and report the boundary solution with D0 clamped to 0.
            status = "ccm";
            const double ts = cfg.op.Ts_s();
            sol.D = duty_law(cfg.op.Ipv_A, cfg.params, ts, cfg.op.Vdc_V, wt);
            sol.D0 = 0.0;
            const RippleCurrents r = ripple_currents(cfg.params, ts, cfg.op.Vdc_V, sol.D);
            sol.dIL1_A = r.dIL1_A;
            sol.dIL2_A = r.dIL2_A;
            sol.IL1v_A = valley_current(cfg.params, ts, cfg.op.Vdc_V, sol.D, 0.0);
            sol.IL1p_A = sol.IL1v_A + sol.dIL1_A;
            sol.IL2v_A = -sol.IL1v_A;
            sol.IL2p_A = sol.IL2v_A + sol.dIL2_A;
            sol.Idc_avg_A = avg_dc_current(cfg.params, ts, cfg.op.Vdc_V, sol.D);
            sol.I2_avg_A = avg_output_current(cfg.params, ts, cfg.op.Vdc_V, sol.D, 0.0,
                                              HalfCycle::Sepic);
            const double vo = cfg.op.Vom_V() * std::abs(std::sin(wt));
            sol.VC1_avg_V = cfg.op.Vdc_V + (std::sin(wt) < 0.0 ? vo : 0.0);
        }
        const char* half = std::sin(wt) >= 0.0 ? "sepic" : "cuk";
        std::snprintf(buf, sizeof(buf),
                      "%.10g,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                      "%s\n",
                      wt, half, sol.D, sol.D0, sol.dIL1_A, sol.dIL2_A, sol.IL1v_A, sol.IL1p_A,
                      sol.IL2v_A, sol.IL2p_A, sol.Idc_avg_A, sol.I2_avg_A, sol.VC1_avg_V,
                      status.c_str());
        os << buf;
    }
    if (out_path.empty())
        std::cout << os.str();
    else
        write_text_file(out_path, os.str());
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, double t_end_override,
                 const std::string& out_path, const std::string& report_path) {
    ScenarioConfig cfg = parse_config_file(config_path);
    if (t_end_override > 0.0) cfg.sim.t_end_s = t_end_override;
    cfg.sim.validate(cfg.op.Ts_s());

    ControllerHandle controller = make_controller(cfg);
    const SimResult res = run_simulation(cfg.params, cfg.op, controller, cfg.sim);
    if (!out_path.empty()) write_waveform_csv(res.record, out_path);

    const AnalysisReport rep = analyze(res.record, cfg.params, cfg.op);
    std::ostringstream os;
    os << to_key_values(rep);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "ccm_periods = %zu\n", res.diag.ccm_periods);
    os << buf;
    std::snprintf(buf, sizeof(buf), "total_periods = %zu\n", res.diag.total_periods);
    os << buf;
    std::snprintf(buf, sizeof(buf), "energy_residual_pct = %.6g\n",
                  100.0 * res.diag.energy_residual_frac());
    os << buf;
    std::cout << os.str();
    if (!report_path.empty()) write_text_file(report_path, os.str());
    return kExitOk;
}

struct SweepRow {
    double value = 0.0;
    std::string status = "ok";
    AnalysisReport rep;
};

SweepRow sweep_one(ScenarioConfig cfg, const std::string& param, double value) {
    SweepRow row;
    row.value = value;
    try {
        if (param == "Ipv") {
            cfg.op.Ipv_A = value;
            cfg.control_mode = ControlMode::CurrentReference;
            cfg.iorms_ref_A = sweep_current_reference(cfg, value);
        } else if (param == "Ro") {
            if (cfg.op.load.kind != LoadModel::Kind::Resistive)
                throw ConfigError("Ro sweep requires a resistive load");
            cfg.op.load.Ro_ohm = value;
        } else if (param == "L1") {
            cfg.params.L1_H = value;
        } else if (param == "L2") {
            cfg.params.L2_H = value;
        } else if (param == "fs") {
            cfg.op.fs_Hz = value;
        } else if (param == "Vdc") {
            cfg.op.Vdc_V = value;
        }
        cfg.validate();
        ControllerHandle controller = make_controller(cfg);
        const SimResult res = run_simulation(cfg.params, cfg.op, controller, cfg.sim);
        row.rep = analyze(res.record, cfg.params, cfg.op);
    } catch (const Error& e) {
        row.status = sanitize_csv(e.what());
    }
    return row;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::string& range,
              int steps, const std::string& out_path) {
    static const std::vector<std::string> whitelist = {"Ipv", "Ro", "L1", "L2", "fs", "Vdc"};
    if (std::find(whitelist.begin(), whitelist.end(), param) == whitelist.end())
        throw CLI::ValidationError("--param", "must be one of Ipv, Ro, L1, L2, fs, Vdc");

    const auto colon = range.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= range.size())
        throw CLI::ValidationError("--range", "expected lo:hi");
    double lo = 0.0, hi = 0.0;
    try {
        lo = std::stod(range.substr(0, colon));
        hi = std::stod(range.substr(colon + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError("--range", "expected numeric lo:hi");
    }

    const ScenarioConfig base = parse_config_file(config_path);

    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double value =
            steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
        jobs.push_back(std::async(std::launch::async, sweep_one, base, param, value));
    }

    std::ostringstream os;
    os << "index,param,value,status,p_out_W,eta,thd_pct,vo_rms_V,io_rms_A,d_peak,dcm_occupancy,"
          "loss_total_W\n";
    char buf[360];
    for (int i = 0; i < steps; ++i) {
        const SweepRow row = jobs[static_cast<std::size_t>(i)].get();
        if (row.status == "ok") {
            std::snprintf(buf, sizeof(buf),
                          "%d,%s,%.10g,ok,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", i,
                          param.c_str(), row.value, row.rep.p_out_W, row.rep.eta, row.rep.thd_pct,
                          row.rep.vo_rms_V, row.rep.io_rms_A, row.rep.d_peak_measured,
                          row.rep.dcm_occupancy, row.rep.losses.total_W());
        } else {
            std::snprintf(buf, sizeof(buf), "%d,%s,%.10g,%s,,,,,,,,\n", i, param.c_str(),
                          row.value, row.status.c_str());
        }
        os << buf;
    }
    if (out_path.empty())
        std::cout << os.str();
    else
        write_text_file(out_path, os.str());
    return kExitOk;
}

int cmd_analyze(const std::string& config_path, const std::string& wave_path,
                const std::string& report_path) {
    const ScenarioConfig cfg = parse_config_file(config_path);
    const WaveformRecord rec = read_waveform_csv(wave_path);
    if (rec.size() < 2) throw ConfigError("waveform file has too few samples");
    const AnalysisReport rep = analyze(rec, cfg.params, cfg.op);
    const std::string text = to_key_values(rep);
    std::cout << text;
    if (!report_path.empty()) write_text_file(report_path, text);
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"SEPIC-Cuk single-switch micro-inverter simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, kv_path, report_path, wave_path, param, range;
    int angles = 181;
    int steps = 0;
    double t_end = 0.0;

    auto* design = app.add_subcommand("design", "verify component sizing against a scenario");
    design->add_option("--config", config_path, "scenario config file")->required();
    design->add_option("--out", out_path, "write the text report here");
    design->add_option("--kv", kv_path, "write the key-value report here");

    auto* steady = app.add_subcommand("steady", "closed-form steady-state sweep over line angles");
    steady->add_option("--config", config_path)->required();
    steady->add_option("--angles", angles, "number of line angles (>= 3)")
        ->check(CLI::Range(3, 1000000));
    steady->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "run the switched time-domain simulation");
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--t-end", t_end, "simulation duration in seconds")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out", out_path, "waveform CSV path");
    simulate->add_option("--report", report_path, "key-value analysis report path");

    auto* sweep = app.add_subcommand("sweep", "repeat simulations across one parameter");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--param", param, "one of Ipv, Ro, L1, L2, fs, Vdc")->required();
    sweep->add_option("--range", range, "lo:hi inclusive")->required();
    sweep->add_option("--steps", steps, "number of runs")->required()->check(CLI::Range(1, 10000));
    sweep->add_option("--out", out_path, "summary CSV path (default stdout)");

    auto* analyze_cmd = app.add_subcommand("analyze", "post-process a recorded waveform CSV");
    analyze_cmd->add_option("--config", config_path)->required();
    analyze_cmd->add_option("--waveform", wave_path, "waveform CSV produced by simulate")
        ->required();
    analyze_cmd->add_option("--report", report_path, "key-value report path");

    try {
        app.parse(argc, argv);
        if (design->parsed()) return cmd_design(config_path, out_path, kv_path);
        if (steady->parsed()) return cmd_steady(config_path, angles, out_path);
        if (simulate->parsed()) return cmd_simulate(config_path, t_end, out_path, report_path);
        if (sweep->parsed()) return cmd_sweep(config_path, param, range, steps, out_path);
        if (analyze_cmd->parsed()) return cmd_analyze(config_path, wave_path, report_path);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    } catch (const NumericalDivergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

} // namespace scmi
