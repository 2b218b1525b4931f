// gfsim: command-line front end for the grid-forming fleet simulator.
//
// Subcommands: run, cct, powerflow, validate, plot.
// Exit codes: 0 success, 1 runtime error, 2 configuration error,
// 3 validation failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "gfsim/config.hpp"
#include "gfsim/report.hpp"
#include "gfsim/stability.hpp"
#include "gfsim/svg.hpp"

namespace {

using namespace gfs;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

struct CliOptions {
    std::string config_file;
    std::string grid;
    std::string scenario;
    std::string strategy;
    double delay_ms = -1.0;
    double clear_ms = -1.0;
    double step_us = -1.0;
    double horizon_s = -1.0;
    std::string out_dir;
    int jobs = -1;
    std::vector<std::string> settings;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_file, "Run-configuration file");
    cmd->add_option("--grid", opt.grid, "Grid file path or bundled system name");
    cmd->add_option("--scenario", opt.scenario,
                    "Catalog fault (fault1..fault4) or a run-configuration file");
    cmd->add_option("--strategy", opt.strategy, "none, fvb-l or fvb-wacs");
    cmd->add_option("--delay-ms", opt.delay_ms, "Wide-area communication delay");
    cmd->add_option("--clear-ms", opt.clear_ms, "Fault clearing time");
    cmd->add_option("--step-us", opt.step_us, "Integration step in microseconds");
    cmd->add_option("--horizon-s", opt.horizon_s, "Post-clearing simulation window");
    cmd->add_option("--out", opt.out_dir, "Output directory (default: $GFSIM_OUT or ./out)");
    cmd->add_option("--jobs", opt.jobs, "Worker threads for batch runs");
    cmd->add_option("--set", opt.settings, "Extra key=value overrides")->take_all();
}

RunManifest resolve_manifest(const CliOptions& opt) {
    RunManifest manifest;
    if (!opt.config_file.empty()) {
        manifest = parse_run_config_file(opt.config_file);
    }
    if (!opt.scenario.empty()) {
        if (std::filesystem::exists(opt.scenario) &&
            !std::filesystem::is_directory(opt.scenario)) {
            manifest = parse_run_config_file(opt.scenario);
        } else {
            manifest.scenario = opt.scenario;
        }
    }
    if (!opt.grid.empty()) manifest.grid = opt.grid;
    if (!opt.strategy.empty()) manifest.strategy = strategy_from_name(opt.strategy);
    if (opt.delay_ms >= 0.0) manifest.delay_ms = opt.delay_ms;
    if (opt.clear_ms >= 0.0) manifest.clear_ms = opt.clear_ms;
    if (opt.step_us > 0.0) manifest.step_us = opt.step_us;
    if (opt.horizon_s >= 0.0) manifest.horizon_s = opt.horizon_s;
    if (opt.jobs >= 0) manifest.jobs = opt.jobs;
    if (!opt.out_dir.empty()) manifest.out_dir = opt.out_dir;
    for (const auto& setting : opt.settings) apply_setting(manifest, setting);

    if (manifest.out_dir.empty()) {
        const char* env = std::getenv("GFSIM_OUT");
        manifest.out_dir = (env != nullptr && *env != '\0') ? env : "out";
    }
    return manifest;
}

std::string ensure_out_dir(const RunManifest& manifest) {
    std::filesystem::create_directories(manifest.out_dir);
    return manifest.out_dir;
}

int effective_jobs(const RunManifest& manifest) {
    if (manifest.jobs > 0) return manifest.jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_run(const CliOptions& opt) {
    const RunManifest manifest = resolve_manifest(opt);
    SystemModel system = load_system(manifest.grid);
    apply_manifest(manifest, system);
    const SimConfig sim_config = make_sim_config(manifest);
    const FvbConfig fvb = make_fvb_config(manifest);
    const FaultScenario scenario = make_manifest_scenario(manifest, system);

    const InitialisedSystem init = initialise_system(system);
    const SimResult result = run_scenario(init, scenario, sim_config, fvb);
    const Verdict verdict = detect_loss_of_sync(result);

    const std::string dir = ensure_out_dir(manifest);
    write_timeseries_csv(result, dir + "/timeseries.csv");
    write_text_file(dir + "/summary.json",
                    run_summary_json(result, verdict, manifest_hash(manifest)).dump(2) + "\n");

    std::cout << "scenario " << scenario.name << " strategy " << strategy_name(fvb.strategy)
              << " clearing " << manifest.clear_ms << " ms: "
              << (verdict.stable ? "stable" : "loss of synchronism") ;
    if (verdict.los_time_s) std::cout << " at t=" << *verdict.los_time_s << " s";
    std::cout << "\nwrote " << dir << "/timeseries.csv and summary.json\n";
    return kExitOk;
}

int cmd_cct(const CliOptions& opt, bool full_table) {
    RunManifest manifest = resolve_manifest(opt);
    SystemModel system = load_system(manifest.grid);
    apply_manifest(manifest, system);
    const SimConfig sim_config = make_sim_config(manifest);

    std::vector<std::string> faults;
    std::vector<StrategyConfig> configs;
    if (full_table) {
        for (const auto& f : system.faults) faults.push_back(f.name);
        configs = standard_strategy_set();
        for (auto& c : configs) {
            // propagate manifest-level booster settings other than the ones
            // the columns themselves vary
            c.fvb.local.v_reset = manifest.fvb_l.v_reset;
            c.fvb.local.freq_threshold = manifest.fvb_l.freq_threshold;
            c.fvb.local.boost_pu = manifest.fvb_l.boost_pu;
            const double delay = c.fvb.wacs.delay_s;
            c.fvb.wacs = manifest.fvb_wacs;
            c.fvb.wacs.delay_s = delay;
        }
    } else {
        faults.push_back(manifest.scenario);
        StrategyConfig c;
        c.fvb = make_fvb_config(manifest);
        c.label = strategy_name(c.fvb.strategy);
        if (c.fvb.strategy == Strategy::FvbWacs) {
            c.label += "-d" + std::to_string(static_cast<int>(std::lround(manifest.delay_ms)));
        }
        configs.push_back(c);
    }

    const CctReport report =
        cct_matrix(system, faults, configs, sim_config, manifest.cct, effective_jobs(manifest));

    const std::string dir = ensure_out_dir(manifest);
    write_text_file(dir + "/cct.csv", cct_report_csv(report));
    write_text_file(dir + "/cct.json", cct_report_json(report).dump(2) + "\n");
    std::cout << cct_report_csv(report) << "wrote " << dir << "/cct.csv and cct.json\n";
    return kExitOk;
}

int cmd_powerflow(const CliOptions& opt) {
    const RunManifest manifest = resolve_manifest(opt);
    SystemModel system = load_system(manifest.grid);
    apply_manifest(manifest, system);
    const PowerFlowSolution solution = newton_power_flow(system.grid, bus_specs(system));

    const std::string dir = ensure_out_dir(manifest);
    write_text_file(dir + "/powerflow.json",
                    powerflow_report_json(system, solution).dump(2) + "\n");
    std::cout << powerflow_report_text(system, solution) << "wrote " << dir
              << "/powerflow.json\n";
    return kExitOk;
}

int cmd_plot(const CliOptions& opt, const std::string& csv_path,
             const std::string& channel_list) {
    const RunManifest manifest = resolve_manifest(opt);
    SimResult result;
    if (!csv_path.empty()) {
        result = read_timeseries_csv(csv_path);
    } else {
        SystemModel system = load_system(manifest.grid);
        apply_manifest(manifest, system);
        const InitialisedSystem init = initialise_system(system);
        result = run_scenario(init, make_manifest_scenario(manifest, system),
                              make_sim_config(manifest), make_fvb_config(manifest));
    }

    std::vector<std::string> groups;
    if (channel_list.empty() || channel_list == "all") {
        groups = plot_groups();
    } else {
        std::size_t start = 0;
        while (start <= channel_list.size()) {
            const auto comma = channel_list.find(',', start);
            const std::string item = channel_list.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!item.empty()) groups.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }

    const std::string dir = ensure_out_dir(manifest);
    const auto written = emit_plots(result, groups, dir);
    for (const auto& path : written) std::cout << "wrote " << path << '\n';
    return kExitOk;
}

// Built-in self checks: fast invariants over every module, reported one per
// line. Returns the number of failures.
int run_validation(const RunManifest& manifest) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        std::cout << (ok ? "ok   " : "FAIL ") << name;
        if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
        std::cout << '\n';
        if (!ok) ++failures;
    };

    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> amp(-5.0, 5.0);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Complex x(amp(rng), amp(rng));
            const double theta = amp(rng);
            worst = std::max(worst, std::abs(inverse_park(park(x, theta), theta) - x));
        }
        check("park roundtrip < 1e-12", worst < 1e-12, std::to_string(worst));
    }
    {
        std::mt19937_64 rng(2025);
        std::uniform_real_distribution<double> amp(-3.0, 3.0);
        bool ok = true;
        for (int k = 0; k < 1000; ++k) {
            const Dq x{amp(rng), amp(rng)};
            const Dq y = current_limiter(x, 1.25);
            ok = ok && y.norm() <= 1.25 * (1.0 + 1e-15);
            const Dq yy = current_limiter(y, 1.25);
            ok = ok && std::abs(yy.d - y.d) < 1e-15 && std::abs(yy.q - y.q) < 1e-15;
        }
        check("current limiter bound and idempotence", ok);
    }
    {
        std::mt19937_64 rng(2026);
        std::uniform_real_distribution<double> omega(0.9, 1.1);
        std::uniform_real_distribution<double> inertia(0.5, 10.0);
        bool ok = true;
        for (int k = 0; k < 10000; ++k) {
            std::vector<double> w(4), h(4);
            double lo = 2.0, hi = 0.0;
            for (int i = 0; i < 4; ++i) {
                w[i] = omega(rng);
                h[i] = inertia(rng);
                lo = std::min(lo, w[i]);
                hi = std::max(hi, w[i]);
            }
            const double coi = coi_frequency(w, h);
            ok = ok && coi >= lo - 1e-14 && coi <= hi + 1e-14;
        }
        check("coi convexity on 10^4 samples", ok);
    }
    {
        bool ok = true;
        DelayLine line(0.02, 1e-4, 0.0);
        for (int k = 0; k <= 1000; ++k) {
            const double t = k * 1e-4;
            const double out = line.push(t);
            const double expected = t < 0.02 ? 0.0 : t - 0.02;
            ok = ok && std::abs(out - expected) < 1e-12;
        }
        DelayLine ident(0.0, 1e-4, 0.0);
        for (int k = 0; k < 10; ++k) ok = ok && ident.push(0.5 + k) == 0.5 + k;
        check("delay line exactness and zero-delay identity", ok);
    }
    {
        bool ok = apply_deadband(5e-4, 1e-3) == 0.0 &&
                  apply_deadband(4e-3, 1e-3) == 3e-3 &&
                  apply_deadband(-4e-3, 1e-3) == -3e-3;
        check("deadband shape", ok);
    }
    {
        const RunManifest roundtrip = parse_run_config(emit_run_config(manifest));
        check("configuration round trip", roundtrip == manifest);
    }

    try {
        SystemModel system = load_system(manifest.grid);
        apply_manifest(manifest, system);
        const auto ybus = build_ybus(system.grid);
        check("admittance matrix symmetric",
              (ybus.y - ybus.y.transpose()).cwiseAbs().maxCoeff() < 1e-12);

        const auto solution = newton_power_flow(system.grid, bus_specs(system));
        check("power flow converged", true);
        check("complex power balance < 1e-6",
              std::abs(power_balance_residual(system.grid, solution)) < 1e-6);

        InitialisedSystem init = initialise_system(system);
        SimConfig cfg;
        cfg.decimation = 100;
        Simulator sim(init, cfg, {});
        const SimResult hold = sim.run({}, 1.0);
        double drift = 0.0;
        for (std::size_t i = 0; i < hold.unit_ids.size(); ++i) {
            for (std::size_t k = 0; k < hold.samples(); ++k) {
                drift = std::max(drift, std::abs(hold.v_g_pu[i][k] - hold.v_g_pu[i][0]));
                drift = std::max(drift, std::abs(hold.domega_pu[i][k]));
            }
        }
        check("equilibrium hold over 1 s < 1e-3", drift < 1e-3, std::to_string(drift));
        check("current reference bound in the hold run", hold.max_i_ref_ratio <= 1.0 + 1e-12);
    } catch (const std::exception& e) {
        check("system checks", false, e.what());
    }
    return failures;
}

int cmd_validate(const CliOptions& opt, bool show_defaults) {
    const RunManifest manifest = resolve_manifest(opt);
    if (show_defaults) {
        std::printf("%-28s %-22s %s\n", "key", "default", "source");
        for (const auto& entry : default_settings()) {
            std::printf("%-28s %-22s %s\n", entry.key.c_str(), entry.value.c_str(),
                        entry.source.c_str());
        }
        const VscParams params;
        std::printf("%-28s %-22g %s\n", "converter.inertia_s", params.inertia_s,
                    "benchmark converter dataset (per-unit overrides in the grid file)");
        std::printf("%-28s %-22g %s\n", "converter.damping_pu", params.damping_pu,
                    "benchmark converter dataset");
        std::printf("%-28s %-22g %s\n", "converter.i_max", params.i_max,
                    "benchmark converter dataset");
        std::printf("%-28s %-22g %s\n", "converter.m_max", params.m_max,
                    "consistent with sqrt(3/2)*Vdc/(2*Vac) for 640/300 kV");
        return kExitOk;
    }
    const int failures = run_validation(manifest);
    if (failures > 0) {
        std::cout << failures << " validation check(s) failed\n";
        return kExitValidation;
    }
    std::cout << "all validation checks passed\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient-stability simulator for grid-forming converter fleets"};
    app.require_subcommand(1);

    CliOptions opt;
    bool table = false;
    bool show_defaults = false;
    std::string csv_path;
    std::string channels;

    CLI::App* run = app.add_subcommand("run", "Simulate one fault scenario");
    add_common_flags(run, opt);

    CLI::App* cct = app.add_subcommand("cct", "Critical-clearing-time search");
    add_common_flags(cct, opt);
    cct->add_flag("--table", table, "Full fault x strategy matrix");

    CLI::App* pf = app.add_subcommand("powerflow", "Initial operating point");
    add_common_flags(pf, opt);

    CLI::App* validate = app.add_subcommand("validate", "Run the built-in invariant checks");
    add_common_flags(validate, opt);
    validate->add_flag("--show-defaults", show_defaults,
                       "List every default value and its source");

    CLI::App* plot = app.add_subcommand("plot", "Render channel groups as SVG");
    add_common_flags(plot, opt);
    plot->add_option("--csv", csv_path, "Plot a previously written time series");
    plot->add_option("--channels", channels,
                     "Comma-separated groups (angle-diff, freq-coi, boost, power, voltage)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opt);
        if (cct->parsed()) return cmd_cct(opt, table);
        if (pf->parsed()) return cmd_powerflow(opt);
        if (validate->parsed()) return cmd_validate(opt, show_defaults);
        if (plot->parsed()) return cmd_plot(opt, csv_path, channels);
    } catch (const gfs::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
