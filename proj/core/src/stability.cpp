#include "gfsim/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace gfs {

FaultScenario make_scenario(const SystemModel& system, const std::string& fault_name,
                            double clearing_time_s) {
    const FaultSpec* spec = system.find_fault(fault_name);
    if (spec == nullptr) {
        throw std::invalid_argument("unknown fault '" + fault_name + "' in system '" +
                                    system.name + "'");
    }
    FaultScenario sc;
    sc.name = fault_name;
    sc.bus = spec->bus;
    sc.trip_branch = spec->trip_branch;
    sc.clearing_time_s = clearing_time_s;
    return sc;
}

std::vector<Event> scenario_events(const FaultScenario& scenario) {
    if (scenario.clearing_time_s < 0.0) {
        throw std::invalid_argument("clearing time must be non-negative");
    }
    std::vector<Event> events;
    Event apply;
    apply.time_s = scenario.apply_time_s;
    apply.kind = EventKind::ApplyFault;
    apply.bus = scenario.bus;
    apply.admittance = scenario.fault_admittance;
    events.push_back(apply);

    Event clear;
    clear.time_s = scenario.apply_time_s + scenario.clearing_time_s;
    clear.kind = EventKind::ClearFault;
    clear.bus = scenario.bus;
    events.push_back(clear);

    if (!scenario.trip_branch.empty()) {
        Event trip;
        trip.time_s = clear.time_s;
        trip.kind = EventKind::TripBranch;
        trip.branch = scenario.trip_branch;
        events.push_back(trip);
    }
    return events;
}

SimResult run_scenario(const InitialisedSystem& system, const FaultScenario& scenario,
                       const SimConfig& config, const FvbConfig& fvb) {
    Simulator sim(system, config, fvb);
    const double duration =
        scenario.apply_time_s + scenario.clearing_time_s + config.horizon_s;
    return sim.run(scenario_events(scenario), duration);
}

Verdict detect_loss_of_sync(const SimResult& result) {
    if (result.nonfinite_time_s) {
        return {false, result.nonfinite_time_s};
    }
    if (result.separation_time_s) {
        return {false, result.separation_time_s};
    }
    // Synthetic or externally loaded results: scan the recorded channels.
    const std::size_t n = result.delta_rad.size();
    for (std::size_t k = 0; k < result.samples(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(result.delta_rad[i][k] - result.delta_rad[j][k]) > std::numbers::pi) {
                    return {false, result.time_s[k]};
                }
            }
        }
    }
    return {true, std::nullopt};
}

CctCell compute_cct(const std::function<bool(double)>& stable_at, const CctOptions& options) {
    if (!(options.resolution_s > 0.0) || !(options.t_max_s > options.resolution_s)) {
        throw std::invalid_argument("CCT search needs t_max > resolution > 0");
    }
    CctCell cell;
    const double res = options.resolution_s;
    const long grid_max = std::lround(options.t_max_s / res);

    std::map<long, bool> probed;
    auto probe = [&](long g, CctProbe::Origin origin) {
        auto it = probed.find(g);
        if (it != probed.end()) return it->second;
        const bool ok = stable_at(static_cast<double>(g) * res);
        probed[g] = ok;
        cell.trace.push_back({static_cast<double>(g) * res, ok, origin});
        return ok;
    };

    long lo = 0;         // assumed stable until proven otherwise
    long hi = grid_max;  // assumed unstable until proven otherwise
    bool any_stable = false;
    bool any_unstable = false;
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (probe(mid, CctProbe::Origin::Bisection)) {
            lo = mid;
            any_stable = true;
        } else {
            hi = mid;
            any_unstable = true;
        }
    }

    if (!any_stable) {
        // Every probe failed; check the lower endpoint before giving up.
        if (probe(0, CctProbe::Origin::Endpoint)) {
            cell.cct_s = 0.0;
        } else {
            cell.cct_s = std::nullopt;  // unstable even with instant clearing
        }
    } else if (!any_unstable) {
        // Every probe passed; check whether the search range was simply
        // too short.
        if (probe(grid_max, CctProbe::Origin::Endpoint)) {
            cell.cct_s = options.t_max_s;
            cell.censored = true;
        } else {
            cell.cct_s = static_cast<double>(lo) * res;
        }
    } else {
        cell.cct_s = static_cast<double>(lo) * res;
    }

    // Verification sweep around the found value guards against
    // non-monotone verdicts from discrete controller latching.
    if (cell.cct_s && !cell.censored && options.sweep_radius > 0) {
        const long found = std::lround(*cell.cct_s / res);
        for (long g = std::max<long>(0, found - options.sweep_radius);
             g <= std::min(grid_max, found + options.sweep_radius); ++g) {
            probe(g, CctProbe::Origin::Sweep);
        }
    }
    for (const auto& [g, ok] : probed) {
        const double t = static_cast<double>(g) * res;
        if (cell.cct_s && ((t <= *cell.cct_s && !ok) || (t > *cell.cct_s && ok))) {
            cell.non_monotone = true;
        }
    }
    return cell;
}

const CctCell* CctReport::find(const std::string& fault, const std::string& label) const {
    for (const auto& cell : cells) {
        if (cell.fault == fault && cell.config_label == label) return &cell;
    }
    return nullptr;
}

std::vector<StrategyConfig> standard_strategy_set() {
    std::vector<StrategyConfig> configs;
    {
        StrategyConfig c;
        c.label = "base";
        c.fvb.strategy = Strategy::None;
        configs.push_back(c);
    }
    {
        StrategyConfig c;
        c.label = "fvb-l-v075";
        c.fvb.strategy = Strategy::FvbL;
        configs.push_back(c);
    }
    {
        StrategyConfig c;
        c.label = "fvb-l-v050";
        c.fvb.strategy = Strategy::FvbL;
        c.fvb.local.v_pickup = 0.5;
        configs.push_back(c);
    }
    for (double delay : {0.0, 0.05, 0.1}) {
        StrategyConfig c;
        c.label = "fvb-wacs-d" + std::to_string(static_cast<int>(std::lround(delay * 1000)));
        c.fvb.strategy = Strategy::FvbWacs;
        c.fvb.wacs.delay_s = delay;
        configs.push_back(c);
    }
    return configs;
}

CctReport cct_matrix(const SystemModel& system, const std::vector<std::string>& fault_names,
                     const std::vector<StrategyConfig>& configs, const SimConfig& sim_config,
                     const CctOptions& options, int jobs) {
    if (jobs < 1) jobs = 1;
    const InitialisedSystem init = initialise_system(system);

    struct Task {
        std::string fault;
        StrategyConfig config;
    };
    std::vector<Task> tasks;
    for (const auto& fault : fault_names) {
        if (system.find_fault(fault) == nullptr) {
            throw std::invalid_argument("unknown fault '" + fault + "'");
        }
        for (const auto& cfg : configs) tasks.push_back({fault, cfg});
    }

    CctReport report;
    report.fault_names = fault_names;
    for (const auto& cfg : configs) report.config_labels.push_back(cfg.label);
    report.cells.resize(tasks.size());

    SimConfig probe_config = sim_config;
    probe_config.stop_at_separation = true;
    probe_config.decimation = 100000;  // verdict-only runs keep no channels

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const Task& task = tasks[k];
            auto stable_at = [&](double clearing_s) {
                const FaultScenario sc = make_scenario(system, task.fault, clearing_s);
                const SimResult r = run_scenario(init, sc, probe_config, task.config.fvb);
                return detect_loss_of_sync(r).stable;
            };
            CctCell cell = compute_cct(stable_at, options);
            cell.fault = task.fault;
            cell.config_label = task.config.label;
            cell.delay_s = task.config.fvb.strategy == Strategy::FvbWacs
                               ? task.config.fvb.wacs.delay_s
                               : 0.0;
            report.cells[k] = std::move(cell);
        }
    };

    if (jobs == 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return report;
}

}  // namespace gfs
