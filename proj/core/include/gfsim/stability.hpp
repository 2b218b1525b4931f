#pragma once

// Fault scenarios, loss-of-synchronism detection and critical-clearing-time
// search. A scenario applies a shunt fault at a bus, clears it after a given
// time (optionally tripping a line) and watches the converter angles over a
// post-clearing window.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gfsim/engine.hpp"

namespace gfs {

struct FaultScenario {
    std::string name;
    std::string bus;
    std::string trip_branch;                  // empty: fault removal only
    Complex fault_admittance = {1e4, -1e4};   // pu shunt while the fault is on
    double apply_time_s = 1.0;
    double clearing_time_s = 0.15;
};

/// Build the scenario from a named fault in the system's catalog.
[[nodiscard]] FaultScenario make_scenario(const SystemModel& system, const std::string& fault_name,
                                          double clearing_time_s);

[[nodiscard]] std::vector<Event> scenario_events(const FaultScenario& scenario);

/// Run one scenario: fault at apply_time, cleared clearing_time later,
/// simulated for a further config.horizon_s.
[[nodiscard]] SimResult run_scenario(const InitialisedSystem& system,
                                     const FaultScenario& scenario, const SimConfig& config,
                                     const FvbConfig& fvb);

struct Verdict {
    bool stable = true;
    std::optional<double> los_time_s;
};

/// Loss of synchronism iff any pairwise angle separation exceeded pi within
/// the run, or the run diverged. Uses the full-rate monitor when present,
/// otherwise scans the recorded angle channels.
[[nodiscard]] Verdict detect_loss_of_sync(const SimResult& result);

struct CctProbe {
    double clearing_s = 0.0;
    bool stable = false;
    enum class Origin { Bisection, Endpoint, Sweep } origin = Origin::Bisection;
};

struct CctCell {
    std::string fault;
    std::string config_label;
    double delay_s = 0.0;
    std::optional<double> cct_s;  // empty: unstable even at zero clearing
    bool censored = false;        // stable all the way to t_max
    bool non_monotone = false;
    std::vector<CctProbe> trace;
};

struct CctOptions {
    double t_max_s = 1.5;
    double resolution_s = 0.01;
    /// Linear verification probes around the found value (grid steps).
    int sweep_radius = 2;

    [[nodiscard]] bool operator==(const CctOptions&) const = default;
};

/// Bisection for the largest stable clearing time, to the grid resolution.
/// The verdict function must map a clearing time to stability; it is
/// injectable so searches can be tested against synthetic oracles.
[[nodiscard]] CctCell compute_cct(const std::function<bool(double)>& stable_at,
                                  const CctOptions& options = {});

/// One strategy column of the study matrix.
struct StrategyConfig {
    std::string label;
    FvbConfig fvb;
};

struct CctReport {
    std::vector<CctCell> cells;
    std::vector<std::string> fault_names;
    std::vector<std::string> config_labels;

    [[nodiscard]] const CctCell* find(const std::string& fault, const std::string& label) const;
};

/// Full fault x strategy matrix. Cells are independent and run on `jobs`
/// worker threads; assembly order is deterministic.
[[nodiscard]] CctReport cct_matrix(const SystemModel& system,
                                   const std::vector<std::string>& fault_names,
                                   const std::vector<StrategyConfig>& configs,
                                   const SimConfig& sim_config, const CctOptions& options = {},
                                   int jobs = 1);

/// The six standard study columns: no booster, the local booster at its two
/// pickup settings, and the wide-area booster at 0/50/100 ms delay.
[[nodiscard]] std::vector<StrategyConfig> standard_strategy_set();

}  // namespace gfs
