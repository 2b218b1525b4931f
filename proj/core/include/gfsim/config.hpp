#pragma once

// Structured-text configuration: a line-based `key = value` format for run
// manifests and a record-based schema for grid files. Both are strict:
// unknown keys or fields are rejected with line diagnostics so fixtures stay
// trustworthy.

#include <map>
#include <string>
#include <vector>

#include "gfsim/stability.hpp"
#include "gfsim/system.hpp"

namespace gfs {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_number(line) {}
    int line_number = 0;
};

/// Everything needed to reproduce one invocation.
struct RunManifest {
    std::string grid = "kundur_4vsc";  // bundled system name or a file path
    std::string scenario = "fault1";
    Strategy strategy = Strategy::None;
    double clear_ms = 150.0;
    double delay_ms = 0.0;
    double step_us = 100.0;
    double horizon_s = 5.0;
    int decimation = 10;
    int jobs = 0;  // 0: one worker per hardware thread
    std::string out_dir;
    double fault_apply_s = 1.0;
    double fault_conductance_pu = 1e4;
    double fault_susceptance_pu = -1e4;
    FvbLParams fvb_l;
    FvbWacsParams fvb_wacs;
    CctOptions cct;
    /// Per-converter parameter overrides: id -> field -> value.
    std::map<std::string, std::map<std::string, double>> vsc_overrides;

    [[nodiscard]] bool operator==(const RunManifest&) const = default;
};

/// Parse a manifest document. Later assignments to the same key are rejected.
[[nodiscard]] RunManifest parse_run_config(const std::string& text);
[[nodiscard]] RunManifest parse_run_config_file(const std::string& path);

/// Apply one `key=value` assignment (the CLI --set form).
void apply_setting(RunManifest& manifest, const std::string& assignment);

/// Canonical emission; parse_run_config(emit_run_config(m)) == m.
[[nodiscard]] std::string emit_run_config(const RunManifest& manifest);

/// FNV-1a hash of the canonical manifest text: the determinism stamp.
[[nodiscard]] std::string manifest_hash(const RunManifest& manifest);

/// Keys understood by parse_run_config with their default values and the
/// origin of each default, for diagnostic listings.
struct DefaultEntry {
    std::string key;
    std::string value;
    std::string source;
};
[[nodiscard]] std::vector<DefaultEntry> default_settings();

// Grid files -----------------------------------------------------------

[[nodiscard]] SystemModel parse_system_text(const std::string& text, const std::string& name_hint);
[[nodiscard]] SystemModel load_system_file(const std::string& path);

/// Text of the bundled benchmark grid (also shipped as data/kundur_4vsc.grid).
[[nodiscard]] const std::string& builtin_system_text();

/// Resolve a manifest's grid reference: the bundled name or a path.
[[nodiscard]] SystemModel load_system(const std::string& name_or_path);

// Manifest resolution --------------------------------------------------

[[nodiscard]] SimConfig make_sim_config(const RunManifest& manifest);
[[nodiscard]] FvbConfig make_fvb_config(const RunManifest& manifest);
[[nodiscard]] FaultScenario make_manifest_scenario(const RunManifest& manifest,
                                                   const SystemModel& system);

/// Apply vsc_overrides onto the loaded system. Throws on unknown converter
/// ids or fields; validates the delay against the step.
void apply_manifest(const RunManifest& manifest, SystemModel& system);

}  // namespace gfs
