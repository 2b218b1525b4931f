#pragma once

// Result emission: time-series CSV (bit-exact fixtures: 9 significant
// digits, '.' decimal separator, LF endings), JSON reports shaped like the
// study tables, and the angle-unwrap helper for recorded channels.

#include <string>
#include <vector>

#include "nlohmann/json_fwd.hpp"

#include "gfsim/stability.hpp"

namespace gfs {

/// Canonical CSV number format: 9 significant digits.
[[nodiscard]] std::string format_number(double value);

/// Remove +-2*pi jumps so a recorded angle channel is continuous.
[[nodiscard]] std::vector<double> unwrap_angles(const std::vector<double>& wrapped);

[[nodiscard]] std::string timeseries_csv(const SimResult& result);
void write_timeseries_csv(const SimResult& result, const std::string& path);

/// Re-read a time-series CSV (for plotting previously written runs). Only
/// channels present in the header are filled.
[[nodiscard]] SimResult read_timeseries_csv(const std::string& path);

[[nodiscard]] nlohmann::ordered_json run_summary_json(const SimResult& result,
                                                      const Verdict& verdict,
                                                      const std::string& config_hash);

[[nodiscard]] nlohmann::ordered_json cct_report_json(const CctReport& report);
/// Matrix CSV: one row per fault, one column per strategy configuration,
/// cell values in milliseconds ("-" for no critical time, ">" prefix when
/// censored).
[[nodiscard]] std::string cct_report_csv(const CctReport& report);

[[nodiscard]] nlohmann::ordered_json powerflow_report_json(const SystemModel& system,
                                                           const PowerFlowSolution& solution);
/// Fixed-width operating-point table, one row per converter.
[[nodiscard]] std::string powerflow_report_text(const SystemModel& system,
                                                const PowerFlowSolution& solution);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace gfs
