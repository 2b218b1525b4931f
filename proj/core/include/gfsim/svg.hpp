#pragma once

// Self-contained SVG line plots of recorded channel groups. Output is
// byte-deterministic for a given result.

#include <string>
#include <vector>

#include "gfsim/engine.hpp"

namespace gfs {

/// Known channel groups: angle-diff (deg), freq-coi (pu), boost (pu),
/// power (pu), voltage (pu).
[[nodiscard]] const std::vector<std::string>& plot_groups();

/// Render one group to SVG text. Throws on unknown group names.
[[nodiscard]] std::string render_plot(const SimResult& result, const std::string& group);

/// Write <group>.svg files into `out_dir`; returns the written paths.
/// An empty group list writes nothing and succeeds.
std::vector<std::string> emit_plots(const SimResult& result,
                                    const std::vector<std::string>& groups,
                                    const std::string& out_dir);

}  // namespace gfs
