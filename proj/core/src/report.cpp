#include "gfsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nlohmann/json.hpp"

namespace gfs {

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

std::vector<double> unwrap_angles(const std::vector<double>& wrapped) {
    std::vector<double> out = wrapped;
    double offset = 0.0;
    for (std::size_t k = 1; k < out.size(); ++k) {
        double jump = wrapped[k] - wrapped[k - 1];
        while (jump > std::numbers::pi) {
            offset -= 2.0 * std::numbers::pi;
            jump -= 2.0 * std::numbers::pi;
        }
        while (jump < -std::numbers::pi) {
            offset += 2.0 * std::numbers::pi;
            jump += 2.0 * std::numbers::pi;
        }
        out[k] = wrapped[k] + offset;
    }
    return out;
}

namespace {

const char* kChannelNames[] = {"delta_rad", "domega_pu", "vg_pu",      "vf_pu",
                               "pg_pu",     "qg_pu",     "dvboost_pu", "ilim"};

const std::vector<std::vector<double>>* channel_by_index(const SimResult& r, int which) {
    switch (which) {
        case 0: return &r.delta_rad;
        case 1: return &r.domega_pu;
        case 2: return &r.v_g_pu;
        case 3: return &r.v_f_pu;
        case 4: return &r.p_g_pu;
        case 5: return &r.q_g_pu;
        case 6: return &r.dv_boost_pu;
        case 7: return &r.current_limited;
    }
    return nullptr;
}

std::vector<std::vector<double>>* channel_by_index(SimResult& r, int which) {
    return const_cast<std::vector<std::vector<double>>*>(
        channel_by_index(static_cast<const SimResult&>(r), which));
}

}  // namespace

std::string timeseries_csv(const SimResult& result) {
    std::ostringstream out;
    out << "time_s";
    const std::size_t n = result.unit_ids.size();
    for (int c = 0; c < 8; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            out << ',' << kChannelNames[c] << '_' << result.unit_ids[i];
        }
    }
    out << ",omega_coi_pu\n";

    for (std::size_t k = 0; k < result.samples(); ++k) {
        out << format_number(result.time_s[k]);
        for (int c = 0; c < 8; ++c) {
            const auto* channel = channel_by_index(result, c);
            for (std::size_t i = 0; i < n; ++i) {
                out << ',' << format_number((*channel)[i][k]);
            }
        }
        out << ',' << format_number(result.omega_coi_pu[k]) << '\n';
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

void write_timeseries_csv(const SimResult& result, const std::string& path) {
    write_text_file(path, timeseries_csv(result));
}

SimResult read_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty CSV '" + path + "'");

    std::vector<std::string> columns;
    {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) columns.push_back(col);
    }
    if (columns.empty() || columns[0] != "time_s") {
        throw std::runtime_error("CSV must start with a time_s column");
    }

    SimResult result;
    // Column -> (channel index, unit index); unit ids recovered from names.
    struct Target {
        int channel = -1;
        int unit = -1;
        bool coi = false;
    };
    std::vector<Target> targets(columns.size());
    for (std::size_t c = 1; c < columns.size(); ++c) {
        if (columns[c] == "omega_coi_pu") {
            targets[c].coi = true;
            continue;
        }
        for (int ch = 0; ch < 8; ++ch) {
            const std::string prefix = std::string(kChannelNames[ch]) + "_";
            if (columns[c].rfind(prefix, 0) == 0) {
                const std::string unit = columns[c].substr(prefix.size());
                int idx = -1;
                for (std::size_t u = 0; u < result.unit_ids.size(); ++u) {
                    if (result.unit_ids[u] == unit) idx = static_cast<int>(u);
                }
                if (idx < 0) {
                    idx = static_cast<int>(result.unit_ids.size());
                    result.unit_ids.push_back(unit);
                }
                targets[c] = {ch, idx, false};
                break;
            }
        }
        if (targets[c].channel < 0 && !targets[c].coi) {
            throw std::runtime_error("unknown CSV column '" + columns[c] + "'");
        }
    }
    const std::size_t n = result.unit_ids.size();
    for (int ch = 0; ch < 8; ++ch) channel_by_index(result, ch)->assign(n, {});

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cellstr;
        std::size_t c = 0;
        while (std::getline(ls, cellstr, ',')) {
            if (c >= columns.size()) throw std::runtime_error("row wider than header");
            const double value = std::stod(cellstr);
            if (c == 0) {
                result.time_s.push_back(value);
            } else if (targets[c].coi) {
                result.omega_coi_pu.push_back(value);
            } else {
                (*channel_by_index(result, targets[c].channel))[targets[c].unit].push_back(value);
            }
            ++c;
        }
        if (c != columns.size()) throw std::runtime_error("row narrower than header");
    }
    if (result.samples() >= 2) {
        result.step_s = result.time_s[1] - result.time_s[0];
    }
    return result;
}

nlohmann::ordered_json run_summary_json(const SimResult& result, const Verdict& verdict,
                                        const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["stable"] = verdict.stable;
    if (verdict.los_time_s) j["loss_of_sync_time_s"] = *verdict.los_time_s;
    j["max_angle_separation_rad"] = result.max_separation_rad;
    j["max_current_ref_ratio"] = result.max_i_ref_ratio;
    j["max_current_ratio"] = result.max_i_s_ratio;
    j["samples"] = result.samples();
    j["step_s"] = result.step_s;
    if (result.nonfinite_time_s) j["diverged_at_s"] = *result.nonfinite_time_s;
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& ev : result.event_log) {
        nlohmann::ordered_json e;
        e["time_s"] = ev.time_s;
        switch (ev.kind) {
            case EventKind::ApplyFault:
                e["kind"] = "apply-fault";
                e["bus"] = ev.bus;
                break;
            case EventKind::ClearFault:
                e["kind"] = "clear-fault";
                e["bus"] = ev.bus;
                break;
            case EventKind::TripBranch:
                e["kind"] = "trip-branch";
                e["branch"] = ev.branch;
                break;
        }
        events.push_back(e);
    }
    j["events"] = events;
    return j;
}

namespace {

std::string cct_cell_text(const CctCell& cell) {
    if (!cell.cct_s) return "-";
    const long ms = std::lround(*cell.cct_s * 1000.0);
    std::string text = (cell.censored ? ">" : "") + std::to_string(ms);
    if (cell.non_monotone) text += "*";
    return text;
}

}  // namespace

nlohmann::ordered_json cct_report_json(const CctReport& report) {
    nlohmann::ordered_json j;
    j["faults"] = report.fault_names;
    j["configurations"] = report.config_labels;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells) {
        nlohmann::ordered_json c;
        c["fault"] = cell.fault;
        c["configuration"] = cell.config_label;
        c["delay_s"] = cell.delay_s;
        if (cell.cct_s) {
            c["cct_ms"] = std::lround(*cell.cct_s * 1000.0);
        } else {
            c["cct_ms"] = nullptr;
        }
        c["censored"] = cell.censored;
        c["non_monotone"] = cell.non_monotone;
        nlohmann::ordered_json probes = nlohmann::ordered_json::array();
        for (const auto& probe : cell.trace) {
            nlohmann::ordered_json p;
            p["clearing_ms"] = std::lround(probe.clearing_s * 1000.0);
            p["stable"] = probe.stable;
            p["origin"] = probe.origin == CctProbe::Origin::Bisection ? "bisection"
                          : probe.origin == CctProbe::Origin::Endpoint ? "endpoint"
                                                                       : "sweep";
            probes.push_back(p);
        }
        c["probes"] = probes;
        cells.push_back(c);
    }
    j["cells"] = cells;
    return j;
}

std::string cct_report_csv(const CctReport& report) {
    std::ostringstream out;
    out << "fault";
    for (const auto& label : report.config_labels) out << ',' << label;
    out << '\n';
    for (const auto& fault : report.fault_names) {
        out << fault;
        for (const auto& label : report.config_labels) {
            const CctCell* cell = report.find(fault, label);
            out << ',' << (cell ? cct_cell_text(*cell) : "?");
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::ordered_json powerflow_report_json(const SystemModel& system,
                                             const PowerFlowSolution& solution) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json units = nlohmann::ordered_json::array();
    for (const auto& unit : system.units) {
        const Complex s = solution.injection_mva(unit.bus, system.grid.base_mva);
        const int idx = solution.index(unit.bus);
        nlohmann::ordered_json u;
        u["id"] = unit.id;
        u["bus"] = unit.bus;
        u["v_pu"] = solution.v_pu[idx];
        u["delta_deg"] = solution.theta_rad[idx] * 180.0 / std::numbers::pi;
        u["p_mw"] = s.real();
        u["q_mvar"] = s.imag();
        units.push_back(u);
    }
    j["converters"] = units;
    nlohmann::ordered_json buses = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < solution.bus_order.size(); ++i) {
        nlohmann::ordered_json b;
        b["bus"] = solution.bus_order[i];
        b["v_pu"] = solution.v_pu[static_cast<int>(i)];
        b["theta_deg"] = solution.theta_rad[static_cast<int>(i)] * 180.0 / std::numbers::pi;
        buses.push_back(b);
    }
    j["buses"] = buses;
    return j;
}

std::string powerflow_report_text(const SystemModel& system, const PowerFlowSolution& solution) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %-5s %9s %11s %11s %11s\n", "unit", "bus", "v_pu",
                  "delta_deg", "p_mw", "q_mvar");
    out << line;
    for (const auto& unit : system.units) {
        const Complex s = solution.injection_mva(unit.bus, system.grid.base_mva);
        const int idx = solution.index(unit.bus);
        std::snprintf(line, sizeof(line), "%-8s %-5s %9.4f %11.4f %11.2f %11.2f\n",
                      unit.id.c_str(), unit.bus.c_str(), solution.v_pu[idx],
                      solution.theta_rad[idx] * 180.0 / std::numbers::pi, s.real(), s.imag());
        out << line;
    }
    return out.str();
}

}  // namespace gfs
