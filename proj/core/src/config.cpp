#include "gfsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace gfs {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

double parse_double(const std::string& text, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + text + "'", line);
    }
}

int parse_int(const std::string& text, int line) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("expected an integer, got '" + text + "'", line);
    }
    return value;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// field=value pairs after the leading record tokens
std::map<std::string, std::string> parse_fields(const std::vector<std::string>& tokens,
                                                std::size_t first, int line) {
    std::map<std::string, std::string> out;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= tokens[i].size()) {
            throw ConfigError("expected field=value, got '" + tokens[i] + "'", line);
        }
        const std::string key = tokens[i].substr(0, eq);
        if (!out.emplace(key, tokens[i].substr(eq + 1)).second) {
            throw ConfigError("duplicate field '" + key + "'", line);
        }
    }
    return out;
}

void set_vsc_field(VscParams& p, const std::string& field, double value, int line) {
    if (field == "rated_mva") p.rated_mva = value;
    else if (field == "ac_base_kv") p.ac_base_kv = value;
    else if (field == "dc_base_kv") p.dc_base_kv = value;
    else if (field == "r_f") p.r_f = value;
    else if (field == "x_f") p.x_f = value;
    else if (field == "c_f") p.c_f = value;
    else if (field == "r_c") p.r_c = value;
    else if (field == "x_c") p.x_c = value;
    else if (field == "kp_i") p.kp_i = value;
    else if (field == "ki_i") p.ki_i = value;
    else if (field == "kp_v") p.kp_v = value;
    else if (field == "ki_v") p.ki_v = value;
    else if (field == "r_vr") p.r_vr = value;
    else if (field == "t_vr") p.t_vr = value;
    else if (field == "inertia_s") p.inertia_s = value;
    else if (field == "damping_pu") p.damping_pu = value;
    else if (field == "i_max") p.i_max = value;
    else if (field == "m_max") p.m_max = value;
    else if (field == "v_dc") p.v_dc = value;
    else throw ConfigError("unknown converter field '" + field + "'", line);
}

struct ManifestField {
    std::string key;
    std::string source;
    std::function<std::string(const RunManifest&)> get;
    std::function<void(RunManifest&, const std::string&, int)> set;
};

const std::vector<ManifestField>& manifest_fields() {
    auto dbl = [](double RunManifest::* member, const char* key, const char* source) {
        return ManifestField{
            key, source,
            [member](const RunManifest& m) { return fmt17(m.*member); },
            [member](RunManifest& m, const std::string& v, int line) {
                m.*member = parse_double(v, line);
            }};
    };
    static const std::vector<ManifestField> fields = {
        {"grid", "bundled benchmark system",
         [](const RunManifest& m) { return m.grid; },
         [](RunManifest& m, const std::string& v, int) { m.grid = v; }},
        {"scenario", "first catalog fault",
         [](const RunManifest& m) { return m.scenario; },
         [](RunManifest& m, const std::string& v, int) { m.scenario = v; }},
        {"strategy", "plain fleet, no booster",
         [](const RunManifest& m) { return strategy_name(m.strategy); },
         [](RunManifest& m, const std::string& v, int line) {
             try {
                 m.strategy = strategy_from_name(v);
             } catch (const std::exception& e) {
                 throw ConfigError(e.what(), line);
             }
         }},
        dbl(&RunManifest::clear_ms, "clear_ms", "study fault-clearing time"),
        dbl(&RunManifest::delay_ms, "delay_ms", "no communication delay"),
        dbl(&RunManifest::step_us, "step_us", "average-model integration step"),
        dbl(&RunManifest::horizon_s, "horizon_s", "post-clearing observation window"),
        {"decimation", "1 kHz channel output at the default step",
         [](const RunManifest& m) { return std::to_string(m.decimation); },
         [](RunManifest& m, const std::string& v, int line) { m.decimation = parse_int(v, line); }},
        {"jobs", "one worker per hardware thread",
         [](const RunManifest& m) { return std::to_string(m.jobs); },
         [](RunManifest& m, const std::string& v, int line) { m.jobs = parse_int(v, line); }},
        {"out_dir", "GFSIM_OUT or ./out",
         [](const RunManifest& m) { return m.out_dir; },
         [](RunManifest& m, const std::string& v, int) { m.out_dir = v; }},
        dbl(&RunManifest::fault_apply_s, "fault.apply_s", "pre-fault settling window"),
        dbl(&RunManifest::fault_conductance_pu, "fault.conductance_pu", "near-bolted short circuit"),
        dbl(&RunManifest::fault_susceptance_pu, "fault.susceptance_pu", "near-bolted short circuit"),
        {"fvb_l.pickup_voltage_pu", "local booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_l.v_pickup); },
         [](RunManifest& m, const std::string& v, int line) { m.fvb_l.v_pickup = parse_double(v, line); }},
        {"fvb_l.reset_voltage_pu", "local booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_l.v_reset); },
         [](RunManifest& m, const std::string& v, int line) { m.fvb_l.v_reset = parse_double(v, line); }},
        {"fvb_l.freq_threshold_pu", "local booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_l.freq_threshold); },
         [](RunManifest& m, const std::string& v, int line) {
             m.fvb_l.freq_threshold = parse_double(v, line);
         }},
        {"fvb_l.boost_pu", "local booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_l.boost_pu); },
         [](RunManifest& m, const std::string& v, int line) { m.fvb_l.boost_pu = parse_double(v, line); }},
        {"fvb_wacs.gain_pu", "wide-area booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_wacs.gain); },
         [](RunManifest& m, const std::string& v, int line) { m.fvb_wacs.gain = parse_double(v, line); }},
        {"fvb_wacs.lowpass_s", "wide-area booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_wacs.lowpass_s); },
         [](RunManifest& m, const std::string& v, int line) {
             m.fvb_wacs.lowpass_s = parse_double(v, line);
         }},
        {"fvb_wacs.washout_s", "wide-area booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_wacs.washout_s); },
         [](RunManifest& m, const std::string& v, int line) {
             m.fvb_wacs.washout_s = parse_double(v, line);
         }},
        {"fvb_wacs.boost_pu", "wide-area booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_wacs.boost_pu); },
         [](RunManifest& m, const std::string& v, int line) {
             m.fvb_wacs.boost_pu = parse_double(v, line);
         }},
        {"fvb_wacs.deadband_pu", "wide-area booster study setting",
         [](const RunManifest& m) { return fmt17(m.fvb_wacs.deadband); },
         [](RunManifest& m, const std::string& v, int line) {
             m.fvb_wacs.deadband = parse_double(v, line);
         }},
        {"cct.t_max_s", "above the largest expected critical time",
         [](const RunManifest& m) { return fmt17(m.cct.t_max_s); },
         [](RunManifest& m, const std::string& v, int line) { m.cct.t_max_s = parse_double(v, line); }},
        {"cct.resolution_ms", "reported critical-time granularity",
         [](const RunManifest& m) { return fmt17(m.cct.resolution_s * 1000.0); },
         [](RunManifest& m, const std::string& v, int line) {
             m.cct.resolution_s = parse_double(v, line) / 1000.0;
         }},
        {"cct.sweep_radius", "non-monotonicity verification window",
         [](const RunManifest& m) { return std::to_string(m.cct.sweep_radius); },
         [](RunManifest& m, const std::string& v, int line) {
             m.cct.sweep_radius = parse_int(v, line);
         }},
    };
    return fields;
}

void set_manifest_key(RunManifest& manifest, const std::string& key, const std::string& value,
                      int line) {
    if (key.rfind("vsc.", 0) == 0) {
        const auto rest = key.substr(4);
        const auto dot = rest.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 >= rest.size()) {
            throw ConfigError("converter override must be vsc.<id>.<field>", line);
        }
        const std::string id = rest.substr(0, dot);
        const std::string field = rest.substr(dot + 1);
        VscParams probe;  // reject unknown fields immediately
        set_vsc_field(probe, field, 1.0, line);
        auto& per_unit = manifest.vsc_overrides[id];
        if (!per_unit.emplace(field, parse_double(value, line)).second) {
            throw ConfigError("duplicate override '" + key + "'", line);
        }
        return;
    }
    for (const auto& f : manifest_fields()) {
        if (f.key == key) {
            f.set(manifest, value, line);
            return;
        }
    }
    throw ConfigError("unknown key '" + key + "'", line);
}

}  // namespace

RunManifest parse_run_config(const std::string& text) {
    RunManifest manifest;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("expected key = value", line_no);
        }
        if (key.rfind("vsc.", 0) != 0 && !seen.insert(key).second) {
            throw ConfigError("key '" + key + "' assigned twice", line_no);
        }
        set_manifest_key(manifest, key, value, line_no);
    }
    return manifest;
}

RunManifest parse_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

void apply_setting(RunManifest& manifest, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("setting must be key=value: '" + assignment + "'");
    }
    set_manifest_key(manifest, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), 0);
}

std::string emit_run_config(const RunManifest& manifest) {
    std::ostringstream out;
    for (const auto& f : manifest_fields()) {
        const std::string value = f.get(manifest);
        if (value.empty()) continue;  // unset strings (out_dir) are omitted
        out << f.key << " = " << value << '\n';
    }
    for (const auto& [id, fields] : manifest.vsc_overrides) {
        for (const auto& [field, value] : fields) {
            out << "vsc." << id << '.' << field << " = " << fmt17(value) << '\n';
        }
    }
    return out.str();
}

std::string manifest_hash(const RunManifest& manifest) {
    const std::string text = emit_run_config(manifest);
    std::uint64_t hash = 1469598103934665603ull;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<DefaultEntry> default_settings() {
    const RunManifest defaults;
    std::vector<DefaultEntry> out;
    for (const auto& f : manifest_fields()) {
        out.push_back({f.key, f.get(defaults), f.source});
    }
    return out;
}

SystemModel parse_system_text(const std::string& text, const std::string& name_hint) {
    SystemModel system;
    system.name = name_hint;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;

    auto require = [&](const std::map<std::string, std::string>& fields, const char* key) {
        auto it = fields.find(key);
        if (it == fields.end()) {
            throw ConfigError(std::string("missing required field '") + key + "'", line_no);
        }
        return it->second;
    };
    auto optional = [&](const std::map<std::string, std::string>& fields, const char* key,
                        const std::string& fallback) {
        auto it = fields.find(key);
        return it == fields.end() ? fallback : it->second;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        auto tokens = tokenize(line);

        if (tokens.size() >= 3 && tokens[1] == "=") {
            const std::string key = tokens[0];
            const std::string value = line.substr(line.find('=') + 1);
            if (key == "name") system.name = trim(value);
            else if (key == "system.base_mva") system.grid.base_mva = parse_double(trim(value), line_no);
            else if (key == "system.frequency_hz") system.grid.frequency_hz = parse_double(trim(value), line_no);
            else throw ConfigError("unknown key '" + key + "'", line_no);
            continue;
        }

        const std::string& record = tokens[0];
        if (record == "bus") {
            if (tokens.size() < 2) throw ConfigError("bus needs an id", line_no);
            auto fields = parse_fields(tokens, 2, line_no);
            Bus bus;
            bus.id = tokens[1];
            bus.nominal_kv = parse_double(require(fields, "kv"), line_no);
            system.grid.buses.push_back(bus);
        } else if (record == "branch") {
            if (tokens.size() < 2) throw ConfigError("branch needs an id", line_no);
            auto fields = parse_fields(tokens, 2, line_no);
            Branch br;
            br.id = tokens[1];
            br.from = require(fields, "from");
            br.to = require(fields, "to");
            br.r_pu = parse_double(require(fields, "r_pu"), line_no);
            br.x_pu = parse_double(require(fields, "x_pu"), line_no);
            br.b_pu = parse_double(optional(fields, "b_pu", "0"), line_no);
            br.in_service = parse_int(optional(fields, "in_service", "1"), line_no) != 0;
            for (const auto& [k, v] : fields) {
                if (k != "from" && k != "to" && k != "r_pu" && k != "x_pu" && k != "b_pu" &&
                    k != "in_service") {
                    throw ConfigError("unknown branch field '" + k + "'", line_no);
                }
            }
            system.grid.branches.push_back(br);
        } else if (record == "load") {
            if (tokens.size() < 2) throw ConfigError("load needs a bus", line_no);
            auto fields = parse_fields(tokens, 2, line_no);
            Load load;
            load.bus = tokens[1];
            load.p_mw = parse_double(require(fields, "p_mw"), line_no);
            load.q_mvar = parse_double(require(fields, "q_mvar"), line_no);
            const std::string model = optional(fields, "model", "impedance");
            if (model == "impedance") load.model = LoadModel::ImpedanceAtNominal;
            else if (model == "pq") load.model = LoadModel::ConvertAtPowerFlow;
            else throw ConfigError("load model must be impedance or pq", line_no);
            for (const auto& [k, v] : fields) {
                if (k != "p_mw" && k != "q_mvar" && k != "model") {
                    throw ConfigError("unknown load field '" + k + "'", line_no);
                }
            }
            system.grid.loads.push_back(load);
        } else if (record == "shunt") {
            if (tokens.size() < 2) throw ConfigError("shunt needs a bus", line_no);
            auto fields = parse_fields(tokens, 2, line_no);
            Shunt sh;
            sh.bus = tokens[1];
            sh.q_mvar = parse_double(optional(fields, "q_mvar", "0"), line_no);
            sh.g_mw = parse_double(optional(fields, "g_mw", "0"), line_no);
            for (const auto& [k, v] : fields) {
                if (k != "q_mvar" && k != "g_mw") {
                    throw ConfigError("unknown shunt field '" + k + "'", line_no);
                }
            }
            system.grid.shunts.push_back(sh);
        } else if (record == "converter") {
            if (tokens.size() < 2) throw ConfigError("converter needs an id", line_no);
            auto fields = parse_fields(tokens, 2, line_no);
            ConverterUnit unit;
            unit.id = tokens[1];
            unit.bus = require(fields, "bus");
            const std::string role = optional(fields, "role", "pv");
            if (role == "slack") unit.role = BusKind::Slack;
            else if (role == "pv") unit.role = BusKind::PV;
            else if (role == "pq") unit.role = BusKind::PQ;
            else throw ConfigError("converter role must be slack, pv or pq", line_no);
            for (const auto& [k, v] : fields) {
                if (k == "bus" || k == "role") continue;
                if (k == "p_mw") unit.p_mw = parse_double(v, line_no);
                else if (k == "v_pu") unit.v_pu = parse_double(v, line_no);
                else if (k == "q_mvar") unit.q_mvar = parse_double(v, line_no);
                else set_vsc_field(unit.params, k, parse_double(v, line_no), line_no);
            }
            system.units.push_back(unit);
        } else if (record == "fault") {
            if (tokens.size() < 2) throw ConfigError("fault needs a name", line_no);
            auto fields = parse_fields(tokens, 2, line_no);
            FaultSpec fault;
            fault.name = tokens[1];
            fault.bus = require(fields, "bus");
            fault.trip_branch = optional(fields, "trip", "");
            for (const auto& [k, v] : fields) {
                if (k != "bus" && k != "trip") {
                    throw ConfigError("unknown fault field '" + k + "'", line_no);
                }
            }
            system.faults.push_back(fault);
        } else {
            throw ConfigError("unknown record type '" + record + "'", line_no);
        }
    }
    system.validate();
    return system;
}

SystemModel load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_system_text(buffer.str(), path);
}

SystemModel load_system(const std::string& name_or_path) {
    if (name_or_path == "kundur_4vsc") {
        return parse_system_text(builtin_system_text(), "kundur_4vsc");
    }
    return load_system_file(name_or_path);
}

SimConfig make_sim_config(const RunManifest& manifest) {
    SimConfig config;
    config.step_s = manifest.step_us * 1e-6;
    config.horizon_s = manifest.horizon_s;
    config.decimation = manifest.decimation;
    config.validate();
    return config;
}

FvbConfig make_fvb_config(const RunManifest& manifest) {
    FvbConfig fvb;
    fvb.strategy = manifest.strategy;
    fvb.local = manifest.fvb_l;
    fvb.wacs = manifest.fvb_wacs;
    fvb.wacs.delay_s = manifest.delay_ms * 1e-3;
    fvb.local.validate();
    fvb.wacs.validate();
    // The delay buffer is sampled at the engine step; enforce an exact
    // multiple at configuration time.
    DelayLine::steps_for(fvb.wacs.delay_s, manifest.step_us * 1e-6);
    return fvb;
}

FaultScenario make_manifest_scenario(const RunManifest& manifest, const SystemModel& system) {
    FaultScenario scenario = make_scenario(system, manifest.scenario, manifest.clear_ms * 1e-3);
    scenario.apply_time_s = manifest.fault_apply_s;
    scenario.fault_admittance = {manifest.fault_conductance_pu, manifest.fault_susceptance_pu};
    return scenario;
}

void apply_manifest(const RunManifest& manifest, SystemModel& system) {
    for (const auto& [id, fields] : manifest.vsc_overrides) {
        auto unit = std::find_if(system.units.begin(), system.units.end(),
                                 [&](const ConverterUnit& u) { return u.id == id; });
        if (unit == system.units.end()) {
            throw ConfigError("override references unknown converter '" + id + "'");
        }
        for (const auto& [field, value] : fields) {
            set_vsc_field(unit->params, field, value, 0);
        }
        unit->params.validate();
    }
}

}  // namespace gfs
