#include "gfsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfs {

void SimConfig::validate() const {
    if (!(step_s > 0.0)) throw std::invalid_argument("step must be positive");
    if (horizon_s < 0.0) throw std::invalid_argument("horizon must be non-negative");
    if (decimation < 1) throw std::invalid_argument("decimation must be >= 1");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::None: return "none";
        case Strategy::FvbL: return "fvb-l";
        case Strategy::FvbWacs: return "fvb-wacs";
    }
    return "none";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "none") return Strategy::None;
    if (name == "fvb-l") return Strategy::FvbL;
    if (name == "fvb-wacs") return Strategy::FvbWacs;
    throw std::invalid_argument("unknown strategy '" + name + "' (none, fvb-l, fvb-wacs)");
}

std::vector<ScheduledEvent> schedule_events(std::vector<Event> events, double step_s) {
    if (!(step_s > 0.0)) throw std::invalid_argument("step must be positive");
    std::vector<ScheduledEvent> out;
    out.reserve(events.size());
    for (auto& ev : events) {
        if (ev.time_s < 0.0) throw std::invalid_argument("event time must be non-negative");
        ScheduledEvent se;
        se.step = std::lround(ev.time_s / step_s);
        se.event = std::move(ev);
        out.push_back(std::move(se));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.step < b.step; });

    // Pairing checks: a clear needs an active fault, re-applying without a
    // clear or double-tripping a branch is contradictory.
    std::set<std::string> faulted;
    std::set<std::string> tripped;
    for (const auto& se : out) {
        const Event& ev = se.event;
        switch (ev.kind) {
            case EventKind::ApplyFault:
                if (!faulted.insert(ev.bus).second) {
                    throw std::invalid_argument("fault re-applied at bus '" + ev.bus +
                                                "' before being cleared");
                }
                break;
            case EventKind::ClearFault:
                if (faulted.erase(ev.bus) == 0) {
                    throw std::invalid_argument("clear-fault at bus '" + ev.bus +
                                                "' without a preceding apply-fault");
                }
                break;
            case EventKind::TripBranch:
                if (!tripped.insert(ev.branch).second) {
                    throw std::invalid_argument("branch '" + ev.branch + "' tripped twice");
                }
                break;
        }
    }
    return out;
}

int SimResult::unit_index(const std::string& id) const {
    for (std::size_t i = 0; i < unit_ids.size(); ++i) {
        if (unit_ids[i] == id) return static_cast<int>(i);
    }
    throw std::out_of_range("unknown converter '" + id + "' in result");
}

namespace {

constexpr int kDelta = 0;
constexpr int kDomega = 1;
constexpr int kIsD = 2;
constexpr int kIsQ = 3;
constexpr int kVfD = 4;
constexpr int kVfQ = 5;
constexpr int kIgD = 6;
constexpr int kIgQ = 7;
constexpr int kXvD = 8;
constexpr int kXvQ = 9;
constexpr int kXiD = 10;
constexpr int kXiQ = 11;
constexpr int kVrD = 12;
constexpr int kVrQ = 13;

VscState unpack_unit(const Eigen::VectorXd& y, int base) {
    VscState s;
    s.delta = y[base + kDelta];
    s.domega = y[base + kDomega];
    s.i_s = {y[base + kIsD], y[base + kIsQ]};
    s.v_f = {y[base + kVfD], y[base + kVfQ]};
    s.i_g = {y[base + kIgD], y[base + kIgQ]};
    s.integ_v = {y[base + kXvD], y[base + kXvQ]};
    s.integ_i = {y[base + kXiD], y[base + kXiQ]};
    s.vr_filter = {y[base + kVrD], y[base + kVrQ]};
    return s;
}

void pack_unit(const VscState& s, Eigen::VectorXd& y, int base) {
    y[base + kDelta] = s.delta;
    y[base + kDomega] = s.domega;
    y[base + kIsD] = s.i_s.d;
    y[base + kIsQ] = s.i_s.q;
    y[base + kVfD] = s.v_f.d;
    y[base + kVfQ] = s.v_f.q;
    y[base + kIgD] = s.i_g.d;
    y[base + kIgQ] = s.i_g.q;
    y[base + kXvD] = s.integ_v.d;
    y[base + kXvQ] = s.integ_v.q;
    y[base + kXiD] = s.integ_i.d;
    y[base + kXiQ] = s.integ_i.q;
    y[base + kVrD] = s.vr_filter.d;
    y[base + kVrQ] = s.vr_filter.q;
}

}  // namespace

struct Simulator::StageOutputs {
    Dq v_g;
    CascadeResult cascade;
};

Simulator::Simulator(InitialisedSystem system, SimConfig config, FvbConfig fvb)
    : init_(std::move(system)), config_(config), fvb_(fvb) {
    config_.validate();
    const std::size_t n = init_.units.size();
    states_.reserve(n);
    setpoints_.reserve(n);
    for (const auto& u : init_.units) {
        states_.push_back(u.state);
        setpoints_.push_back(u.setpoints);
    }
    freezes_.assign(n, {});
    boosts_.assign(n, 0.0);
    fvb_l_states_.assign(n, {});
    if (fvb_.strategy == Strategy::FvbL) fvb_.local.validate();
    if (fvb_.strategy == Strategy::FvbWacs) {
        fvb_.wacs.validate();
        DelayLine::steps_for(fvb_.wacs.delay_s, config_.step_s);
    }
    fvb_wacs_states_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        FvbWacsState ws;
        if (fvb_.strategy == Strategy::FvbWacs) {
            ws.delay = DelayLine(fvb_.wacs.delay_s, config_.step_s, 0.0);
        }
        fvb_wacs_states_.push_back(std::move(ws));
    }
    for (const auto& u : init_.system.units) {
        base_ratio_.push_back(u.params.rated_mva / init_.system.grid.base_mva);
        inertias_.push_back(u.params.inertia_s);
    }
    build_topology({});
    for (const auto& u : init_.system.units) {
        pcc_index_.push_back(init_.system.grid.bus_index(u.bus));
    }
}

void Simulator::build_topology(const EventEffects& effects) {
    solver_.factor(build_ybus(init_.system.grid, effects));
    active_effects_ = effects;
}

Eigen::VectorXd Simulator::pack_states() const {
    Eigen::VectorXd y(static_cast<int>(states_.size()) * kStatesPerUnit);
    for (std::size_t i = 0; i < states_.size(); ++i) {
        pack_unit(states_[i], y, static_cast<int>(i) * kStatesPerUnit);
    }
    return y;
}

SimResult Simulator::run(const std::vector<Event>& events, double duration_s) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
    const double h = config_.step_s;
    const long steps = std::lround(duration_s / h);
    auto scheduled = schedule_events(events, h);
    for (const auto& se : scheduled) {
        if (se.step > steps) {
            throw std::invalid_argument("event at t=" + std::to_string(se.event.time_s) +
                                        " lies beyond the run duration");
        }
    }

    const std::size_t n = states_.size();
    SimResult result;
    result.step_s = h;
    result.decimation = config_.decimation;
    for (const auto& u : init_.system.units) result.unit_ids.push_back(u.id);
    auto reserve2 = [&](std::vector<std::vector<double>>& ch) {
        ch.assign(n, {});
        for (auto& c : ch) c.reserve(static_cast<std::size_t>(steps / config_.decimation) + 2);
    };
    reserve2(result.delta_rad);
    reserve2(result.domega_pu);
    reserve2(result.v_g_pu);
    reserve2(result.v_f_pu);
    reserve2(result.p_g_pu);
    reserve2(result.q_g_pu);
    reserve2(result.dv_boost_pu);
    reserve2(result.current_limited);

    std::vector<StageOutputs> outs(n);
    Eigen::VectorXcd injections(solver_.size());

    // Full algebraic pass at one stage state: network solve plus cascades.
    auto evaluate_outputs = [&](const std::vector<VscState>& st) {
        injections.setZero();
        for (std::size_t i = 0; i < n; ++i) {
            injections[pcc_index_[i]] +=
                inverse_park(st[i].i_g, st[i].delta) * base_ratio_[i];
        }
        const Eigen::VectorXcd v_bus = solver_.solve(injections);
        for (std::size_t i = 0; i < n; ++i) {
            outs[i].v_g = park(v_bus[pcc_index_[i]], st[i].delta);
            VscSetpoints sp = setpoints_[i];
            sp.dv_boost = boosts_[i];
            outs[i].cascade = evaluate_cascade(st[i], sp, init_.system.units[i].params);
        }
    };

    std::vector<VscState> stage(n);
    const double omega0 = init_.system.grid.omega0();
    auto derivative = [&](double /*t*/, const Eigen::VectorXd& y) {
        for (std::size_t i = 0; i < n; ++i) {
            stage[i] = unpack_unit(y, static_cast<int>(i) * kStatesPerUnit);
        }
        evaluate_outputs(stage);
        Eigen::VectorXd dy(y.size());
        for (std::size_t i = 0; i < n; ++i) {
            VscSetpoints sp = setpoints_[i];
            sp.dv_boost = boosts_[i];
            const VscState d =
                vsc_derivatives(stage[i], outs[i].cascade, outs[i].v_g, sp, freezes_[i],
                                init_.system.units[i].params, omega0);
            pack_unit(d, dy, static_cast<int>(i) * kStatesPerUnit);
        }
        return dy;
    };

    std::vector<double> domega(n);
    bool separated = false;

    // End-of-step update of every discrete element, monitors and recording.
    auto discrete_update = [&](double t, long sample_index) {
        evaluate_outputs(states_);
        for (std::size_t i = 0; i < n; ++i) domega[i] = states_[i].domega;
        const double coi_dev = coi_frequency(domega, inertias_);

        if (fvb_.strategy == Strategy::FvbL) {
            for (std::size_t i = 0; i < n; ++i) {
                boosts_[i] = fvb_l_step(outs[i].v_g.norm(), states_[i].domega, fvb_l_states_[i],
                                        fvb_.local);
            }
        } else if (fvb_.strategy == Strategy::FvbWacs) {
            for (std::size_t i = 0; i < n; ++i) {
                const double raw_error = coi_dev - states_[i].domega;
                const double delayed = fvb_wacs_states_[i].delay.push(raw_error);
                boosts_[i] = fvb_wacs_step(delayed, fvb_wacs_states_[i], fvb_.wacs, config_.step_s);
            }
        }

        // Re-evaluate saturation with the boosts that will act next step.
        for (std::size_t i = 0; i < n; ++i) {
            VscSetpoints sp = setpoints_[i];
            sp.dv_boost = boosts_[i];
            const CascadeResult c = evaluate_cascade(states_[i], sp, init_.system.units[i].params);
            freezes_[i].freeze_voltage_integrator = c.current_limited;
            freezes_[i].freeze_current_integrator = c.modulation_limited;
            outs[i].cascade = c;

            result.max_i_ref_ratio = std::max(result.max_i_ref_ratio,
                                              c.i_ref.norm() / init_.system.units[i].params.i_max);
            result.max_i_s_ratio = std::max(result.max_i_s_ratio,
                                            states_[i].i_s.norm() / init_.system.units[i].params.i_max);
        }

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double sep = std::abs(states_[i].delta - states_[j].delta);
                result.max_separation_rad = std::max(result.max_separation_rad, sep);
                if (sep > std::numbers::pi && !result.separation_time_s) {
                    result.separation_time_s = t;
                    separated = true;
                }
            }
        }

        if (sample_index % config_.decimation == 0) {
            result.time_s.push_back(t);
            result.omega_coi_pu.push_back(1.0 + coi_dev);
            for (std::size_t i = 0; i < n; ++i) {
                result.delta_rad[i].push_back(states_[i].delta);
                result.domega_pu[i].push_back(states_[i].domega);
                result.v_g_pu[i].push_back(outs[i].v_g.norm());
                result.v_f_pu[i].push_back(states_[i].v_f.norm());
                const Dq s = measure_power(outs[i].v_g, states_[i].i_g);
                result.p_g_pu[i].push_back(s.d);
                result.q_g_pu[i].push_back(s.q);
                result.dv_boost_pu[i].push_back(boosts_[i]);
                result.current_limited[i].push_back(outs[i].cascade.current_limited ? 1.0 : 0.0);
            }
        }
    };

    Eigen::VectorXd y = pack_states();
    discrete_update(0.0, 0);

    std::size_t next_event = 0;
    for (long k = 0; k < steps; ++k) {
        bool topology_changed = false;
        EventEffects effects = active_effects_;
        while (next_event < scheduled.size() && scheduled[next_event].step == k) {
            const Event& ev = scheduled[next_event].event;
            switch (ev.kind) {
                case EventKind::ApplyFault:
                    effects.fault_admittance[ev.bus] = ev.admittance;
                    break;
                case EventKind::ClearFault:
                    effects.fault_admittance.erase(ev.bus);
                    break;
                case EventKind::TripBranch:
                    effects.branches_out.insert(ev.branch);
                    break;
            }
            result.event_log.push_back(ev);
            topology_changed = true;
            ++next_event;
        }
        if (topology_changed) build_topology(effects);

        const double t = static_cast<double>(k) * h;
        y = integrate_step(config_.integrator, t, h, y, derivative);
        if (!y.allFinite()) {
            result.nonfinite_time_s = t + h;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            states_[i] = unpack_unit(y, static_cast<int>(i) * kStatesPerUnit);
        }
        discrete_update(t + h, k + 1);
        if (config_.stop_at_separation && separated) break;
    }
    return result;
}

}  // namespace gfs
