#pragma once

// Deterministic fixed-step time-domain simulation of the converter fleet
// coupled through the algebraic network. Continuous states advance with RK4;
// discrete elements (booster latches, delay buffers, anti-windup freezes)
// advance once per full step so the integrator right-hand side stays smooth
// within a step.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "gfsim/fvb.hpp"
#include "gfsim/network.hpp"
#include "gfsim/rk4.hpp"
#include "gfsim/system.hpp"

namespace gfs {

struct SimConfig {
    double step_s = 1e-4;
    double horizon_s = 5.0;   // post-clearing window in scenario runs
    int decimation = 10;      // recorded-channel downsampling
    Integrator integrator = Integrator::Rk4;
    /// End the run as soon as the angle-separation bound is crossed
    /// (verdict-only runs).
    bool stop_at_separation = false;

    void validate() const;
};

enum class Strategy { None, FvbL, FvbWacs };

[[nodiscard]] std::string strategy_name(Strategy s);
[[nodiscard]] Strategy strategy_from_name(const std::string& name);

struct FvbConfig {
    Strategy strategy = Strategy::None;
    FvbLParams local;
    FvbWacsParams wacs;
};

enum class EventKind { ApplyFault, ClearFault, TripBranch };

struct Event {
    double time_s = 0.0;
    EventKind kind = EventKind::ApplyFault;
    std::string bus;                          // fault events
    Complex admittance = {1e4, -1e4};         // ApplyFault shunt, pu
    std::string branch;                       // TripBranch
};

struct ScheduledEvent {
    long step = 0;
    Event event;
};

/// Snap event times to the nearest step multiple, sort, and validate the
/// apply/clear pairing. Throws on contradictory sequences.
[[nodiscard]] std::vector<ScheduledEvent> schedule_events(std::vector<Event> events,
                                                          double step_s);

/// Recorded run. Channels are decimated; the loss-of-synchronism monitor and
/// the current-limit monitor run at full rate regardless.
struct SimResult {
    std::vector<std::string> unit_ids;
    double step_s = 0.0;
    int decimation = 1;

    std::vector<double> time_s;
    // Outer index: converter. Inner: sample.
    std::vector<std::vector<double>> delta_rad;
    std::vector<std::vector<double>> domega_pu;
    std::vector<std::vector<double>> v_g_pu;
    std::vector<std::vector<double>> v_f_pu;
    std::vector<std::vector<double>> p_g_pu;
    std::vector<std::vector<double>> q_g_pu;
    std::vector<std::vector<double>> dv_boost_pu;
    std::vector<std::vector<double>> current_limited;
    std::vector<double> omega_coi_pu;

    std::vector<Event> event_log;

    /// First time max pairwise |delta_i - delta_j| exceeded pi (full rate).
    std::optional<double> separation_time_s;
    double max_separation_rad = 0.0;
    /// Largest post-limiter current reference norm seen, relative to i_max.
    double max_i_ref_ratio = 0.0;
    /// Largest physical converter-side current norm, relative to i_max.
    double max_i_s_ratio = 0.0;
    /// First non-finite state; the run stops there.
    std::optional<double> nonfinite_time_s;

    [[nodiscard]] std::size_t samples() const { return time_s.size(); }
    [[nodiscard]] int unit_index(const std::string& id) const;
};

class Simulator {
public:
    Simulator(InitialisedSystem system, SimConfig config, FvbConfig fvb);

    /// Run for `duration_s` applying the given events.
    [[nodiscard]] SimResult run(const std::vector<Event>& events, double duration_s);

    [[nodiscard]] const InitialisedSystem& system() const { return init_; }

private:
    struct StageOutputs;

    InitialisedSystem init_;
    SimConfig config_;
    FvbConfig fvb_;

    // Flattened continuous state layout per unit.
    static constexpr int kStatesPerUnit = 14;

    [[nodiscard]] Eigen::VectorXd pack_states() const;
    void build_topology(const EventEffects& effects);

    std::vector<VscState> states_;
    std::vector<VscSetpoints> setpoints_;
    std::vector<AntiWindup> freezes_;
    std::vector<double> boosts_;
    std::vector<FvbLState> fvb_l_states_;
    std::vector<FvbWacsState> fvb_wacs_states_;
    std::vector<int> pcc_index_;
    std::vector<double> base_ratio_;  // converter rating / system base
    std::vector<double> inertias_;
    NetworkSolver solver_;
    EventEffects active_effects_;
};

}  // namespace gfs
