#pragma once

// A study system: the network plus the converter fleet attached to it, and
// the named fault catalog that scenarios refer to.

#include <string>
#include <vector>

#include "gfsim/grid.hpp"
#include "gfsim/power_flow.hpp"
#include "gfsim/vsc.hpp"

namespace gfs {

struct ConverterUnit {
    std::string id;
    std::string bus;
    VscParams params;
    // Power-flow role of the PCC bus.
    BusKind role = BusKind::PV;
    double p_mw = 0.0;
    double v_pu = 1.0;
    double q_mvar = 0.0;
};

/// Named fault: a shunt applied at `bus`, optionally cleared by also
/// disconnecting `trip_branch`.
struct FaultSpec {
    std::string name;
    std::string bus;
    std::string trip_branch;  // empty: clearing only removes the shunt
};

struct SystemModel {
    std::string name;
    GridModel grid;
    std::vector<ConverterUnit> units;
    std::vector<FaultSpec> faults;

    void validate() const;
    [[nodiscard]] const ConverterUnit* find_unit(const std::string& id) const;
    [[nodiscard]] const FaultSpec* find_fault(const std::string& name) const;
};

[[nodiscard]] std::vector<BusSpec> bus_specs(const SystemModel& system);

/// System with its power flow solved, loads frozen and every converter
/// initialised at the resulting equilibrium.
struct InitialisedSystem {
    SystemModel system;
    PowerFlowSolution power_flow;
    std::vector<VscInit> units;
};

[[nodiscard]] InitialisedSystem initialise_system(SystemModel system,
                                                  const PowerFlowOptions& options = {});

}  // namespace gfs
