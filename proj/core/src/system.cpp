#include "gfsim/system.hpp"

#include <stdexcept>
#include <unordered_set>

namespace gfs {

void SystemModel::validate() const {
    grid.validate();
    if (units.empty()) throw std::invalid_argument("system has no converters");
    std::unordered_set<std::string> ids;
    int slacks = 0;
    for (const auto& unit : units) {
        if (!ids.insert(unit.id).second) {
            throw std::invalid_argument("duplicate converter id '" + unit.id + "'");
        }
        (void)grid.bus_index(unit.bus);  // throws on unknown bus
        unit.params.validate();
        if (unit.role == BusKind::Slack) ++slacks;
    }
    if (slacks != 1) {
        throw std::invalid_argument("exactly one converter must be the slack, found " +
                                    std::to_string(slacks));
    }
    for (const auto& fault : faults) {
        (void)grid.bus_index(fault.bus);
        if (!fault.trip_branch.empty() && grid.find_branch(fault.trip_branch) == nullptr) {
            throw std::invalid_argument("fault '" + fault.name + "' trips unknown branch '" +
                                        fault.trip_branch + "'");
        }
    }
}

const ConverterUnit* SystemModel::find_unit(const std::string& id) const {
    for (const auto& u : units) {
        if (u.id == id) return &u;
    }
    return nullptr;
}

const FaultSpec* SystemModel::find_fault(const std::string& name) const {
    for (const auto& f : faults) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

std::vector<BusSpec> bus_specs(const SystemModel& system) {
    std::vector<BusSpec> specs;
    specs.reserve(system.units.size());
    for (const auto& unit : system.units) {
        BusSpec spec;
        spec.bus = unit.bus;
        spec.kind = unit.role;
        spec.p_pu = unit.p_mw / system.grid.base_mva;
        spec.q_pu = unit.q_mvar / system.grid.base_mva;
        spec.v_pu = unit.v_pu;
        specs.push_back(spec);
    }
    return specs;
}

InitialisedSystem initialise_system(SystemModel system, const PowerFlowOptions& options) {
    system.validate();
    InitialisedSystem out;
    out.power_flow = newton_power_flow(system.grid, bus_specs(system), options);
    freeze_loads(system.grid, out.power_flow);

    for (const auto& unit : system.units) {
        const Complex v_g = out.power_flow.voltage(unit.bus);
        Complex s_sys = out.power_flow.injection_pu[out.power_flow.index(unit.bus)];
        // A PQ load sharing the PCC bus is part of the bus injection; the
        // converter supplies the remainder.
        for (const auto& load : system.grid.loads) {
            if (load.bus == unit.bus && load.model == LoadModel::ConvertAtPowerFlow) {
                s_sys += Complex(load.p_mw, load.q_mvar) / system.grid.base_mva;
            }
        }
        const Complex s_conv = s_sys * (system.grid.base_mva / unit.params.rated_mva);
        out.units.push_back(init_from_powerflow(v_g, s_conv, unit.params));
    }
    out.system = std::move(system);
    return out;
}

}  // namespace gfs
