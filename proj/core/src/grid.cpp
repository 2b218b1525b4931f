#include "gfsim/grid.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace gfs {

int GridModel::bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) return static_cast<int>(i);
    }
    throw std::out_of_range("unknown bus '" + id + "'");
}

const Branch* GridModel::find_branch(const std::string& id) const {
    for (const auto& br : branches) {
        if (br.id == id) return &br;
    }
    return nullptr;
}

namespace {

// Buses not reachable from bus 0 over the given adjacency.
std::vector<std::string> unreachable_buses(const GridModel& grid,
                                           const std::set<std::string>& branches_out) {
    if (grid.buses.empty()) return {};
    std::unordered_map<std::string, std::vector<std::string>> adj;
    for (const auto& br : grid.branches) {
        if (!br.in_service || branches_out.count(br.id)) continue;
        adj[br.from].push_back(br.to);
        adj[br.to].push_back(br.from);
    }
    std::unordered_set<std::string> seen;
    std::queue<std::string> work;
    work.push(grid.buses.front().id);
    seen.insert(grid.buses.front().id);
    while (!work.empty()) {
        const std::string bus = work.front();
        work.pop();
        for (const auto& next : adj[bus]) {
            if (seen.insert(next).second) work.push(next);
        }
    }
    std::vector<std::string> isolated;
    for (const auto& bus : grid.buses) {
        if (!seen.count(bus.id)) isolated.push_back(bus.id);
    }
    return isolated;
}

}  // namespace

void GridModel::validate() const {
    if (buses.empty()) throw std::invalid_argument("grid has no buses");
    std::unordered_set<std::string> ids;
    for (const auto& bus : buses) {
        if (!ids.insert(bus.id).second) {
            throw std::invalid_argument("duplicate bus id '" + bus.id + "'");
        }
    }
    std::unordered_set<std::string> branch_ids;
    for (const auto& br : branches) {
        if (!branch_ids.insert(br.id).second) {
            throw std::invalid_argument("duplicate branch id '" + br.id + "'");
        }
        if (!ids.count(br.from) || !ids.count(br.to)) {
            throw std::invalid_argument("branch '" + br.id + "' references unknown bus");
        }
        if (br.r_pu == 0.0 && br.x_pu == 0.0) {
            throw std::invalid_argument("branch '" + br.id + "' has zero impedance");
        }
    }
    for (const auto& load : loads) {
        if (!ids.count(load.bus)) {
            throw std::invalid_argument("load references unknown bus '" + load.bus + "'");
        }
    }
    for (const auto& sh : shunts) {
        if (!ids.count(sh.bus)) {
            throw std::invalid_argument("shunt references unknown bus '" + sh.bus + "'");
        }
    }
    if (base_mva <= 0.0 || frequency_hz <= 0.0) {
        throw std::invalid_argument("system base and frequency must be positive");
    }
    auto isolated = unreachable_buses(*this, {});
    if (!isolated.empty()) {
        std::ostringstream msg;
        msg << "grid is not connected; isolated buses:";
        for (const auto& b : isolated) msg << ' ' << b;
        throw std::invalid_argument(msg.str());
    }
}

Complex load_admittance(const Load& load, double base_mva) {
    const double v2 = load.frozen_v_pu * load.frozen_v_pu;
    if (v2 <= 0.0) throw std::invalid_argument("load frozen voltage must be positive");
    const Complex s_pu(load.p_mw / base_mva, load.q_mvar / base_mva);
    return std::conj(s_pu) / v2;
}

Eigen::Matrix2cd branch_stamp(const Branch& branch) {
    const Complex z(branch.r_pu, branch.x_pu);
    const Complex y_series = 1.0 / z;
    const Complex y_shunt(0.0, branch.b_pu / 2.0);
    Eigen::Matrix2cd stamp;
    stamp << y_series + y_shunt, -y_series, -y_series, y_series + y_shunt;
    return stamp;
}

int AdmittanceMatrix::index(const std::string& bus) const {
    for (std::size_t i = 0; i < bus_order.size(); ++i) {
        if (bus_order[i] == bus) return static_cast<int>(i);
    }
    throw std::out_of_range("bus '" + bus + "' not in admittance matrix");
}

AdmittanceMatrix build_ybus(const GridModel& grid, const EventEffects& effects) {
    for (const auto& id : effects.branches_out) {
        if (grid.find_branch(id) == nullptr) {
            throw std::invalid_argument("event trips unknown branch '" + id + "'");
        }
    }
    auto isolated = unreachable_buses(grid, effects.branches_out);
    if (!isolated.empty()) {
        std::ostringstream msg;
        msg << "islanding: event removal isolates buses:";
        for (const auto& b : isolated) msg << ' ' << b;
        throw std::runtime_error(msg.str());
    }

    AdmittanceMatrix out;
    out.bus_order.reserve(grid.buses.size());
    for (const auto& bus : grid.buses) out.bus_order.push_back(bus.id);
    const int n = out.size();
    out.y = Eigen::MatrixXcd::Zero(n, n);

    for (const auto& br : grid.branches) {
        if (!br.in_service || effects.branches_out.count(br.id)) continue;
        const int i = grid.bus_index(br.from);
        const int j = grid.bus_index(br.to);
        const Eigen::Matrix2cd stamp = branch_stamp(br);
        out.y(i, i) += stamp(0, 0);
        out.y(i, j) += stamp(0, 1);
        out.y(j, i) += stamp(1, 0);
        out.y(j, j) += stamp(1, 1);
    }
    for (const auto& load : grid.loads) {
        const int i = grid.bus_index(load.bus);
        out.y(i, i) += load_admittance(load, grid.base_mva);
    }
    for (const auto& sh : grid.shunts) {
        const int i = grid.bus_index(sh.bus);
        // S = |V|^2 conj(y): susceptance +q/base injects q_mvar at 1 pu.
        out.y(i, i) += Complex(sh.g_mw / grid.base_mva, sh.q_mvar / grid.base_mva);
    }
    for (const auto& [bus, y_fault] : effects.fault_admittance) {
        const int i = grid.bus_index(bus);
        out.y(i, i) += y_fault;
    }
    return out;
}

}  // namespace gfs
