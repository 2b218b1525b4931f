#include "gfsim/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace gfs {

int PowerFlowSolution::index(const std::string& bus) const {
    for (std::size_t i = 0; i < bus_order.size(); ++i) {
        if (bus_order[i] == bus) return static_cast<int>(i);
    }
    throw std::out_of_range("bus '" + bus + "' not in power-flow solution");
}

Complex PowerFlowSolution::voltage(const std::string& bus) const {
    const int i = index(bus);
    return std::polar(v_pu[i], theta_rad[i]);
}

Complex PowerFlowSolution::injection_mva(const std::string& bus, double base_mva) const {
    return injection_pu[index(bus)] * base_mva;
}

PowerFlowSolution newton_power_flow(const GridModel& grid, const std::vector<BusSpec>& specs,
                                    const PowerFlowOptions& options) {
    grid.validate();
    // PQ-modelled loads enter the mismatch equations as scheduled injections;
    // only impedance-frozen loads live inside Y during the solve.
    GridModel pf_grid = grid;
    std::erase_if(pf_grid.loads,
                  [](const Load& l) { return l.model == LoadModel::ConvertAtPowerFlow; });
    const AdmittanceMatrix ybus = build_ybus(pf_grid);
    const int n = ybus.size();

    std::unordered_map<int, BusSpec> spec_at;
    int slack = -1;
    for (const auto& spec : specs) {
        const int i = ybus.index(spec.bus);
        if (spec_at.count(i)) {
            throw std::invalid_argument("duplicate bus spec for '" + spec.bus + "'");
        }
        spec_at[i] = spec;
        if (spec.kind == BusKind::Slack) {
            if (slack >= 0) throw std::invalid_argument("more than one slack bus");
            slack = i;
        }
    }
    if (slack < 0) throw std::invalid_argument("no slack bus specified");
    for (const auto& load : grid.loads) {
        if (load.model != LoadModel::ConvertAtPowerFlow) continue;
        const int i = ybus.index(load.bus);
        auto it = spec_at.find(i);
        if (it == spec_at.end()) {
            BusSpec pq;
            pq.bus = load.bus;
            pq.kind = BusKind::PQ;
            spec_at[i] = pq;
            it = spec_at.find(i);
        }
        it->second.p_pu -= load.p_mw / grid.base_mva;
        it->second.q_pu -= load.q_mvar / grid.base_mva;
    }

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q_spec = Eigen::VectorXd::Zero(n);
    std::vector<int> ang_idx, mag_idx;
    for (int i = 0; i < n; ++i) {
        auto it = spec_at.find(i);
        const BusKind kind = (it == spec_at.end()) ? BusKind::PQ : it->second.kind;
        if (it != spec_at.end()) {
            p_spec[i] = it->second.p_pu;
            q_spec[i] = it->second.q_pu;
            if (kind != BusKind::PQ) v[i] = it->second.v_pu;
        }
        if (kind != BusKind::Slack) ang_idx.push_back(i);
        if (kind == BusKind::PQ) mag_idx.push_back(i);
    }

    const Eigen::MatrixXd g = ybus.y.real();
    const Eigen::MatrixXd b = ybus.y.imag();
    const int m = static_cast<int>(ang_idx.size() + mag_idx.size());

    Eigen::VectorXd p_calc(n), q_calc(n), mismatch(m);
    auto evaluate = [&]() {
        Eigen::VectorXcd vc(n);
        for (int i = 0; i < n; ++i) vc[i] = std::polar(v[i], theta[i]);
        Eigen::VectorXcd s = vc.array() * (ybus.y * vc).conjugate().array();
        p_calc = s.real();
        q_calc = s.imag();
        int row = 0;
        for (int i : ang_idx) mismatch[row++] = p_spec[i] - p_calc[i];
        for (int i : mag_idx) mismatch[row++] = q_spec[i] - q_calc[i];
    };

    evaluate();
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (mismatch.lpNorm<Eigen::Infinity>() < options.tolerance_pu) break;

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
        const int na = static_cast<int>(ang_idx.size());
        for (int r = 0; r < na; ++r) {
            const int i = ang_idx[r];
            for (int c = 0; c < na; ++c) {
                const int j = ang_idx[c];
                if (i == j) {
                    jac(r, c) = -q_calc[i] - b(i, i) * v[i] * v[i];
                } else {
                    const double tij = theta[i] - theta[j];
                    jac(r, c) = v[i] * v[j] * (g(i, j) * std::sin(tij) - b(i, j) * std::cos(tij));
                }
            }
            for (std::size_t c = 0; c < mag_idx.size(); ++c) {
                const int j = mag_idx[c];
                if (i == j) {
                    jac(r, na + static_cast<int>(c)) = p_calc[i] / v[i] + g(i, i) * v[i];
                } else {
                    const double tij = theta[i] - theta[j];
                    jac(r, na + static_cast<int>(c)) =
                        v[i] * (g(i, j) * std::cos(tij) + b(i, j) * std::sin(tij));
                }
            }
        }
        for (std::size_t rq = 0; rq < mag_idx.size(); ++rq) {
            const int i = mag_idx[rq];
            const int r = na + static_cast<int>(rq);
            for (int c = 0; c < na; ++c) {
                const int j = ang_idx[c];
                if (i == j) {
                    jac(r, c) = p_calc[i] - g(i, i) * v[i] * v[i];
                } else {
                    const double tij = theta[i] - theta[j];
                    jac(r, c) = -v[i] * v[j] * (g(i, j) * std::cos(tij) + b(i, j) * std::sin(tij));
                }
            }
            for (std::size_t c = 0; c < mag_idx.size(); ++c) {
                const int j = mag_idx[c];
                if (i == j) {
                    jac(r, na + static_cast<int>(c)) = q_calc[i] / v[i] - b(i, i) * v[i];
                } else {
                    const double tij = theta[i] - theta[j];
                    jac(r, na + static_cast<int>(c)) =
                        v[i] * (g(i, j) * std::sin(tij) - b(i, j) * std::cos(tij));
                }
            }
        }

        Eigen::VectorXd dx = jac.partialPivLu().solve(mismatch);
        if (!dx.allFinite()) {
            throw PowerFlowError("power flow Jacobian is singular", mismatch);
        }
        int row = 0;
        for (int i : ang_idx) theta[i] += dx[row++];
        for (int i : mag_idx) v[i] += dx[row++];
        evaluate();
    }
    if (mismatch.lpNorm<Eigen::Infinity>() >= options.tolerance_pu) {
        throw PowerFlowError("power flow did not converge in " +
                                 std::to_string(options.max_iterations) + " iterations",
                             mismatch);
    }

    PowerFlowSolution out;
    out.bus_order = ybus.bus_order;
    out.v_pu = v;
    out.theta_rad = theta;
    Eigen::VectorXcd vc(n);
    for (int i = 0; i < n; ++i) vc[i] = std::polar(v[i], theta[i]);
    out.injection_pu = vc.array() * (ybus.y * vc).conjugate().array();
    return out;
}

void freeze_loads(GridModel& grid, const PowerFlowSolution& solution) {
    for (auto& load : grid.loads) {
        if (load.model == LoadModel::ConvertAtPowerFlow) {
            load.frozen_v_pu = solution.v_pu[solution.index(load.bus)];
        }
    }
}

Complex power_balance_residual(const GridModel& grid, const PowerFlowSolution& solution) {
    auto vat = [&](const std::string& bus) { return solution.voltage(bus); };
    Complex consumed = 0.0;
    for (const auto& br : grid.branches) {
        if (!br.in_service) continue;
        const Complex vf = vat(br.from);
        const Complex vt = vat(br.to);
        const Complex y_series = 1.0 / Complex(br.r_pu, br.x_pu);
        const Complex y_shunt(0.0, br.b_pu / 2.0);
        const Complex i_from = y_series * (vf - vt) + y_shunt * vf;
        const Complex i_to = y_series * (vt - vf) + y_shunt * vt;
        consumed += vf * std::conj(i_from) + vt * std::conj(i_to);
    }
    for (const auto& load : grid.loads) {
        const Complex vb = vat(load.bus);
        consumed += std::norm(vb) * std::conj(load_admittance(load, grid.base_mva));
    }
    for (const auto& sh : grid.shunts) {
        const Complex vb = vat(sh.bus);
        const Complex y(sh.g_mw / grid.base_mva, sh.q_mvar / grid.base_mva);
        consumed += std::norm(vb) * std::conj(y);
    }
    return solution.injection_pu.sum() - consumed;
}

}  // namespace gfs
