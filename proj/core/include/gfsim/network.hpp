#pragma once

// Algebraic network solution. The grid's own electromagnetic transients are
// neglected: at every integrator stage the bus voltages follow the injected
// currents through a dense LU factorisation of the active admittance matrix.
// Topology is piecewise constant, so the factorisation is reused between
// event boundaries.

#include <Eigen/Dense>

#include "gfsim/grid.hpp"

namespace gfs {

/// Solve Y v = i once. Verifies the residual to 1e-10 pu.
[[nodiscard]] Eigen::VectorXcd solve_network(const AdmittanceMatrix& ybus,
                                             const Eigen::VectorXcd& injected_currents);

/// Factorised network, reusable across many right-hand sides.
class NetworkSolver {
public:
    NetworkSolver() = default;
    explicit NetworkSolver(const AdmittanceMatrix& ybus) { factor(ybus); }

    void factor(const AdmittanceMatrix& ybus);

    [[nodiscard]] Eigen::VectorXcd solve(const Eigen::VectorXcd& injected_currents) const;

    [[nodiscard]] int size() const { return static_cast<int>(y_.rows()); }
    [[nodiscard]] const std::vector<std::string>& bus_order() const { return bus_order_; }

private:
    Eigen::MatrixXcd y_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    std::vector<std::string> bus_order_;
};

}  // namespace gfs
