#pragma once

// Newton-Raphson power flow in polar coordinates. Used once per study to put
// every dynamic simulation at a true equilibrium.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfsim/grid.hpp"

namespace gfs {

enum class BusKind { Slack, PV, PQ };

/// Scheduled injection at one bus (system pu). Loads modelled as admittances
/// are part of the grid itself and carry no spec here.
struct BusSpec {
    std::string bus;
    BusKind kind = BusKind::PQ;
    double p_pu = 0.0;   // net injection (generation positive)
    double q_pu = 0.0;   // PQ buses only
    double v_pu = 1.0;   // Slack and PV buses
};

struct PowerFlowSolution {
    std::vector<std::string> bus_order;
    Eigen::VectorXd v_pu;
    Eigen::VectorXd theta_rad;
    /// Net complex injection at every bus, system pu, recomputed from Y*V.
    Eigen::VectorXcd injection_pu;

    [[nodiscard]] int index(const std::string& bus) const;
    [[nodiscard]] Complex voltage(const std::string& bus) const;
    /// Injection in MW / MVAr on the grid base.
    [[nodiscard]] Complex injection_mva(const std::string& bus, double base_mva) const;
};

struct PowerFlowOptions {
    double tolerance_pu = 1e-8;
    int max_iterations = 50;
};

class PowerFlowError : public std::runtime_error {
public:
    PowerFlowError(const std::string& what, Eigen::VectorXd mismatch)
        : std::runtime_error(what), final_mismatch(std::move(mismatch)) {}
    Eigen::VectorXd final_mismatch;
};

/// Solve the power flow. Exactly one slack spec is required; buses without a
/// spec are treated as zero-injection PQ buses.
[[nodiscard]] PowerFlowSolution newton_power_flow(const GridModel& grid,
                                                  const std::vector<BusSpec>& specs,
                                                  const PowerFlowOptions& options = {});

/// Freeze ConvertAtPowerFlow loads at their solved voltage magnitudes so the
/// dynamic model's constant admittances reproduce the power-flow operating
/// point.
void freeze_loads(GridModel& grid, const PowerFlowSolution& solution);

/// Complex power balance: total injection minus (series losses + shunt and
/// load consumption - line charging). Near zero at a converged solution.
[[nodiscard]] Complex power_balance_residual(const GridModel& grid,
                                             const PowerFlowSolution& solution);

}  // namespace gfs
