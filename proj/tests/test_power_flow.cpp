#include <catch2/catch_amalgamated.hpp>

#include "gfsim/config.hpp"
#include "gfsim/power_flow.hpp"
#include "gfsim/system.hpp"

#include <complex>

using namespace gfs;
using Catch::Approx;

namespace {

// Independent fixed-point oracle on the same nodal equations: Gauss-Seidel
// current-injection iteration, nothing shared with the Newton path.
Complex gauss_seidel_load_voltage(double x_line, const Complex& s_load, const Complex& v_slack,
                                  int iterations = 200) {
    const Complex y = 1.0 / Complex(0.0, x_line);
    Complex v = v_slack;
    for (int k = 0; k < iterations; ++k) {
        const Complex i_load = std::conj(s_load / v);  // consumption
        v = v_slack - i_load / y;  // v = v1 - z*i
    }
    return v;
}

GridModel toy_grid() {
    GridModel g;
    g.buses = {{"1", 220.0}, {"2", 220.0}};
    g.branches = {{"line", "1", "2", 0.0, 0.1, 0.0, true}};
    g.loads = {{"2", 50.0, 0.0, LoadModel::ConvertAtPowerFlow, 1.0}};
    return g;
}

}  // namespace

TEST_CASE("flat case: no load, no generation", "[powergrid]") {
    GridModel g;
    g.buses = {{"1", 220.0}, {"2", 220.0}, {"3", 220.0}};
    g.branches = {{"a", "1", "2", 0.001, 0.01, 0.0, true},
                  {"b", "2", "3", 0.001, 0.01, 0.0, true}};
    std::vector<BusSpec> specs = {{"1", BusKind::Slack, 0.0, 0.0, 1.02}};
    const auto sol = newton_power_flow(g, specs);
    for (int i = 0; i < 3; ++i) {
        CHECK(sol.v_pu[i] == Approx(1.02).margin(1e-9));
        CHECK(sol.theta_rad[i] == Approx(0.0).margin(1e-10));
    }
}

TEST_CASE("two-bus toy against the Gauss-Seidel oracle", "[powergrid]") {
    GridModel g = toy_grid();
    std::vector<BusSpec> specs = {{"1", BusKind::Slack, 0.0, 0.0, 1.0}};
    const auto sol = newton_power_flow(g, specs);

    const Complex oracle = gauss_seidel_load_voltage(0.1, {0.5, 0.0}, {1.0, 0.0});
    const Complex newton = sol.voltage("2");
    CHECK(std::abs(newton - oracle) < 1e-7);
    // the load bus must actually draw 0.5 pu
    CHECK(sol.injection_pu[sol.index("2")].real() == Approx(-0.5).margin(1e-8));
}

TEST_CASE("loads convert to admittances at the solved voltage", "[powergrid]") {
    GridModel g = toy_grid();
    std::vector<BusSpec> specs = {{"1", BusKind::Slack, 0.0, 0.0, 1.0}};
    const auto sol = newton_power_flow(g, specs);
    freeze_loads(g, sol);
    CHECK(g.loads[0].frozen_v_pu == Approx(sol.v_pu[sol.index("2")]));

    // With the load frozen into Y, the same network state is an exact
    // admittance-solution equilibrium: Y*V reproduces only the slack current.
    const auto ybus = build_ybus(g);
    Eigen::VectorXcd v(2);
    v[ybus.index("1")] = sol.voltage("1");
    v[ybus.index("2")] = sol.voltage("2");
    const Eigen::VectorXcd i = ybus.y * v;
    CHECK(std::abs(i[ybus.index("2")]) < 1e-9);  // no scheduled current at the load bus
}

TEST_CASE("benchmark operating point matches the published dispatch", "[powergrid]") {
    SystemModel system = load_system("kundur_4vsc");
    const auto sol = newton_power_flow(system.grid, bus_specs(system));

    // Slack converter (vsc3): published 642.60 MW / -69.93 MVAr at 0.99 pu.
    const Complex s3 = sol.injection_mva("11", system.grid.base_mva);
    CHECK(s3.real() == Approx(642.60).epsilon(0.05));
    CHECK(s3.imag() == Approx(-69.93).margin(30.0));
    CHECK(sol.v_pu[sol.index("11")] == Approx(0.99));
    CHECK(sol.theta_rad[sol.index("11")] == Approx(0.0).margin(1e-12));

    // PV units: scheduled powers hold, reactive outputs near the published
    // operating point.
    const Complex s1 = sol.injection_mva("5", system.grid.base_mva);
    const Complex s2 = sol.injection_mva("6", system.grid.base_mva);
    const Complex s4 = sol.injection_mva("10", system.grid.base_mva);
    CHECK(s1.real() == Approx(693.0).margin(1e-4));
    CHECK(s2.real() == Approx(693.0).margin(1e-4));
    CHECK(s4.real() == Approx(693.0).margin(1e-4));
    CHECK(s1.imag() == Approx(0.0).margin(30.0));
    CHECK(s2.imag() == Approx(90.0).margin(30.0));
    CHECK(s4.imag() == Approx(180.0).margin(30.0));
}

TEST_CASE("power balance closes at the solution", "[powergrid][property]") {
    SystemModel system = load_system("kundur_4vsc");
    const auto sol = newton_power_flow(system.grid, bus_specs(system));
    const Complex residual = power_balance_residual(system.grid, sol);
    CHECK(std::abs(residual) < 1e-6);

    // every bus satisfies S_i = V_i * conj(sum_j Y_ij V_j)
    const auto ybus = build_ybus(system.grid);
    Eigen::VectorXcd v(ybus.size());
    for (int i = 0; i < ybus.size(); ++i) {
        v[i] = std::polar(sol.v_pu[i], sol.theta_rad[i]);
    }
    const Eigen::VectorXcd s = v.array() * (ybus.y * v).conjugate().array();
    for (int i = 0; i < ybus.size(); ++i) {
        CHECK(std::abs(s[i] - sol.injection_pu[i]) < 1e-8);
    }
}

TEST_CASE("non-convergence carries the mismatch vector", "[powergrid]") {
    GridModel g = toy_grid();
    // impossible loading far beyond the maximum power transfer
    g.loads[0].p_mw = 5000.0;
    std::vector<BusSpec> specs = {{"1", BusKind::Slack, 0.0, 0.0, 1.0}};
    try {
        (void)newton_power_flow(g, specs);
        FAIL("expected non-convergence");
    } catch (const PowerFlowError& e) {
        CHECK(e.final_mismatch.size() > 0);
    }
}

TEST_CASE("spec validation: one slack required", "[powergrid]") {
    GridModel g = toy_grid();
    std::vector<BusSpec> none = {};
    CHECK_THROWS_AS(newton_power_flow(g, none), std::invalid_argument);
    std::vector<BusSpec> two = {{"1", BusKind::Slack, 0.0, 0.0, 1.0},
                                {"2", BusKind::Slack, 0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(newton_power_flow(g, two), std::invalid_argument);
}
