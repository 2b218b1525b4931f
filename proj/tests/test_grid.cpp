#include <catch2/catch_amalgamated.hpp>

#include "gfsim/config.hpp"
#include "gfsim/grid.hpp"
#include "gfsim/network.hpp"

using namespace gfs;
using Catch::Approx;

namespace {

GridModel two_bus(double r, double x, double b) {
    GridModel g;
    g.buses = {{"a", 220.0}, {"b", 220.0}};
    g.branches = {{"ab", "a", "b", r, x, b, true}};
    return g;
}

}  // namespace

TEST_CASE("two-bus admittance matrix", "[powergrid]") {
    // series admittance y, no shunt: [[y, -y], [-y, y]]
    const GridModel g = two_bus(0.0, 0.1, 0.0);
    const auto ybus = build_ybus(g);
    const Complex y = 1.0 / Complex(0.0, 0.1);
    CHECK(std::abs(ybus.y(0, 0) - y) < 1e-14);
    CHECK(std::abs(ybus.y(0, 1) + y) < 1e-14);
    CHECK(std::abs(ybus.y(1, 0) + y) < 1e-14);
    CHECK(std::abs(ybus.y(1, 1) - y) < 1e-14);

    // adding line charging b puts j*b/2 on each diagonal
    const auto ybus_b = build_ybus(two_bus(0.0, 0.1, 0.04));
    CHECK(std::abs(ybus_b.y(0, 0) - (y + Complex(0.0, 0.02))) < 1e-14);
    CHECK(std::abs(ybus_b.y(0, 1) + y) < 1e-14);
}

TEST_CASE("fault shunt lands on the diagonal", "[powergrid]") {
    const GridModel g = two_bus(0.001, 0.1, 0.0);
    EventEffects effects;
    effects.fault_admittance["b"] = Complex(1e4, -1e4);
    const auto base = build_ybus(g);
    const auto faulted = build_ybus(g, effects);
    CHECK(std::abs(faulted.y(1, 1) - base.y(1, 1) - Complex(1e4, -1e4)) < 1e-9);
    CHECK(std::abs(faulted.y(0, 0) - base.y(0, 0)) == 0.0);
    CHECK(std::abs(faulted.y(0, 1) - base.y(0, 1)) == 0.0);
}

TEST_CASE("ybus equals the sum of branch stamps and stays symmetric",
          "[powergrid][property]") {
    const SystemModel system = load_system("kundur_4vsc");
    const GridModel& g = system.grid;
    auto ybus = build_ybus(g);

    // strip loads and shunts to isolate the branch contribution
    GridModel branches_only = g;
    branches_only.loads.clear();
    branches_only.shunts.clear();
    auto ybranch = build_ybus(branches_only);

    Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(ybus.size(), ybus.size());
    for (const auto& br : g.branches) {
        const auto stamp = branch_stamp(br);
        const int i = g.bus_index(br.from);
        const int j = g.bus_index(br.to);
        rebuilt(i, i) += stamp(0, 0);
        rebuilt(i, j) += stamp(0, 1);
        rebuilt(j, i) += stamp(1, 0);
        rebuilt(j, j) += stamp(1, 1);
    }
    CHECK((ybranch.y - rebuilt).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ybus.y - ybus.y.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("removing and re-adding a branch restores ybus bit-exactly", "[powergrid]") {
    const SystemModel system = load_system("kundur_4vsc");
    const auto before = build_ybus(system.grid);
    EventEffects trip;
    trip.branches_out.insert("line7-8a");
    const auto without = build_ybus(system.grid, trip);
    CHECK((without.y - before.y).cwiseAbs().maxCoeff() > 0.0);
    const auto restored = build_ybus(system.grid);
    REQUIRE(restored.y.rows() == before.y.rows());
    for (int i = 0; i < before.y.rows(); ++i) {
        for (int j = 0; j < before.y.cols(); ++j) {
            CHECK(restored.y(i, j).real() == before.y(i, j).real());
            CHECK(restored.y(i, j).imag() == before.y(i, j).imag());
        }
    }
}

TEST_CASE("islanding is reported with the isolated buses", "[powergrid]") {
    const SystemModel system = load_system("kundur_4vsc");
    EventEffects split;
    split.branches_out.insert("line7-8a");
    split.branches_out.insert("line7-8b");
    try {
        (void)build_ybus(system.grid, split);
        FAIL("expected islanding error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("islanding") != std::string::npos);
        CHECK(msg.find('8') != std::string::npos);
        CHECK(msg.find('9') != std::string::npos);
    }
}

TEST_CASE("network solve identity and hand-checked cases", "[powergrid]") {
    AdmittanceMatrix eye;
    eye.bus_order = {"a", "b"};
    eye.y = Eigen::MatrixXcd::Identity(2, 2);
    Eigen::VectorXcd i(2);
    i << Complex(1.0, 0.0), Complex(0.0, 0.0);
    const auto v = solve_network(eye, i);
    CHECK(std::abs(v[0] - Complex(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(v[1]) < 1e-14);

    // A pure series branch with no shunt has no voltage reference: the
    // nodal matrix is singular and the solver must say so.
    const auto singular = build_ybus(two_bus(0.0, 0.1, 0.0));
    Eigen::VectorXcd inj(2);
    inj << Complex(0.0, 10.0), Complex(0.0, 0.0);
    CHECK_THROWS_AS(solve_network(singular, inj), std::runtime_error);

    // Grounding the line through its charging restores a unique solution;
    // with equal injections both ends sit at the same voltage.
    const auto grounded = build_ybus(two_bus(0.0, 0.1, 0.2));
    Eigen::VectorXcd balanced(2);
    balanced << Complex(0.0, 0.1), Complex(0.0, 0.1);
    const auto v2 = solve_network(grounded, balanced);
    CHECK(std::abs(v2[0] - v2[1]) < 1e-12);
    CHECK(std::abs(v2[0] - Complex(1.0, 0.0)) < 1e-12);  // j0.1 into j0.1 shunt
    CHECK((grounded.y * v2 - balanced).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("network residual identity on the benchmark", "[powergrid][property]") {
    const SystemModel system = load_system("kundur_4vsc");
    const auto ybus = build_ybus(system.grid);
    Eigen::VectorXcd inj = Eigen::VectorXcd::Zero(ybus.size());
    inj[ybus.index("5")] = Complex(6.2, -0.4);
    inj[ybus.index("11")] = Complex(5.9, 0.7);
    const auto v = solve_network(ybus, inj);
    CHECK((ybus.y * v - inj).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("grid validation catches structural errors", "[powergrid]") {
    GridModel g = two_bus(0.0, 0.1, 0.0);
    g.loads.push_back({"nope", 10.0, 1.0, LoadModel::ImpedanceAtNominal, 1.0});
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    GridModel dup = two_bus(0.0, 0.1, 0.0);
    dup.buses.push_back({"a", 220.0});
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}
