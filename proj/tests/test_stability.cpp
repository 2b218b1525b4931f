#include <catch2/catch_amalgamated.hpp>

#include "gfsim/config.hpp"
#include "gfsim/stability.hpp"

#include <cmath>

using namespace gfs;
using Catch::Approx;

namespace {

SimResult synthetic_two_machine(double ramp_rate_deg_s, double t_end, double dt) {
    SimResult r;
    r.unit_ids = {"a", "b"};
    r.step_s = dt;
    r.delta_rad.assign(2, {});
    r.domega_pu.assign(2, {});
    for (double t = 0.0; t <= t_end + 1e-12; t += dt) {
        r.time_s.push_back(t);
        r.delta_rad[0].push_back(ramp_rate_deg_s * t * std::numbers::pi / 180.0);
        r.delta_rad[1].push_back(0.0);
    }
    return r;
}

const InitialisedSystem& benchmark() {
    static const InitialisedSystem init = initialise_system(load_system("kundur_4vsc"));
    return init;
}

}  // namespace

TEST_CASE("small separations are stable", "[stability]") {
    const SimResult r = synthetic_two_machine(10.0, 2.9, 0.01);  // peaks at 29 deg
    const Verdict v = detect_loss_of_sync(r);
    CHECK(v.stable);
    CHECK_FALSE(v.los_time_s.has_value());
}

TEST_CASE("ramp through 181 degrees flags loss of synchronism at the crossing",
          "[stability]") {
    // 90.5 deg/s ramp: the first recorded sample beyond 180 deg is the one
    // at t = 2.0, where the trace reads 181 deg
    const SimResult r = synthetic_two_machine(90.5, 4.0, 0.1);
    const Verdict v = detect_loss_of_sync(r);
    CHECK_FALSE(v.stable);
    REQUIRE(v.los_time_s.has_value());
    CHECK(*v.los_time_s == Approx(2.0).margin(1e-9));
}

TEST_CASE("bisection finds a synthetic threshold in few probes", "[stability]") {
    int probes = 0;
    auto oracle = [&](double clearing) {
        ++probes;
        return clearing <= 0.27 + 1e-12;
    };
    CctOptions opt;  // t_max 1.5, resolution 10 ms
    opt.sweep_radius = 0;
    const CctCell cell = compute_cct(oracle, opt);
    REQUIRE(cell.cct_s.has_value());
    CHECK(*cell.cct_s == Approx(0.27));
    CHECK(probes <= 8);
    CHECK_FALSE(cell.censored);
    CHECK_FALSE(cell.non_monotone);
}

TEST_CASE("bisection probe budget holds for any threshold", "[stability][property]") {
    const int budget = static_cast<int>(std::ceil(std::log2(1.5 / 0.01))) + 1;  // 9
    for (double threshold : {0.0, 0.005, 0.01, 0.13, 0.42, 0.88, 1.49, 1.5, 2.0}) {
        int probes = 0;
        auto oracle = [&](double clearing) {
            ++probes;
            return clearing <= threshold + 1e-12;
        };
        CctOptions opt;
        opt.sweep_radius = 0;
        const CctCell cell = compute_cct(oracle, opt);
        INFO("threshold " << threshold);
        CHECK(probes <= budget);
        if (threshold >= 1.5) {
            CHECK(cell.censored);
        } else {
            REQUIRE(cell.cct_s.has_value());
            CHECK(*cell.cct_s == Approx(std::floor(threshold / 0.01 + 1e-9) * 0.01));
        }
    }
}

TEST_CASE("censoring requires every probe stable", "[stability]") {
    std::vector<double> probed;
    auto oracle = [&](double clearing) {
        probed.push_back(clearing);
        return true;
    };
    const CctCell cell = compute_cct(oracle, {});
    CHECK(cell.censored);
    CHECK(*cell.cct_s == Approx(1.5));
    for (const auto& p : cell.trace) CHECK(p.stable);
}

TEST_CASE("instant clearing failure yields no critical time", "[stability]") {
    auto oracle = [&](double) { return false; };
    const CctCell cell = compute_cct(oracle, {});
    CHECK_FALSE(cell.cct_s.has_value());
}

TEST_CASE("non-monotone verdicts are flagged by the sweep", "[stability]") {
    // stable up to 0.30 except for a hole at 0.28
    auto oracle = [&](double clearing) {
        if (std::abs(clearing - 0.28) < 1e-9) return false;
        return clearing <= 0.30 + 1e-12;
    };
    CctOptions opt;
    opt.sweep_radius = 2;
    const CctCell cell = compute_cct(oracle, opt);
    CHECK(cell.non_monotone);
}

TEST_CASE("zero-duration fault leaves the trajectory at equilibrium", "[stability]") {
    const SystemModel system = load_system("kundur_4vsc");
    FaultScenario sc = make_scenario(system, "fault2", 0.0);
    SimConfig cfg;
    cfg.decimation = 100;
    cfg.horizon_s = 1.0;
    const SimResult r = run_scenario(benchmark(), sc, cfg, {});
    CHECK(detect_loss_of_sync(r).stable);
    for (std::size_t i = 0; i < r.unit_ids.size(); ++i) {
        CHECK(std::abs(r.v_g_pu[i].back() - r.v_g_pu[i].front()) < 1e-3);
        CHECK(std::abs(r.domega_pu[i].back()) < 1e-4);
    }
}

TEST_CASE("headline scenario: 150 ms fault I", "[stability]") {
    const SystemModel system = load_system("kundur_4vsc");
    const FaultScenario sc = make_scenario(system, "fault1", 0.15);
    SimConfig cfg;
    cfg.decimation = 1000;

    FvbConfig base;
    const Verdict v_base = detect_loss_of_sync(run_scenario(benchmark(), sc, cfg, base));
    CHECK_FALSE(v_base.stable);

    FvbConfig local;
    local.strategy = Strategy::FvbL;
    const Verdict v_local = detect_loss_of_sync(run_scenario(benchmark(), sc, cfg, local));
    CHECK(v_local.stable);

    FvbConfig wacs;
    wacs.strategy = Strategy::FvbWacs;
    const Verdict v_wacs = detect_loss_of_sync(run_scenario(benchmark(), sc, cfg, wacs));
    CHECK(v_wacs.stable);
}

TEST_CASE("verdict does not depend on the recording decimation",
          "[stability][property]") {
    const SystemModel system = load_system("kundur_4vsc");
    const FaultScenario sc = make_scenario(system, "fault1", 0.15);
    Verdict verdicts[2];
    int decimations[2] = {1, 10000};
    for (int c = 0; c < 2; ++c) {
        SimConfig cfg;
        cfg.decimation = decimations[c];
        verdicts[c] = detect_loss_of_sync(run_scenario(benchmark(), sc, cfg, {}));
    }
    CHECK(verdicts[0].stable == verdicts[1].stable);
    REQUIRE(verdicts[0].los_time_s.has_value());
    REQUIRE(verdicts[1].los_time_s.has_value());
    CHECK(*verdicts[0].los_time_s == *verdicts[1].los_time_s);
}

TEST_CASE("matrix cell agrees with a direct search", "[stability]") {
    const SystemModel system = load_system("kundur_4vsc");
    SimConfig cfg;
    CctOptions opt;
    opt.t_max_s = 0.3;
    opt.sweep_radius = 0;

    std::vector<StrategyConfig> configs = {{"base", {}}};
    const CctReport report = cct_matrix(system, {"fault3"}, configs, cfg, opt, 1);
    REQUIRE(report.cells.size() == 1);

    SimConfig probe_cfg = cfg;
    probe_cfg.stop_at_separation = true;
    probe_cfg.decimation = 100000;
    auto stable_at = [&](double clearing) {
        const FaultScenario sc = make_scenario(system, "fault3", clearing);
        return detect_loss_of_sync(run_scenario(benchmark(), sc, probe_cfg, {})).stable;
    };
    const CctCell direct = compute_cct(stable_at, opt);
    REQUIRE(report.cells[0].cct_s.has_value());
    REQUIRE(direct.cct_s.has_value());
    CHECK(*report.cells[0].cct_s == *direct.cct_s);
}

TEST_CASE("matrix execution is deterministic across thread counts",
          "[stability][property]") {
    const SystemModel system = load_system("kundur_4vsc");
    SimConfig cfg;
    CctOptions opt;
    opt.t_max_s = 0.3;
    opt.sweep_radius = 0;
    std::vector<StrategyConfig> configs = {{"base", {}}};
    {
        StrategyConfig c;
        c.label = "fvb-l";
        c.fvb.strategy = Strategy::FvbL;
        configs.push_back(c);
    }
    const CctReport a = cct_matrix(system, {"fault3"}, configs, cfg, opt, 1);
    const CctReport b = cct_matrix(system, {"fault3"}, configs, cfg, opt, 2);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].fault == b.cells[k].fault);
        CHECK(a.cells[k].config_label == b.cells[k].config_label);
        REQUIRE(a.cells[k].cct_s.has_value() == b.cells[k].cct_s.has_value());
        if (a.cells[k].cct_s) CHECK(*a.cells[k].cct_s == *b.cells[k].cct_s);
        REQUIRE(a.cells[k].trace.size() == b.cells[k].trace.size());
        for (std::size_t p = 0; p < a.cells[k].trace.size(); ++p) {
            CHECK(a.cells[k].trace[p].stable == b.cells[k].trace[p].stable);
        }
    }
}

TEST_CASE("unknown faults are rejected", "[stability]") {
    const SystemModel system = load_system("kundur_4vsc");
    CHECK_THROWS_AS(make_scenario(system, "fault9", 0.1), std::invalid_argument);
    CHECK_THROWS_AS(cct_matrix(system, {"fault9"}, standard_strategy_set(), {}, {}, 1),
                    std::invalid_argument);
}
