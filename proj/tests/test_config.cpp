#include <catch2/catch_amalgamated.hpp>

#include "gfsim/config.hpp"

#include <cstdio>
#include <fstream>

using namespace gfs;
using Catch::Approx;

TEST_CASE("bundled benchmark carries the study defaults", "[config]") {
    const SystemModel system = load_system("kundur_4vsc");
    REQUIRE(system.units.size() == 4);
    CHECK(system.find_unit("vsc1")->params.inertia_s == 4.5);
    CHECK(system.find_unit("vsc2")->params.inertia_s == 4.5);
    CHECK(system.find_unit("vsc3")->params.inertia_s == 4.175);
    CHECK(system.find_unit("vsc4")->params.inertia_s == 6.175);
    for (const auto& unit : system.units) {
        CHECK(unit.params.damping_pu == 20.0);
        CHECK(unit.params.i_max == 1.25);
        CHECK(unit.params.m_max == 1.31);
        CHECK(unit.params.kp_v == 0.52);
        CHECK(unit.params.ki_v == 1.16);
        CHECK(unit.params.kp_i == 0.73);
        CHECK(unit.params.ki_i == 1.19);
        CHECK(unit.params.r_vr == 0.09);
        CHECK(unit.params.t_vr == 0.0167);
    }
    CHECK(system.find_unit("vsc3")->role == BusKind::Slack);
    CHECK(system.find_unit("vsc3")->v_pu == 0.99);
    REQUIRE(system.faults.size() == 4);
    CHECK(system.find_fault("fault1")->trip_branch == "line7-8a");
    CHECK(system.find_fault("fault2")->trip_branch.empty());
}

TEST_CASE("manifest defaults and round trip", "[config]") {
    const RunManifest defaults;
    const RunManifest parsed = parse_run_config(emit_run_config(defaults));
    CHECK(parsed == defaults);

    RunManifest changed;
    changed.strategy = Strategy::FvbWacs;
    changed.delay_ms = 100.0;
    changed.clear_ms = 210.0;
    changed.fvb_l.v_pickup = 0.5;
    changed.vsc_overrides["vsc3"]["inertia_s"] = 6.175;
    changed.out_dir = "results";
    const RunManifest back = parse_run_config(emit_run_config(changed));
    CHECK(back == changed);
    CHECK(back.vsc_overrides.at("vsc3").at("inertia_s") == 6.175);
}

TEST_CASE("booster override reaches the controller configuration", "[config]") {
    RunManifest manifest;
    apply_setting(manifest, "fvb_l.pickup_voltage_pu=0.5");
    apply_setting(manifest, "strategy=fvb-l");
    const FvbConfig fvb = make_fvb_config(manifest);
    CHECK(fvb.strategy == Strategy::FvbL);
    CHECK(fvb.local.v_pickup == 0.5);
}

TEST_CASE("unknown and malformed keys are rejected with line numbers", "[config]") {
    try {
        (void)parse_run_config("step_us = 100\nnot_a_key = 3\n");
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(e.line_number == 2);
        CHECK(std::string(e.what()).find("not_a_key") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config("clear_ms = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("clear_ms = 100\nclear_ms = 120\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("vsc.vsc1.bogus_field = 1\n"), ConfigError);
    RunManifest manifest;
    CHECK_THROWS_AS(apply_setting(manifest, "no_equals_sign"), ConfigError);
}

TEST_CASE("communication delay must align with the step", "[config]") {
    RunManifest manifest;
    manifest.strategy = Strategy::FvbWacs;
    manifest.step_us = 100.0;
    manifest.delay_ms = 75.0;
    CHECK_NOTHROW(make_fvb_config(manifest));
    manifest.delay_ms = 75.0005;
    CHECK_THROWS_AS(make_fvb_config(manifest), std::invalid_argument);
}

TEST_CASE("manifest hash is stable and sensitive", "[config]") {
    const RunManifest a;
    RunManifest b;
    CHECK(manifest_hash(a) == manifest_hash(b));
    b.clear_ms = 151.0;
    CHECK(manifest_hash(a) != manifest_hash(b));
    CHECK(manifest_hash(a).size() == 16);
}

TEST_CASE("defaults listing names a source for every key", "[config]") {
    const auto defaults = default_settings();
    CHECK(defaults.size() >= 20);
    for (const auto& entry : defaults) {
        CHECK_FALSE(entry.key.empty());
        CHECK_FALSE(entry.source.empty());
    }
}

TEST_CASE("grid files are strict about records and fields", "[config]") {
    CHECK_THROWS_AS(parse_system_text("widget w1 size=3\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_system_text("bus 1 kv=220\nbus 1 kv=220\n", "t"), std::exception);
    CHECK_THROWS_AS(parse_system_text("bus 1 colour=blue\n", "t"), ConfigError);
    try {
        (void)parse_system_text("bus 1 kv=220\nbranch b from=1 to=2 r_pu=0 x_pu=0.1\n", "t");
        FAIL("expected unknown bus");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("unknown bus") != std::string::npos);
    }
}

TEST_CASE("grid files round-trip through the filesystem loader", "[config]") {
    const std::string path = "test_roundtrip.grid";
    {
        std::ofstream out(path);
        out << builtin_system_text();
    }
    const SystemModel from_file = load_system(path);
    const SystemModel builtin = load_system("kundur_4vsc");
    CHECK(from_file.grid.buses.size() == builtin.grid.buses.size());
    CHECK(from_file.grid.branches.size() == builtin.grid.branches.size());
    CHECK(from_file.units.size() == builtin.units.size());
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_system("no_such_file.grid"), ConfigError);
}

TEST_CASE("converter overrides apply to the loaded system", "[config]") {
    RunManifest manifest;
    apply_setting(manifest, "vsc.vsc3.inertia_s=5.0");
    SystemModel system = load_system("kundur_4vsc");
    apply_manifest(manifest, system);
    CHECK(system.find_unit("vsc3")->params.inertia_s == 5.0);

    RunManifest bogus;
    apply_setting(bogus, "vsc.vsc9.inertia_s=5.0");
    CHECK_THROWS_AS(apply_manifest(bogus, system), ConfigError);
}

TEST_CASE("manifest resolves into engine and scenario settings", "[config]") {
    RunManifest manifest;
    manifest.step_us = 200.0;
    manifest.horizon_s = 3.0;
    manifest.decimation = 5;
    manifest.scenario = "fault4";
    manifest.clear_ms = 300.0;
    manifest.fault_conductance_pu = 5e3;

    const SimConfig sim = make_sim_config(manifest);
    CHECK(sim.step_s == Approx(2e-4));
    CHECK(sim.horizon_s == 3.0);
    CHECK(sim.decimation == 5);

    const SystemModel system = load_system("kundur_4vsc");
    const FaultScenario sc = make_manifest_scenario(manifest, system);
    CHECK(sc.bus == "8");
    CHECK(sc.trip_branch == "line8-9a");
    CHECK(sc.clearing_time_s == Approx(0.3));
    CHECK(sc.fault_admittance.real() == 5e3);
}
