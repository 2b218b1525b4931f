#include <catch2/catch_amalgamated.hpp>

#include "gfsim/fvb.hpp"

#include <array>
#include <random>

using namespace gfs;
using Catch::Approx;

TEST_CASE("centre-of-inertia frequency", "[fvb]") {
    const std::array<double, 4> inertia{4.5, 4.5, 4.175, 6.175};
    const std::array<double, 4> flat{1.0, 1.0, 1.0, 1.0};
    CHECK(coi_frequency(flat, inertia) == Approx(1.0).margin(1e-15));

    const std::array<double, 4> skew{1.01, 1.0, 1.0, 1.0};
    CHECK(coi_frequency(skew, inertia) == Approx(1.0023256).margin(1e-7));
    CHECK(coi_frequency(skew, inertia) == Approx(19.395 / 19.35));

    const std::array<double, 1> solo{1.007};
    const std::array<double, 1> h1{5.0};
    CHECK(coi_frequency(solo, h1) == 1.007);

    const std::array<double, 2> omega2{1.0, 1.0};
    const std::array<double, 3> h3{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(coi_frequency(omega2, h3), std::invalid_argument);
}

TEST_CASE("coi stays inside the frequency envelope", "[fvb][property]") {
    std::mt19937_64 rng(987651234);
    std::uniform_real_distribution<double> omega_dist(0.9, 1.1);
    std::uniform_real_distribution<double> h_dist(0.5, 10.0);
    std::uniform_int_distribution<int> len(1, 8);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = len(rng);
        std::vector<double> omega(n), inertia(n);
        double lo = 2.0, hi = 0.0;
        for (int i = 0; i < n; ++i) {
            omega[i] = omega_dist(rng);
            inertia[i] = h_dist(rng);
            lo = std::min(lo, omega[i]);
            hi = std::max(hi, omega[i]);
        }
        const double coi = coi_frequency(omega, inertia);
        CHECK(coi >= lo - 1e-14);
        CHECK(coi <= hi + 1e-14);
    }
}

TEST_CASE("local booster activation trace", "[fvb]") {
    FvbLParams params;  // pickup 0.75, reset 0.90, threshold 1e-3, boost 0.15
    params.validate();
    FvbLState state;

    // deep sag: activates regardless of frequency
    CHECK(fvb_l_step(0.6, 0.0, state, params) == Approx(0.15));
    CHECK(state.sag_latched);
    CHECK(state.active);

    // voltage recovered above the reset level but frequency still high
    CHECK(fvb_l_step(0.95, 0.005, state, params) == Approx(0.15));
    CHECK_FALSE(state.sag_latched);
    CHECK(state.active);

    // frequency back inside the threshold: boost drops out
    CHECK(fvb_l_step(0.95, 0.0005, state, params) == 0.0);
    CHECK_FALSE(state.active);
}

TEST_CASE("local booster hysteresis band holds the sag latch", "[fvb]") {
    FvbLParams params;
    FvbLState state;
    (void)fvb_l_step(0.7, 0.0, state, params);
    CHECK(state.sag_latched);
    // inside the band (between pickup and reset) the latch holds
    (void)fvb_l_step(0.85, 0.0, state, params);
    CHECK(state.sag_latched);
    (void)fvb_l_step(0.91, 0.0, state, params);
    CHECK_FALSE(state.sag_latched);
}

TEST_CASE("local booster cannot self-activate without a sag", "[fvb][property]") {
    FvbLParams params;
    FvbLState state;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> v(0.91, 1.1);
    std::uniform_real_distribution<double> w(-5e-4, 9e-4);  // below the threshold
    for (int k = 0; k < 5000; ++k) {
        CHECK(fvb_l_step(v(rng), w(rng), state, params) == 0.0);
        CHECK_FALSE(state.active);
    }
    // even a large frequency excursion alone must not activate it
    CHECK(fvb_l_step(0.95, 0.05, state, params) == 0.0);
    CHECK_FALSE(state.active);
}

TEST_CASE("local booster output is binary", "[fvb][property]") {
    FvbLParams params;
    FvbLState state;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> v(0.2, 1.1);
    std::uniform_real_distribution<double> w(-0.02, 0.02);
    for (int k = 0; k < 5000; ++k) {
        const double out = fvb_l_step(v(rng), w(rng), state, params);
        CHECK((out == 0.0 || out == params.boost_pu));
    }
}

TEST_CASE("deadband is odd and exactly zero inside the band", "[fvb]") {
    CHECK(apply_deadband(0.0005, 1e-3) == 0.0);
    CHECK(apply_deadband(-0.0005, 1e-3) == 0.0);
    CHECK(apply_deadband(1e-3, 1e-3) == 0.0);
    CHECK(apply_deadband(0.004, 1e-3) == Approx(0.003));
    CHECK(apply_deadband(-0.004, 1e-3) == Approx(-0.003));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int k = 0; k < 2000; ++k) {
        const double x = u(rng);
        CHECK(apply_deadband(-x, 1e-3) == Approx(-apply_deadband(x, 1e-3)).margin(1e-15));
    }
}

TEST_CASE("delay line semantics", "[fvb]") {
    // zero delay is the identity, bit for bit
    DelayLine zero(0.0, 1e-4, 0.0);
    CHECK(zero.length() == 1);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng);
        CHECK(zero.push(x) == x);
    }

    // ramp input: output is the ramp shifted by exactly round(tau/step) steps
    const double step = 1e-4;
    const double tau = 0.1;
    DelayLine line(tau, step, 0.0);
    CHECK(line.length() == 1001);
    for (int k = 0; k <= 5000; ++k) {
        const double t = k * step;
        const double out = line.push(t);
        if (t < tau) {
            CHECK(out == 0.0);  // initial steady value until filled
        } else {
            CHECK(out == Approx(t - tau).margin(1e-12));
        }
    }

    // non-multiple delays are rejected at configuration time
    CHECK_THROWS_AS(DelayLine(0.0750005, 1e-4, 0.0), std::invalid_argument);
    CHECK_NOTHROW(DelayLine(0.075, 1e-4, 0.0));
}

TEST_CASE("wide-area booster equilibrium and saturation behaviour", "[fvb]") {
    FvbWacsParams params;  // K=50, Tf=0.1, Tw=10, boost 0.15, deadband 1e-3
    params.validate();
    const double h = 1e-4;

    // identical frequencies: zero forever
    FvbWacsState state;
    for (int k = 0; k < 1000; ++k) {
        CHECK(fvb_wacs_step(0.0, state, params, h) == 0.0);
    }

    // sustained deviation of 0.01 pu (converter above the fleet):
    // error = coi - self = -0.01, output saturates at +0.15
    FvbWacsState s2;
    double out = 0.0;
    for (int k = 0; k < 10000; ++k) {  // 1 s: lowpass settled, washout barely moved
        out = fvb_wacs_step(-0.01, s2, params, h);
    }
    CHECK(out == Approx(0.15));

    // held for many washout time constants the boost drains back to zero
    for (int k = 0; k < 500000; ++k) {  // 50 s
        out = fvb_wacs_step(-0.01, s2, params, h);
    }
    CHECK(std::abs(out) < 0.01);
}

TEST_CASE("wide-area booster sign convention", "[fvb]") {
    FvbWacsParams params;
    const double h = 1e-4;
    // converter below the fleet average: error positive, boost negative
    FvbWacsState state;
    double out = 0.0;
    for (int k = 0; k < 5000; ++k) out = fvb_wacs_step(0.004, state, params, h);
    CHECK(out < 0.0);
    // small unsaturated deviation: after the lowpass settles and before the
    // washout drains, the magnitude tracks gain * (|error| - deadband)
    CHECK(out == Approx(-50.0 * 0.003).epsilon(0.05));
}

TEST_CASE("wide-area booster output stays inside the saturation band",
          "[fvb][property]") {
    FvbWacsParams params;
    FvbWacsState state;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int k = 0; k < 20000; ++k) {
        const double out = fvb_wacs_step(u(rng), state, params, 1e-4);
        CHECK(out <= params.boost_pu);
        CHECK(out >= -params.boost_pu);
    }
}

TEST_CASE("trapezoidal filters preserve the exact DC gains", "[fvb]") {
    // low-pass: unit DC gain; washout: exact zero at DC. Feed a constant and
    // compare against the continuous-time limits.
    FvbWacsParams params;
    params.gain = 1.0;
    params.boost_pu = 100.0;  // keep the saturation out of the way
    params.deadband = 1e-9;
    FvbWacsState state;
    double out = 0.0;
    for (int k = 0; k < 4'000'000; ++k) {  // 400 s >> Tw
        out = fvb_wacs_step(1.0, state, params, 1e-4);
    }
    CHECK(std::abs(out) < 1e-6);
    CHECK(state.lp_out == Approx(1.0 - 1e-9).epsilon(1e-9));
}
