#pragma once

// Fast voltage boosters: supplementary controllers that add a transient
// increment to a converter's voltage set point to improve first-swing
// stability.
//
//  - The local booster latches a fixed boost when it detects a voltage sag
//    and holds it while the sag or a frequency excursion persists.
//  - The wide-area booster drives each converter proportionally to the
//    (communication-delayed) deviation of its frequency from the
//    inertia-weighted fleet average, shaped by a deadband, a noise low-pass,
//    a washout and a saturation.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gfs {

/// Inertia-weighted average frequency (centre of inertia), in pu.
[[nodiscard]] double coi_frequency(std::span<const double> omega_pu,
                                   std::span<const double> inertia_s);

struct FvbLParams {
    double v_pickup = 0.75;        // sag detection threshold
    double v_reset = 0.90;         // hysteresis reset threshold
    double freq_threshold = 1e-3;  // pu deviation that keeps the boost on
    double boost_pu = 0.15;

    [[nodiscard]] bool operator==(const FvbLParams&) const = default;

    void validate() const {
        if (!(v_pickup > 0.0) || !(v_pickup < v_reset) || !(v_reset < 1.0)) {
            throw std::invalid_argument("local booster thresholds need 0 < pickup < reset < 1");
        }
        if (!(freq_threshold > 0.0) || !(boost_pu > 0.0)) {
            throw std::invalid_argument("local booster threshold and boost must be positive");
        }
    }
};

struct FvbLState {
    bool sag_latched = false;  // hysteresis memory of the undervoltage
    bool active = false;       // boost applied
};

/// One sampled update of the local booster. Returns the boost increment
/// (0 or boost_pu) and advances the latches:
///   sag latch: set at v <= pickup, cleared at v > reset, held in between;
///   activation: set by the sag latch, cleared only when both the sag latch
///   and the frequency condition (domega >= threshold) are false.
[[nodiscard]] double fvb_l_step(double v_g_pu, double domega_pu, FvbLState& state,
                                const FvbLParams& params);

/// Fixed-length sample delay for the wide-area error signal.
class DelayLine {
public:
    DelayLine() : buffer_(1, 0.0) {}

    /// Delay of `delay_s` at sample period `step_s`; the delay must be an
    /// integer number of steps. The buffer starts filled with
    /// `initial_value` so the consumer sees the steady state until real
    /// samples have travelled through.
    DelayLine(double delay_s, double step_s, double initial_value);

    /// Push the newest sample, return the delayed one.
    double push(double sample);

    [[nodiscard]] std::size_t length() const { return buffer_.size(); }

    /// Number of whole steps in the given delay; throws if it is not an
    /// integer multiple of the step.
    static std::size_t steps_for(double delay_s, double step_s);

private:
    std::vector<double> buffer_;
    std::size_t head_ = 0;
};

struct FvbWacsParams {
    double gain = 50.0;       // pu
    double lowpass_s = 0.1;   // noise filter time constant
    double washout_s = 10.0;  // offset rejection time constant
    double boost_pu = 0.15;   // saturation
    double deadband = 1e-3;   // half-width, pu
    double delay_s = 0.0;     // communication delay

    [[nodiscard]] bool operator==(const FvbWacsParams&) const = default;

    void validate() const {
        if (!(gain > 0.0) || !(lowpass_s > 0.0) || !(washout_s > 0.0) || !(boost_pu > 0.0) ||
            !(deadband > 0.0) || delay_s < 0.0) {
            throw std::invalid_argument("wide-area booster parameters out of range");
        }
    }
};

/// Discrete filter states (trapezoidal discretisation at the engine step).
struct FvbWacsState {
    double lp_out = 0.0;
    double lp_in_prev = 0.0;
    double wo_out = 0.0;
    double wo_in_prev = 0.0;
    DelayLine delay;
};

/// Offset dead-zone: zero inside +-deadband, shifted towards zero outside.
[[nodiscard]] double apply_deadband(double u, double deadband);

/// One sampled update of the wide-area booster given the delayed error
/// sample u = omega_coi - omega_self (pu). Chain: deadband -> low-pass ->
/// washout -> gain (negated so a converter running above the fleet average
/// receives a positive boost) -> saturation.
[[nodiscard]] double fvb_wacs_step(double delayed_error, FvbWacsState& state,
                                   const FvbWacsParams& params, double step_s);

}  // namespace gfs
