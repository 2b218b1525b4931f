#include "gfsim/fvb.hpp"

#include <algorithm>
#include <cmath>

namespace gfs {

double coi_frequency(std::span<const double> omega_pu, std::span<const double> inertia_s) {
    if (omega_pu.empty() || omega_pu.size() != inertia_s.size()) {
        throw std::invalid_argument("coi_frequency: mismatched or empty inputs");
    }
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < omega_pu.size(); ++k) {
        if (!(inertia_s[k] > 0.0)) {
            throw std::invalid_argument("coi_frequency: inertia must be positive");
        }
        weighted += inertia_s[k] * omega_pu[k];
        total += inertia_s[k];
    }
    return weighted / total;
}

double fvb_l_step(double v_g_pu, double domega_pu, FvbLState& state, const FvbLParams& params) {
    if (v_g_pu <= params.v_pickup) {
        state.sag_latched = true;
    } else if (v_g_pu > params.v_reset) {
        state.sag_latched = false;
    }
    const bool freq_high = domega_pu >= params.freq_threshold;
    if (state.sag_latched) {
        state.active = true;
    } else if (!freq_high) {
        state.active = false;
    }
    return state.active ? params.boost_pu : 0.0;
}

std::size_t DelayLine::steps_for(double delay_s, double step_s) {
    if (delay_s < 0.0 || !(step_s > 0.0)) {
        throw std::invalid_argument("delay and step must be non-negative/positive");
    }
    const double ratio = delay_s / step_s;
    const double nearest = std::round(ratio);
    if (std::abs(delay_s - nearest * step_s) > 1e-9) {
        throw std::invalid_argument("communication delay must be an integer multiple of the step");
    }
    return static_cast<std::size_t>(nearest);
}

DelayLine::DelayLine(double delay_s, double step_s, double initial_value)
    : buffer_(steps_for(delay_s, step_s) + 1, initial_value) {}

double DelayLine::push(double sample) {
    buffer_[head_] = sample;
    head_ = (head_ + 1) % buffer_.size();
    // With length = steps + 1 this slot was written exactly `steps` pushes
    // ago (and is the sample just stored when the delay is zero).
    return buffer_[head_];
}

double apply_deadband(double u, double deadband) {
    if (std::abs(u) <= deadband) return 0.0;
    return u - std::copysign(deadband, u);
}

double fvb_wacs_step(double delayed_error, FvbWacsState& state, const FvbWacsParams& params,
                     double step_s) {
    if (!(step_s > 0.0)) throw std::invalid_argument("step must be positive");
    const double u = apply_deadband(delayed_error, params.deadband);

    // Trapezoidal 1/(1 + s*Tf): preserves unit DC gain exactly.
    {
        const double tf = params.lowpass_s;
        const double a = (2.0 * tf - step_s) / (2.0 * tf + step_s);
        const double b = step_s / (2.0 * tf + step_s);
        state.lp_out = a * state.lp_out + b * (u + state.lp_in_prev);
        state.lp_in_prev = u;
    }
    // Trapezoidal s*Tw/(1 + s*Tw): exact zero at DC.
    {
        const double tw = params.washout_s;
        const double a = (2.0 * tw - step_s) / (2.0 * tw + step_s);
        const double c = 2.0 * tw / (2.0 * tw + step_s);
        state.wo_out = a * state.wo_out + c * (state.lp_out - state.wo_in_prev);
        state.wo_in_prev = state.lp_out;
    }
    // The block input is omega_coi - omega_self; a converter above the fleet
    // average must be pushed up, hence the negative path gain.
    const double raw = -params.gain * state.wo_out;
    return std::clamp(raw, -params.boost_pu, params.boost_pu);
}

}  // namespace gfs
