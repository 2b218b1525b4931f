#pragma once

// Average model of a grid-forming voltage source converter.
//
// Plant, all per-unit on the converter base, dq frame attached to the
// converter's virtual angle:
//
//   e_m --[r_f + j x_f]-- v_f --[r_c + j x_c]-- v_g      (C_f shunt at v_f)
//
// Control cascade: voltage PI (with transient virtual resistance on the
// reference) -> circular current limiter -> current PI -> modulation limit.
// Synchronisation: swing-equation emulation driving the frame angle.

#include <complex>
#include <stdexcept>

#include "gfsim/dq.hpp"

namespace gfs {

struct VscParams {
    // Ratings and bases
    double rated_mva = 900.0;
    double ac_base_kv = 300.0;   // phase-to-phase
    double dc_base_kv = 640.0;   // pole-to-pole

    // LC filter and transformer (pu on the converter base)
    double r_f = 0.005;
    double x_f = 0.15;
    double c_f = 0.15;
    double r_c = 0.005;
    double x_c = 0.15;

    // Current (inner) and voltage (outer) PI gains
    double kp_i = 0.73;
    double ki_i = 1.19;   // pu/s
    double kp_v = 0.52;
    double ki_v = 1.16;   // pu/s

    // Transient virtual resistance
    double r_vr = 0.09;
    double t_vr = 0.0167;  // s

    // Swing emulation
    double inertia_s = 4.5;     // H
    double damping_pu = 20.0;   // D = 1/R_pfr

    // Limits
    double i_max = 1.25;
    double m_max = 1.31;
    double v_dc = 1.0;          // held constant

    /// Virtual resistance filters the grid-side current by default; switch to
    /// the converter-side current if desired.
    bool vr_on_grid_current = true;

    void validate() const;
};

/// Dynamic state, converter dq frame. `delta` is the frame angle relative to
/// the common network frame (which rotates at exactly the nominal speed).
struct VscState {
    double delta = 0.0;     // rad
    double domega = 0.0;    // pu frequency deviation
    Dq i_s;                 // converter-side current
    Dq v_f;                 // filter capacitor voltage
    Dq i_g;                 // grid-side current
    Dq integ_v;             // voltage PI integrators
    Dq integ_i;             // current PI integrators
    Dq vr_filter;           // low-pass states of the virtual-resistance high-pass
};

struct VscSetpoints {
    double p_ref = 0.0;     // pu, converter base
    double v_ref = 1.0;     // pu filter-voltage magnitude
    double dv_boost = 0.0;  // supplementary transient-stability increment
};

/// Maximum modulation index from the DC (pole-to-pole) and AC
/// (phase-to-phase) voltage bases: sqrt(3/2) * Vdc / (2 Vac).
[[nodiscard]] double max_modulation_index(double v_dc_base_kv, double v_ac_base_kv);

/// Swing emulation: d(domega)/dt and d(delta)/dt.
struct VsmDerivative {
    double ddomega = 0.0;  // pu/s
    double ddelta = 0.0;   // rad/s
};
[[nodiscard]] VsmDerivative vsm_derivative(double p_ref, double p_meas, double domega,
                                           const VscParams& params, double omega0);

/// Virtual-resistance output for a given filtered-current state:
/// dv = -r_vr * (i - filter_state). The filter state tracks i with time
/// constant t_vr, making the path a high-pass (zero in steady state).
[[nodiscard]] Dq virtual_resistance_output(const Dq& i, const Dq& filter_state, double r_vr);
[[nodiscard]] Dq virtual_resistance_filter_derivative(const Dq& i, const Dq& filter_state,
                                                      double t_vr);

/// Voltage PI with capacitor-current decoupling and grid-current feedforward.
/// Returns the unlimited current reference.
[[nodiscard]] Dq voltage_controller(const Dq& v_ref, const Dq& v_f, const Dq& i_g, double omega,
                                    const Dq& integ, const VscParams& params);

/// Circular current limiter: magnitude clamped to i_max, angle preserved.
[[nodiscard]] Dq current_limiter(const Dq& i_ref, double i_max);

/// Current PI with inductor decoupling and filter-voltage feedforward.
[[nodiscard]] Dq current_controller(const Dq& i_ref, const Dq& i_s, const Dq& v_f, double omega,
                                    const Dq& integ, const VscParams& params);

/// Modulation limit: |e_m| clamped to m_max * v_dc.
[[nodiscard]] Dq modulation_limit(const Dq& e_ref, double v_dc, double m_max);

/// Full algebraic pass through the control cascade at one state.
struct CascadeResult {
    Dq v_ref;        // voltage reference after boost and virtual resistance
    Dq v_error;      // voltage PI input
    Dq i_ref_raw;    // before the current limiter
    Dq i_ref;        // after the current limiter
    Dq i_error;      // current PI input
    Dq e_ref_raw;    // before the modulation limit
    Dq e_m;          // applied converter voltage
    bool current_limited = false;
    bool modulation_limited = false;
};
[[nodiscard]] CascadeResult evaluate_cascade(const VscState& state, const VscSetpoints& setpoints,
                                             const VscParams& params);

/// Freeze flags for conditional integration, decided once per step.
struct AntiWindup {
    bool freeze_voltage_integrator = false;
    bool freeze_current_integrator = false;
};

/// Time derivative of the full converter state given the applied converter
/// voltage (from the cascade) and the terminal voltage seen at the PCC.
[[nodiscard]] VscState vsc_derivatives(const VscState& state, const CascadeResult& cascade,
                                       const Dq& v_g, const VscSetpoints& setpoints,
                                       const AntiWindup& freeze, const VscParams& params,
                                       double omega0);

/// Filter/transformer electrical derivatives only (no controllers).
struct FilterDerivatives {
    Dq di_s;
    Dq dv_f;
    Dq di_g;
};
[[nodiscard]] FilterDerivatives filter_derivatives(const VscState& state, const Dq& e_m,
                                                   const Dq& v_g, double omega,
                                                   const VscParams& params, double omega0);

/// Back-solve the plant and preload the controller integrators so that a
/// simulation started from a power-flow operating point is at equilibrium.
/// `v_g` is the PCC voltage phasor in the common frame and `s_g` the complex
/// power injected into the network, both on the converter base.
struct VscInit {
    VscState state;
    VscSetpoints setpoints;
    Complex e_m;  // common-frame internal voltage at equilibrium
};
[[nodiscard]] VscInit init_from_powerflow(const Complex& v_g, const Complex& s_g,
                                          const VscParams& params);

}  // namespace gfs
