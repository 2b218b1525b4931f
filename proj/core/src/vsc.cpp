#include "gfsim/vsc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gfs {

void VscParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw std::invalid_argument(std::string("converter parameter ") + name +
                                        " must be positive");
        }
    };
    positive(rated_mva, "rated_mva");
    positive(ac_base_kv, "ac_base_kv");
    positive(dc_base_kv, "dc_base_kv");
    positive(r_f, "r_f");
    positive(x_f, "x_f");
    positive(c_f, "c_f");
    positive(r_c, "r_c");
    positive(x_c, "x_c");
    positive(kp_i, "kp_i");
    positive(ki_i, "ki_i");
    positive(kp_v, "kp_v");
    positive(ki_v, "ki_v");
    positive(r_vr, "r_vr");
    positive(t_vr, "t_vr");
    positive(inertia_s, "inertia_s");
    positive(damping_pu, "damping_pu");
    positive(i_max, "i_max");
    positive(m_max, "m_max");
    positive(v_dc, "v_dc");
    const double computed = max_modulation_index(dc_base_kv, ac_base_kv);
    if (std::abs(computed - m_max) > 0.01) {
        throw std::invalid_argument("m_max inconsistent with voltage bases: stated " +
                                    std::to_string(m_max) + ", computed " +
                                    std::to_string(computed));
    }
}

double max_modulation_index(double v_dc_base_kv, double v_ac_base_kv) {
    if (v_dc_base_kv <= 0.0 || v_ac_base_kv <= 0.0) {
        throw std::invalid_argument("voltage bases must be positive");
    }
    return std::sqrt(1.5) * v_dc_base_kv / (2.0 * v_ac_base_kv);
}

VsmDerivative vsm_derivative(double p_ref, double p_meas, double domega, const VscParams& params,
                             double omega0) {
    VsmDerivative out;
    out.ddomega = (p_ref - p_meas - params.damping_pu * domega) / (2.0 * params.inertia_s);
    out.ddelta = omega0 * domega;
    return out;
}

Dq virtual_resistance_output(const Dq& i, const Dq& filter_state, double r_vr) {
    return (i - filter_state) * (-r_vr);
}

Dq virtual_resistance_filter_derivative(const Dq& i, const Dq& filter_state, double t_vr) {
    if (!(t_vr > 0.0)) throw std::invalid_argument("t_vr must be positive");
    return (i - filter_state) * (1.0 / t_vr);
}

Dq voltage_controller(const Dq& v_ref, const Dq& v_f, const Dq& i_g, double omega,
                      const Dq& integ, const VscParams& params) {
    const Dq error = v_ref - v_f;
    // Capacitor-current decoupling and grid-current feedforward recreate the
    // steady-state identity i_s = i_g + j*omega*C_f*v_f.
    return {params.kp_v * error.d + integ.d + i_g.d - omega * params.c_f * v_f.q,
            params.kp_v * error.q + integ.q + i_g.q + omega * params.c_f * v_f.d};
}

Dq current_limiter(const Dq& i_ref, double i_max) {
    if (!(i_max > 0.0)) throw std::invalid_argument("i_max must be positive");
    return clamp_magnitude(i_ref, i_max);
}

Dq current_controller(const Dq& i_ref, const Dq& i_s, const Dq& v_f, double omega,
                      const Dq& integ, const VscParams& params) {
    const Dq error = i_ref - i_s;
    return {params.kp_i * error.d + integ.d + v_f.d - omega * params.x_f * i_s.q,
            params.kp_i * error.q + integ.q + v_f.q + omega * params.x_f * i_s.d};
}

Dq modulation_limit(const Dq& e_ref, double v_dc, double m_max) {
    if (!(v_dc > 0.0)) throw std::invalid_argument("v_dc must be positive");
    return clamp_magnitude(e_ref, m_max * v_dc);
}

CascadeResult evaluate_cascade(const VscState& state, const VscSetpoints& setpoints,
                               const VscParams& params) {
    CascadeResult r;
    const double omega = 1.0 + state.domega;

    const Dq& vr_input = params.vr_on_grid_current ? state.i_g : state.i_s;
    const Dq dv_vr = virtual_resistance_output(vr_input, state.vr_filter, params.r_vr);

    // Magnitude reference on the d axis (frame aligned with v_f), q held at 0.
    double v_total = setpoints.v_ref + setpoints.dv_boost;
    v_total = std::clamp(v_total, 0.0, 1.5);
    r.v_ref = Dq{v_total, 0.0} + dv_vr;

    r.v_error = r.v_ref - state.v_f;
    r.i_ref_raw = voltage_controller(r.v_ref, state.v_f, state.i_g, omega, state.integ_v, params);
    r.i_ref = current_limiter(r.i_ref_raw, params.i_max);
    r.current_limited = r.i_ref_raw.norm() > params.i_max;

    r.i_error = r.i_ref - state.i_s;
    r.e_ref_raw = current_controller(r.i_ref, state.i_s, state.v_f, omega, state.integ_i, params);
    r.e_m = modulation_limit(r.e_ref_raw, params.v_dc, params.m_max);
    r.modulation_limited = r.e_ref_raw.norm() > params.m_max * params.v_dc;
    return r;
}

FilterDerivatives filter_derivatives(const VscState& state, const Dq& e_m, const Dq& v_g,
                                     double omega, const VscParams& params, double omega0) {
    FilterDerivatives d;
    const double w = omega;
    d.di_s = {omega0 / params.x_f *
                  (e_m.d - state.v_f.d - params.r_f * state.i_s.d + w * params.x_f * state.i_s.q),
              omega0 / params.x_f *
                  (e_m.q - state.v_f.q - params.r_f * state.i_s.q - w * params.x_f * state.i_s.d)};
    d.dv_f = {omega0 / params.c_f *
                  (state.i_s.d - state.i_g.d + w * params.c_f * state.v_f.q),
              omega0 / params.c_f *
                  (state.i_s.q - state.i_g.q - w * params.c_f * state.v_f.d)};
    d.di_g = {omega0 / params.x_c *
                  (state.v_f.d - v_g.d - params.r_c * state.i_g.d + w * params.x_c * state.i_g.q),
              omega0 / params.x_c *
                  (state.v_f.q - v_g.q - params.r_c * state.i_g.q - w * params.x_c * state.i_g.d)};
    return d;
}

VscState vsc_derivatives(const VscState& state, const CascadeResult& cascade, const Dq& v_g,
                         const VscSetpoints& setpoints, const AntiWindup& freeze,
                         const VscParams& params, double omega0) {
    const double omega = 1.0 + state.domega;
    VscState d;

    const Dq p_meas = measure_power(v_g, state.i_g);
    const VsmDerivative swing =
        vsm_derivative(setpoints.p_ref, p_meas.d, state.domega, params, omega0);
    d.delta = swing.ddelta;
    d.domega = swing.ddomega;

    const FilterDerivatives filt = filter_derivatives(state, cascade.e_m, v_g, omega, params, omega0);
    d.i_s = filt.di_s;
    d.v_f = filt.dv_f;
    d.i_g = filt.di_g;

    d.integ_v = freeze.freeze_voltage_integrator ? Dq{} : cascade.v_error * params.ki_v;
    d.integ_i = freeze.freeze_current_integrator ? Dq{} : cascade.i_error * params.ki_i;

    const Dq& vr_input = params.vr_on_grid_current ? state.i_g : state.i_s;
    d.vr_filter = virtual_resistance_filter_derivative(vr_input, state.vr_filter, params.t_vr);
    return d;
}

VscInit init_from_powerflow(const Complex& v_g, const Complex& s_g, const VscParams& params) {
    if (std::abs(v_g) <= 0.0) {
        throw std::invalid_argument("PCC voltage must be nonzero for initialisation");
    }
    const Complex i_g = std::conj(s_g / v_g);
    const Complex z_c(params.r_c, params.x_c);
    const Complex z_f(params.r_f, params.x_f);
    const Complex v_f = v_g + z_c * i_g;
    // Capacitor current at nominal speed.
    const Complex i_s = i_g + Complex(0.0, 1.0) * params.c_f * v_f;
    const Complex e_m = v_f + z_f * i_s;
    if (std::abs(e_m) > params.m_max * params.v_dc) {
        throw std::invalid_argument("operating point requires |e_m| = " +
                                    std::to_string(std::abs(e_m)) +
                                    " above the modulation limit " +
                                    std::to_string(params.m_max * params.v_dc));
    }

    VscInit out;
    const double delta = std::arg(v_f);
    out.state.delta = delta;
    out.state.domega = 0.0;
    out.state.i_s = park(i_s, delta);
    out.state.v_f = park(v_f, delta);   // q component lands at zero
    out.state.i_g = park(i_g, delta);
    out.state.vr_filter = out.state.i_g;
    if (!params.vr_on_grid_current) out.state.vr_filter = out.state.i_s;

    const Dq pq = measure_power(park(v_g, delta), out.state.i_g);
    out.setpoints.p_ref = pq.d;
    out.setpoints.v_ref = std::abs(v_f);
    out.setpoints.dv_boost = 0.0;

    // Preload the integrators so both PI outputs reproduce the equilibrium
    // exactly (zero proportional error at steady state).
    const Dq e_dq = park(e_m, delta);
    const Dq& st_is = out.state.i_s;
    const Dq& st_vf = out.state.v_f;
    out.state.integ_i = {e_dq.d - (st_vf.d - params.x_f * st_is.q),
                         e_dq.q - (st_vf.q + params.x_f * st_is.d)};
    const Dq& st_ig = out.state.i_g;
    out.state.integ_v = {st_is.d - (st_ig.d - params.c_f * st_vf.q),
                         st_is.q - (st_ig.q + params.c_f * st_vf.d)};
    out.e_m = e_m;
    return out;
}

}  // namespace gfs
