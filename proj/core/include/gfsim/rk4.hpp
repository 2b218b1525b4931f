#pragma once

// Fixed-step explicit integration kernel. RK4 is the production method;
// forward Euler is kept for debugging and step-independence checks.

#include <Eigen/Dense>

namespace gfs {

enum class Integrator { Rk4, Euler };

/// Advance y(t) by one step of size h. `f(t, y)` returns dy/dt.
template <typename Deriv>
[[nodiscard]] Eigen::VectorXd integrate_step(Integrator method, double t, double h,
                                             const Eigen::VectorXd& y, Deriv&& f) {
    if (method == Integrator::Euler) {
        return y + h * f(t, y);
    }
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const Eigen::VectorXd k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace gfs
