#pragma once

// Rotating-frame helpers. A converter's d axis is aligned with its filter
// voltage and the q axis leads by 90 degrees, so a phasor x in the common
// network frame maps to dq through a rotation by -theta:
//
//   x_dq = x * exp(-j*theta),  d = Re, q = Im.

#include <cmath>
#include <complex>

namespace gfs {

using Complex = std::complex<double>;

/// A d-q pair (voltage, current or controller signal) in some rotating frame.
struct Dq {
    double d = 0.0;
    double q = 0.0;

    constexpr Dq() = default;
    constexpr Dq(double d_, double q_) : d(d_), q(q_) {}

    [[nodiscard]] double norm() const { return std::hypot(d, q); }

    constexpr Dq operator+(const Dq& o) const { return {d + o.d, q + o.q}; }
    constexpr Dq operator-(const Dq& o) const { return {d - o.d, q - o.q}; }
    constexpr Dq operator*(double s) const { return {d * s, q * s}; }
    constexpr Dq operator-() const { return {-d, -q}; }
    constexpr Dq& operator+=(const Dq& o) {
        d += o.d;
        q += o.q;
        return *this;
    }
};

constexpr Dq operator*(double s, const Dq& v) { return v * s; }

[[nodiscard]] inline Complex to_complex(const Dq& v) { return {v.d, v.q}; }
[[nodiscard]] inline Dq to_dq(const Complex& c) { return {c.real(), c.imag()}; }

/// Park transform: rotate a common-frame phasor into a frame at angle theta.
[[nodiscard]] inline Dq park(const Complex& x, double theta) {
    return to_dq(x * std::polar(1.0, -theta));
}

/// Inverse Park transform: dq pair back to the common frame.
[[nodiscard]] inline Complex inverse_park(const Dq& x, double theta) {
    return to_complex(x) * std::polar(1.0, theta);
}

/// Instantaneous active/reactive power from dq voltage and current.
/// Matches S = V * conj(I); reactive power is positive for capacitive
/// (leading current) injection.
[[nodiscard]] inline Dq measure_power(const Dq& v, const Dq& i) {
    return {v.d * i.d + v.q * i.q, v.q * i.d - v.d * i.q};
}

/// Radial limiter: preserve the angle, clamp the magnitude to `limit`.
[[nodiscard]] inline Dq clamp_magnitude(const Dq& x, double limit) {
    const double n = x.norm();
    if (n <= limit || n == 0.0) return x;
    const double s = limit / n;
    return {x.d * s, x.q * s};
}

}  // namespace gfs
