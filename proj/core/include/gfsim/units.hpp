#pragma once

// Per-unit base handling. The network is carried on a common system base
// (default 100 MVA) while each converter works on its own rating; values
// cross the boundary only through the rebase helpers below.

#include <numbers>
#include <stdexcept>

namespace gfs {

inline constexpr double kDefaultSystemBaseMva = 100.0;
inline constexpr double kDefaultFrequencyHz = 50.0;

/// Nominal angular frequency in rad/s.
[[nodiscard]] constexpr double omega_base(double f_hz) {
    return 2.0 * std::numbers::pi * f_hz;
}

struct PowerBase {
    double s_mva = kDefaultSystemBaseMva;
};

struct VoltageBase {
    double kv = 1.0;
};

/// Convert a per-unit power between MVA bases.
[[nodiscard]] inline double rebase_power(double value_pu, double from_mva, double to_mva) {
    if (from_mva <= 0.0 || to_mva <= 0.0) {
        throw std::invalid_argument("rebase_power: bases must be positive");
    }
    return value_pu * from_mva / to_mva;
}

/// Convert a per-unit impedance between (MVA, kV) base pairs.
/// z_pu_new = z_pu_old * (S_new / S_old) * (kV_old / kV_new)^2
[[nodiscard]] inline double rebase_impedance(double z_pu, double from_mva, double from_kv,
                                             double to_mva, double to_kv) {
    if (from_mva <= 0.0 || to_mva <= 0.0 || from_kv <= 0.0 || to_kv <= 0.0) {
        throw std::invalid_argument("rebase_impedance: bases must be positive");
    }
    const double ratio = (to_mva / from_mva) * (from_kv / to_kv) * (from_kv / to_kv);
    return z_pu * ratio;
}

/// Convert a per-unit admittance between (MVA, kV) base pairs.
[[nodiscard]] inline double rebase_admittance(double y_pu, double from_mva, double from_kv,
                                              double to_mva, double to_kv) {
    if (y_pu == 0.0) return 0.0;
    return 1.0 / rebase_impedance(1.0 / y_pu, from_mva, from_kv, to_mva, to_kv);
}

}  // namespace gfs
