#pragma once

// Static network description and nodal admittance assembly.
//
// The grid is a balanced positive-sequence phasor model on a common MVA
// base. Loads are represented as constant shunt admittances; a load can be
// frozen either at its nominal voltage (1 pu) or at the voltage found by the
// initial power flow. Events (branch trips, fault shunts) produce modified
// admittance matrices without touching the base model.

#include <complex>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfsim/units.hpp"

namespace gfs {

using Complex = std::complex<double>;

struct Bus {
    std::string id;
    double nominal_kv = 0.0;
};

/// Pi-model series branch. r/x/b are total per-unit values on the system base;
/// b is the full line charging susceptance (half at each terminal).
struct Branch {
    std::string id;
    std::string from;
    std::string to;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double b_pu = 0.0;
    bool in_service = true;
};

enum class LoadModel {
    /// Admittance frozen from nominal power at 1 pu voltage.
    ImpedanceAtNominal,
    /// PQ injection in the power flow, then converted to an admittance at the
    /// solved voltage for dynamic simulation.
    ConvertAtPowerFlow,
};

struct Load {
    std::string bus;
    double p_mw = 0.0;
    double q_mvar = 0.0;
    LoadModel model = LoadModel::ImpedanceAtNominal;
    /// Voltage magnitude used to freeze the admittance. 1 for nominal loads;
    /// updated by freeze_loads() for ConvertAtPowerFlow loads.
    double frozen_v_pu = 1.0;
};

/// Fixed shunt. Positive q_mvar is capacitive (injects reactive power at 1 pu).
struct Shunt {
    std::string bus;
    double q_mvar = 0.0;
    double g_mw = 0.0;
};

struct GridModel {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Load> loads;
    std::vector<Shunt> shunts;
    double base_mva = kDefaultSystemBaseMva;
    double frequency_hz = kDefaultFrequencyHz;

    [[nodiscard]] double omega0() const { return omega_base(frequency_hz); }

    [[nodiscard]] int bus_index(const std::string& id) const;
    [[nodiscard]] const Branch* find_branch(const std::string& id) const;

    /// Structural checks: unique ids, endpoints exist, load buses exist,
    /// connectivity with all branches in service. Throws on violation.
    void validate() const;
};

/// Admittance-side view of a set of scheduled event effects.
struct EventEffects {
    std::set<std::string> branches_out;
    /// Fault shunts added on the diagonal, keyed by bus id (pu admittance).
    std::map<std::string, Complex> fault_admittance;

    [[nodiscard]] bool empty() const {
        return branches_out.empty() && fault_admittance.empty();
    }
    [[nodiscard]] bool operator==(const EventEffects&) const = default;
    [[nodiscard]] auto operator<=>(const EventEffects&) const = default;
};

struct AdmittanceMatrix {
    Eigen::MatrixXcd y;
    std::vector<std::string> bus_order;

    [[nodiscard]] int index(const std::string& bus) const;
    [[nodiscard]] int size() const { return static_cast<int>(bus_order.size()); }
};

/// Assemble the nodal admittance matrix with loads as shunt admittances,
/// out-of-service branches removed and fault shunts added. Throws an
/// islanding error (naming the isolated buses) if the in-service graph is
/// disconnected.
[[nodiscard]] AdmittanceMatrix build_ybus(const GridModel& grid, const EventEffects& effects = {});

/// Admittance of one load at its frozen voltage, in system pu.
[[nodiscard]] Complex load_admittance(const Load& load, double base_mva);

/// Per-branch 2x2 admittance stamp (from/to ordering), for assembly checks.
[[nodiscard]] Eigen::Matrix2cd branch_stamp(const Branch& branch);

}  // namespace gfs
