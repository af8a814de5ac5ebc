#pragma once

// Physical model of two driven four-level atoms with a Rydberg pair shift.
//
// Unit convention: all couplings and rates are stored as angular frequencies
// in rad/us; times are in us. Configuration files carry the conventional
// "value / 2pi in MHz" numbers, converted on load (x 2pi) and on save (/ 2pi).

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ryd/algebra.hpp"
#include "ryd/errors.hpp"

namespace ryd {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double mhz_to_rad_us(double mhz) { return kTwoPi * mhz; }
inline double rad_us_to_mhz(double w) { return w / kTwoPi; }

// All rates and couplings of the two-atom model, in rad/us.
struct ModelParams {
    double omega1 = 0.0;       // |1> <-> |p> Rabi coupling
    double omega2 = 0.0;       // |p> <-> |r> Rabi coupling
    double omega_raman = 0.0;  // |0> <-> |1> Raman coupling
    double delta = 0.0;        // detuning of |p>, enters as -delta |p><p| per atom
    double gamma0 = 0.0;       // |p> -> |0> decay rate
    double gamma1 = 0.0;       // |p> -> |1> decay rate
    double gammaR = 0.0;       // |r> -> |p> decay rate
    double vrr = 0.0;          // pair shift of |rr>

    static ModelParams from_mhz(double omega1_mhz, double omega2_mhz, double omega_raman_mhz,
                                double delta_mhz, double gamma0_mhz, double gamma1_mhz,
                                double gammaR_mhz, double vrr_mhz) {
        ModelParams p;
        p.omega1 = mhz_to_rad_us(omega1_mhz);
        p.omega2 = mhz_to_rad_us(omega2_mhz);
        p.omega_raman = mhz_to_rad_us(omega_raman_mhz);
        p.delta = mhz_to_rad_us(delta_mhz);
        p.gamma0 = mhz_to_rad_us(gamma0_mhz);
        p.gamma1 = mhz_to_rad_us(gamma1_mhz);
        p.gammaR = mhz_to_rad_us(gammaR_mhz);
        p.vrr = mhz_to_rad_us(vrr_mhz);
        p.validate();
        return p;
    }

    double omega() const { return std::hypot(omega1, omega2); }  // combined Rabi coupling
    double gamma_p() const { return gamma0 + gamma1; }           // total optical decay
    double epsilon() const { return omega2 / omega1; }
    double xi() const { return omega_raman * omega1 / (omega() * omega()); }

    void validate() const {
        if (!(omega1 > 0.0) || !(omega2 > 0.0))
            throw ContractViolation(
                "omega1 and omega2 must be positive: the uncoupled eigenstate of the "
                "Rabi fields is undefined at zero coupling");
        if (omega_raman < 0.0 || gamma0 < 0.0 || gamma1 < 0.0 || gammaR < 0.0 || vrr < 0.0)
            throw ContractViolation("rates and couplings must be non-negative");
        if (!std::isfinite(omega1) || !std::isfinite(omega2) || !std::isfinite(omega_raman) ||
            !std::isfinite(delta) || !std::isfinite(gamma0) || !std::isfinite(gamma1) ||
            !std::isfinite(gammaR) || !std::isfinite(vrr))
            throw ContractViolation("parameters must be finite");
    }
};

// Pair-shift threshold below which the doubly excited state is repopulated too
// slowly to feed the dissipative cycle: V_rr > (2 Omega / Omega_1)^2 * omega.
inline double blockade_threshold(const ModelParams& p) {
    const double ratio = 2.0 * p.omega() / p.omega1;
    return ratio * ratio * p.omega_raman;
}

inline bool blockade_satisfied(const ModelParams& p) {
    return p.vrr > blockade_threshold(p);
}

// Single-atom Hamiltonian: omega |1><0| + Omega_1 |1><p| + Omega_2 |p><r| + h.c.
// minus delta |p><p|. Zero diagonal when delta = 0.
inline Mat single_atom_hamiltonian(const ModelParams& p) {
    p.validate();
    Mat h = Mat::Zero(kLevels, kLevels);
    auto couple = [&h](Level a, Level b, double w) {
        h(level_index(a), level_index(b)) += w;
        h(level_index(b), level_index(a)) += w;
    };
    couple(Level::g1, Level::g0, p.omega_raman);
    couple(Level::g1, Level::p, p.omega1);
    couple(Level::p, Level::r, p.omega2);
    h(level_index(Level::p), level_index(Level::p)) = -p.delta;
    return h;
}

// Two-atom Hamiltonian: H (x) I + I (x) H + V_rr |rr><rr|.
inline Mat total_hamiltonian(const ModelParams& p) {
    const Mat h1 = single_atom_hamiltonian(p);
    const Mat id = Mat::Identity(kLevels, kLevels);
    Mat h = tensor(h1, id) + tensor(id, h1);
    h(kRRIndex, kRRIndex) += p.vrr;
    return h;
}

// One spontaneous-emission channel, embedded in the pair space.
struct Jump {
    std::string label;
    Mat op;
};

// The six decay channels, in fixed order: atom 1 then atom 2, each with
// p->0, p->1, r->p. Each operator is sqrt(rate) |a><b| on one atom.
inline std::vector<Jump> jump_operators(const ModelParams& p) {
    p.validate();
    const Mat id = Mat::Identity(kLevels, kLevels);
    const Mat c0 = std::sqrt(p.gamma0) * transition(Level::g0, Level::p);
    const Mat c1 = std::sqrt(p.gamma1) * transition(Level::g1, Level::p);
    const Mat cr = std::sqrt(p.gammaR) * transition(Level::p, Level::r);
    std::vector<Jump> jumps;
    jumps.push_back({"C0_atom1", tensor(c0, id)});
    jumps.push_back({"C1_atom1", tensor(c1, id)});
    jumps.push_back({"CR_atom1", tensor(cr, id)});
    jumps.push_back({"C0_atom2", tensor(id, c0)});
    jumps.push_back({"C1_atom2", tensor(id, c1)});
    jumps.push_back({"CR_atom2", tensor(id, cr)});
    return jumps;
}

// Uncoupled eigenstate of the Rabi fields: (Omega_2 |1> - Omega_1 |r>) / Omega.
// It has no |0> or |p> amplitude and is annihilated by the Omega_1/Omega_2
// coupling terms.
inline Vec dark_state(const ModelParams& p) {
    p.validate();
    Vec d = Vec::Zero(kLevels);
    d(level_index(Level::g1)) = p.omega2 / p.omega();
    d(level_index(Level::r)) = -p.omega1 / p.omega();
    return d;
}

// (|ab> - |ba>) / sqrt(2)
inline Vec singlet_pair(Level a, Level b) {
    return normalized(ket2(a, b) - ket2(b, a));
}

// (|ab> + |ba>) / sqrt(2)
inline Vec triplet_pair(Level a, Level b) {
    return normalized(ket2(a, b) + ket2(b, a));
}

// The named two-atom states. "DS" is the antisymmetric target state
// (|D0> - |0D>)/sqrt(2); T0..T3 span the slow subspace built from |D> and |0>
// (T3 == DS); D1, D2, D3 are the interaction-free null states of the driven
// Hamiltonian and Dminus = (D1 - D2) normalized is the long-lived one.
//
// D3 mixes symmetric pair combinations with doubly occupied kets; the relative
// weights below keep it an exact null state (the plain-ket coefficients carry
// an extra 1/sqrt(2) relative to the normalized pair states).
inline std::map<std::string, Vec> named_states(const ModelParams& p) {
    p.validate();
    const double w = p.omega_raman, o1 = p.omega1, o2 = p.omega2;
    const Vec d = dark_state(p);
    const Vec zero = ket(Level::g0);

    std::map<std::string, Vec> st;
    st["T0"] = tensor(d, d);
    st["T1"] = normalized(tensor(d, zero) + tensor(zero, d));
    st["T2"] = tensor(zero, zero);
    st["T3"] = normalized(tensor(d, zero) - tensor(zero, d));
    st["DS"] = st["T3"];

    st["D1"] = normalized(o1 * o2 * singlet_pair(Level::g1, Level::p) -
                          (o2 * o2 - w * w) * singlet_pair(Level::p, Level::r) +
                          o1 * w * singlet_pair(Level::r, Level::g0));
    st["D2"] = normalized(o1 * singlet_pair(Level::g1, Level::p) -
                          o2 * singlet_pair(Level::p, Level::r) +
                          w * singlet_pair(Level::g1, Level::g0));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    st["D3"] = normalized((o2 * o2 - o1 * o1 - w * w) * inv_sqrt2 * ket2(Level::g1, Level::g1) -
                          o1 * o2 * triplet_pair(Level::g1, Level::r) +
                          o1 * o1 * inv_sqrt2 * ket2(Level::p, Level::p) +
                          o1 * w * triplet_pair(Level::p, Level::g0) -
                          (o2 * o2 - w * w) * inv_sqrt2 * ket2(Level::g0, Level::g0));
    // D1 and D2 coincide at w = 0; the difference direction tends to -DS.
    const Vec diff = st["D1"] - st["D2"];
    st["Dminus"] = (diff.norm() > 1e-12) ? normalized(diff) : Vec(-st["DS"]);
    return st;
}

// How the pair shift is represented.
//   finite    - V_rr as given in the parameters
//   surrogate - V_rr replaced by 1000 * Omega (large finite stand-in)
//   truncate  - |rr> removed from the Hilbert space (dimension 15)
enum class BlockadeMode { finite, surrogate, truncate };

inline const char* to_string(BlockadeMode m) {
    switch (m) {
        case BlockadeMode::finite: return "finite";
        case BlockadeMode::surrogate: return "surrogate";
        case BlockadeMode::truncate: return "truncate";
    }
    return "?";
}

namespace detail {

// Remove the |rr> row/column (index 15). Only valid because |rr> is last.
inline Mat drop_rr(const Mat& m) {
    return m.topLeftCorner(kPairDim - 1, kPairDim - 1);
}

inline Vec drop_rr_vec(const Vec& v) { return v.head(kPairDim - 1); }

}  // namespace detail

// Everything the dynamics and observables need about one configured system:
// Hamiltonian, decay channels, the target state, the slow four-state basis and
// its projector, and the population masks. Immutable once built.
struct SystemOperators {
    ModelParams params;        // effective parameters (surrogate vrr substituted)
    BlockadeMode mode = BlockadeMode::finite;
    int dim = kPairDim;
    Mat hamiltonian;           // dim x dim, Hermitian
    std::vector<Jump> jumps;   // six channels (some may be zero)
    Mat h_nonhermitian;        // H - (i/2) sum C^dag C
    Vec ds;                    // target singlet, normalized
    std::array<Vec, 4> t_basis;
    Mat proj_eff;              // orthogonal projector onto span(t_basis)
    Eigen::VectorXd pop_p_atom1;  // diagonal masks
    Eigen::VectorXd pop_p_atom2;

    double expect_h(const Vec& v) const { return (v.dot(hamiltonian * v)).real(); }
};

inline SystemOperators build_system(const ModelParams& params,
                                    BlockadeMode mode = BlockadeMode::finite) {
    ModelParams p = params;
    p.validate();
    if (mode == BlockadeMode::surrogate) p.vrr = 1000.0 * p.omega();

    SystemOperators sys;
    sys.params = p;
    sys.mode = mode;
    sys.hamiltonian = total_hamiltonian(p);
    sys.jumps = jump_operators(p);

    auto st = named_states(p);
    sys.ds = st["DS"];
    sys.t_basis = {st["T0"], st["T1"], st["T2"], st["T3"]};

    if (mode == BlockadeMode::truncate) {
        sys.dim = kPairDim - 1;
        sys.hamiltonian = detail::drop_rr(sys.hamiltonian);
        for (auto& j : sys.jumps) j.op = detail::drop_rr(j.op);
        sys.ds = detail::drop_rr_vec(sys.ds);  // no |rr> amplitude, norm unchanged
        for (auto& t : sys.t_basis) t = normalized(detail::drop_rr_vec(t));
    }

    sys.proj_eff = Mat::Zero(sys.dim, sys.dim);
    for (const auto& t : sys.t_basis) sys.proj_eff += projector(t);

    Mat anti = Mat::Zero(sys.dim, sys.dim);
    for (const auto& j : sys.jumps) anti += j.op.adjoint() * j.op;
    sys.h_nonhermitian = sys.hamiltonian - 0.5 * kI * anti;

    sys.pop_p_atom1 = Eigen::VectorXd::Zero(sys.dim);
    sys.pop_p_atom2 = Eigen::VectorXd::Zero(sys.dim);
    for (int a = 0; a < kLevels; ++a)
        for (int b = 0; b < kLevels; ++b) {
            const int k = kLevels * a + b;
            if (k >= sys.dim) continue;
            if (a == level_index(Level::p)) sys.pop_p_atom1(k) = 1.0;
            if (b == level_index(Level::p)) sys.pop_p_atom2(k) = 1.0;
        }
    return sys;
}

// Initial states used by the command-line tools and sweeps.
inline DensityMatrix initial_state(const std::string& name, const SystemOperators& sys) {
    if (name == "11") {
        Vec v = Vec::Zero(sys.dim);
        v(pair_index(Level::g1, Level::g1)) = 1.0;
        return DensityMatrix::pure(v);
    }
    if (name == "00") {
        Vec v = Vec::Zero(sys.dim);
        v(pair_index(Level::g0, Level::g0)) = 1.0;
        return DensityMatrix::pure(v);
    }
    if (name == "mixed") return DensityMatrix::maximally_mixed(sys.dim);
    if (name == "DS") return DensityMatrix::pure(sys.ds);
    throw ConfigError("unknown initial state '" + name + "' (expected 11, 00, mixed or DS)",
                      "initial");
}

}  // namespace ryd
