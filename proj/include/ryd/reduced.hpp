#pragma once

// Reduced dynamics on the slow four-state subspace spanned by
// {T0 = |DD>, T1 = (|D0>+|0D>)/sqrt(2), T2 = |00>, T3 = DS}, and the
// closed-form rate/fidelity bounds obtained from the damped Hamiltonian
// spectrum.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ryd/algebra.hpp"
#include "ryd/dynamics.hpp"
#include "ryd/fit.hpp"
#include "ryd/model.hpp"

namespace ryd {

// Couplings of the reduced model: a chain T2 <-> T1 <-> T0 with strength
// omega_tilde, and decay out of T0 back into all four states at total rate
// Gamma. Closed-form in the bare parameters.
struct EffectiveParams {
    double omega_tilde = 0.0;  // rad/us
    double gamma_big = 0.0;    // rad/us ("Gamma"), total drain rate of T0
};

inline EffectiveParams effective_params(const ModelParams& p) {
    p.validate();
    EffectiveParams ep;
    ep.omega_tilde = std::sqrt(2.0) * p.omega_raman * p.omega2 / p.omega();
    ep.gamma_big = p.gamma_p() * p.omega1 / (std::sqrt(2.0) * p.omega());
    return ep;
}

// The reduced model in its own 4-dimensional basis (indices 0..3 = T0..T3).
struct EffectiveSystem {
    EffectiveParams params;
    Mat hamiltonian;          // 4x4
    std::vector<Jump> jumps;  // four channels T0 -> Tj, rate Gamma/4 each
};

inline EffectiveSystem build_effective_system(const ModelParams& p) {
    const EffectiveParams ep = effective_params(p);
    EffectiveSystem sys;
    sys.params = ep;
    sys.hamiltonian = Mat::Zero(4, 4);
    sys.hamiltonian(0, 1) = ep.omega_tilde;
    sys.hamiltonian(1, 0) = ep.omega_tilde;
    sys.hamiltonian(1, 2) = ep.omega_tilde;
    sys.hamiltonian(2, 1) = ep.omega_tilde;
    const double amp = std::sqrt(ep.gamma_big / 4.0);
    for (int j = 0; j < 4; ++j) {
        Mat c = Mat::Zero(4, 4);
        c(j, 0) = amp;
        sys.jumps.push_back({"T0_to_T" + std::to_string(j), c});
    }
    return sys;
}

// Project a full two-atom state onto the slow subspace and renormalize,
// returning the 4x4 matrix in the T0..T3 basis.
inline DensityMatrix project_to_effective(const DensityMatrix& rho, const SystemOperators& sys) {
    if (rho.dim() != sys.dim)
        throw InvalidDimension("state dimension does not match the system");
    Mat small(4, 4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            small(a, b) = sys.t_basis[a].dot(rho.matrix() * sys.t_basis[b]);
    small = 0.5 * (small + small.adjoint());
    const double tr = small.trace().real();
    if (tr <= 1e-12)
        throw ContractViolation("state has no weight in the slow subspace");
    return DensityMatrix(small / tr);
}

// Propagate the reduced model. Fidelity means population of T3; the slow
// subspace is the whole space here, so pop_eff is identically 1.
inline Trajectory simulate_effective(const ModelParams& p, const DensityMatrix& rho0_eff,
                                     double t_end, const IntegratorOptions& opts = {}) {
    if (rho0_eff.dim() != 4) throw InvalidDimension("reduced state must be 4x4");
    const EffectiveSystem sys = build_effective_system(p);
    LindbladGenerator gen(sys.hamiltonian, sys.jumps);
    return integrate(rho0_eff, gen, t_end, opts, [](const DensityMatrix& r) {
        ObservableRecord rec;
        rec.fidelity = r.matrix()(3, 3).real();
        rec.purity = r.matrix().squaredNorm();
        rec.pop_eff = r.matrix().trace().real();
        rec.check_ranges(4);
        return rec;
    });
}

// One damped-Hamiltonian eigenmode: its complex frequency and its overlap
// with the target state. Decaying modes carry Im(lambda) <= 0 under the
// H - (i/2) sum C^dag C convention; reports quote |Im| as the decay rate.
struct SpectralLine {
    Cx eigenvalue;      // rad/us
    double overlap_ds;  // |<DS|v>|^2
};

// Eigenmodes of H - (i/2) sum C^dag C sorted by ascending |Im|, i.e. slowest
// decay first.
inline std::vector<SpectralLine> nonhermitian_spectrum(const SystemOperators& sys) {
    const GeneralEigen eig = eig_general(sys.h_nonhermitian);
    std::vector<SpectralLine> lines;
    const double scale = std::max(1.0, sys.h_nonhermitian.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        if (eig.values(k).imag() > 1e-10 * scale)
            throw NumericalFailure("damped spectrum has a growing mode: Im = " +
                                   std::to_string(eig.values(k).imag()));
        const Cx ov = sys.ds.dot(eig.vectors.col(k));
        lines.push_back({eig.values(k), std::norm(ov)});
    }
    return lines;
}

inline std::vector<SpectralLine> nonhermitian_spectrum(const ModelParams& p,
                                                       BlockadeMode mode = BlockadeMode::finite) {
    return nonhermitian_spectrum(build_system(p, mode));
}

// Closed-form ceilings on the relaxation rate and plateau fidelity, plus the
// damped spectrum they derive from.
struct BoundsReport {
    double gamma_e_bound = 0.0;  // 1/us
    double f_max_bound = 0.0;
    double xi = 0.0;
    EffectiveParams effective;
    std::vector<SpectralLine> spectrum;
    // Measured ratio |Im lambda_0| / (2 xi^2): the proportionality scale of the
    // slowest decay is reported, not asserted.
    double slowest_im_over_2xi2 = 0.0;
};

inline BoundsReport bounds(const ModelParams& p, BlockadeMode mode = BlockadeMode::finite) {
    p.validate();
    BoundsReport rep;
    const double w = p.omega_raman;
    rep.gamma_e_bound =
        w * p.gamma_p() * p.omega1 / (p.omega1 * p.omega1 + p.omega2 * p.omega2 + w * w);
    rep.xi = p.xi();
    rep.f_max_bound = 1.0 - 2.0 * rep.xi * rep.xi;
    rep.effective = effective_params(p);
    rep.spectrum = nonhermitian_spectrum(p, mode);
    const double im0 = std::abs(rep.spectrum.front().eigenvalue.imag());
    rep.slowest_im_over_2xi2 = (rep.xi > 0.0) ? im0 / (2.0 * rep.xi * rep.xi) : 0.0;
    return rep;
}

}  // namespace ryd
