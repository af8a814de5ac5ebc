#pragma once

// Figures of merit extracted from a two-atom state.

#include <cmath>
#include <string>

#include "ryd/algebra.hpp"
#include "ryd/model.hpp"

namespace ryd {

// Scalar observables at a single time. All entries lie in [0, 1] up to 1e-9;
// the purity of a dim-dimensional state additionally satisfies P >= 1/dim, and
// the target-state fidelity satisfies F <= sqrt(P) (Cauchy-Schwarz against the
// rank-1 projector).
struct ObservableRecord {
    double fidelity = 0.0;   // <DS| rho |DS>
    double purity = 0.0;     // Tr rho^2
    double pop_eff = 0.0;    // population of the slow four-state subspace
    double pop_rr = 0.0;     // population of |rr>
    double pop_p1 = 0.0;     // atom 1 in |p>
    double pop_p2 = 0.0;     // atom 2 in |p>

    void check_ranges(int dim) const {
        const double lo = -1e-9, hi = 1.0 + 1e-9;
        auto in_range = [&](double x) { return x >= lo && x <= hi; };
        if (!in_range(fidelity) || !in_range(purity) || !in_range(pop_eff) ||
            !in_range(pop_rr) || !in_range(pop_p1) || !in_range(pop_p2))
            throw ContractViolation("observable outside [0, 1]");
        if (purity < 1.0 / dim - 1e-9)
            throw ContractViolation("purity below the maximally mixed floor");
        if (fidelity > std::sqrt(purity) + 1e-9)
            throw ContractViolation("fidelity exceeds sqrt(purity)");
    }
};

inline ObservableRecord measure(const DensityMatrix& rho, const SystemOperators& sys) {
    if (rho.dim() != sys.dim)
        throw InvalidDimension("state dimension does not match the system");
    const Mat& m = rho.matrix();
    ObservableRecord rec;
    rec.fidelity = expect(rho, sys.ds);
    rec.purity = m.squaredNorm();  // Tr rho^2 = ||rho||_F^2 for Hermitian rho
    rec.pop_eff = (sys.proj_eff * m).trace().real();
    rec.pop_rr = (sys.dim == kPairDim) ? m(kRRIndex, kRRIndex).real() : 0.0;
    rec.pop_p1 = (sys.pop_p_atom1.asDiagonal() * m).trace().real();
    rec.pop_p2 = (sys.pop_p_atom2.asDiagonal() * m).trace().real();
    rec.check_ranges(sys.dim);
    return rec;
}

}  // namespace ryd
