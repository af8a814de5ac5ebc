#pragma once

// Dense complex linear algebra for a fixed two-atom, four-level system.
//
// Basis conventions (used everywhere, including file output):
//   single-atom levels |0>, |1>, |p>, |r>  ->  indices 0, 1, 2, 3
//   two-atom product basis index = 4 * (atom-1 level) + (atom-2 level),
//   i.e. atom-1 index major, giving dimension 16 with |rr> at index 15.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ryd/errors.hpp"

namespace ryd {

using Cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr Cx kI{0.0, 1.0};

// Tolerances shared across the library.
inline constexpr double kHermTol = 1e-12;      // asserted-Hermitian operators
inline constexpr double kStateNormTol = 1e-9;  // normalized state vectors
inline constexpr double kRhoHermTol = 1e-10;   // density matrix Hermiticity
inline constexpr double kRhoTraceTol = 1e-9;   // density matrix trace
inline constexpr double kRhoEigFloor = -1e-8;  // roundoff floor for positivity

enum class Level : int { g0 = 0, g1 = 1, p = 2, r = 3 };

inline constexpr int kLevels = 4;
inline constexpr int kPairDim = 16;
inline constexpr int kRRIndex = 15;  // |rr> in the product basis

inline int level_index(Level l) { return static_cast<int>(l); }

// Product-basis index, atom-1 major.
inline int pair_index(Level a, Level b) {
    return kLevels * level_index(a) + level_index(b);
}

inline Vec ket(Level l) {
    Vec v = Vec::Zero(kLevels);
    v(level_index(l)) = 1.0;
    return v;
}

inline Vec ket2(Level a, Level b) {
    Vec v = Vec::Zero(kPairDim);
    v(pair_index(a, b)) = 1.0;
    return v;
}

// |a><b| on a single atom.
inline Mat transition(Level a, Level b) {
    Mat m = Mat::Zero(kLevels, kLevels);
    m(level_index(a), level_index(b)) = 1.0;
    return m;
}

inline double hermiticity_defect(const Mat& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const Mat& a, double tol = kHermTol) {
    if (a.rows() != a.cols())
        throw InvalidDimension("hermitian check on a non-square matrix");
    double defect = hermiticity_defect(a);
    if (defect >= tol)
        throw ContractViolation("matrix is not Hermitian: max|A - A^dag| = " +
                                std::to_string(defect));
}

// Kronecker product, atom-1 index major: (a (x) b)[i*nb+k, j*nb+l] = a[i,j] b[k,l].
inline Mat tensor(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() == 0 || b.rows() == 0)
        throw InvalidDimension("tensor requires non-empty square operators");
    const Eigen::Index na = a.rows(), nb = b.rows();
    Mat out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
    return out;
}

inline Vec tensor(const Vec& a, const Vec& b) {
    if (a.size() == 0 || b.size() == 0)
        throw InvalidDimension("tensor requires non-empty vectors");
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline Mat dagger(const Mat& a) { return a.adjoint(); }

inline Vec normalized(Vec v) {
    const double n = v.norm();
    if (n <= 0.0)
        throw ContractViolation("cannot normalize a zero vector");
    return v / n;
}

// Rank-1 projector |v><v|.
inline Mat projector(const Vec& v) { return v * v.adjoint(); }

// A 16x16 (or smaller) density matrix: Hermitian, unit trace, positive
// up to the roundoff floor. Validation runs on construction.
class DensityMatrix {
public:
    explicit DensityMatrix(Mat m) : m_(std::move(m)) { validate(); }

    static DensityMatrix pure(const Vec& psi) {
        return DensityMatrix(projector(normalized(psi)));
    }

    static DensityMatrix maximally_mixed(int dim) {
        return DensityMatrix(Mat::Identity(dim, dim) / static_cast<double>(dim));
    }

    const Mat& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }

    void validate() const {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw InvalidDimension("density matrix must be square");
        const double herm = hermiticity_defect(m_);
        if (herm >= kRhoHermTol)
            throw ContractViolation("density matrix not Hermitian: defect " +
                                    std::to_string(herm));
        const double tr_err = std::abs(m_.trace().real() - 1.0) + std::abs(m_.trace().imag());
        if (tr_err >= kRhoTraceTol)
            throw ContractViolation("density matrix trace deviates from 1 by " +
                                    std::to_string(tr_err));
        const double lam_min = min_eigenvalue();
        if (lam_min < kRhoEigFloor)
            throw ContractViolation("density matrix has eigenvalue " +
                                    std::to_string(lam_min) + " below the roundoff floor");
    }

private:
    Mat m_;
};

// <proj| rho |proj>. The projection state must be normalized; the result is
// real for valid inputs, the imaginary part is available as a diagnostic.
inline double expect(const DensityMatrix& rho, const Vec& proj, double* imag_part = nullptr) {
    if (proj.size() != rho.dim())
        throw InvalidDimension("projection state dimension does not match the state");
    if (std::abs(proj.norm() - 1.0) >= kStateNormTol)
        throw ContractViolation("projection state is not normalized");
    const Cx val = proj.dot(rho.matrix() * proj);  // Eigen dot conjugates the left factor
    if (imag_part) *imag_part = val.imag();
    return val.real();
}

struct HermitianEigen {
    Eigen::VectorXd values;  // ascending
    Mat vectors;             // orthonormal columns, same order
};

// Eigendecomposition of an asserted-Hermitian operator.
inline HermitianEigen eig_hermitian(const Mat& a) {
    require_hermitian(a, std::max(kHermTol, 1e-14 * a.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("Hermitian eigensolver did not converge");
    HermitianEigen out{es.eigenvalues(), es.eigenvectors()};
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double res = (a * out.vectors.col(k) - out.values(k) * out.vectors.col(k)).norm();
        if (res >= 1e-9 * scale)
            throw NumericalFailure("Hermitian eigenpair residual " + std::to_string(res));
    }
    return out;
}

struct GeneralEigen {
    Vec values;   // sorted by ascending |Im|, then ascending Re
    Mat vectors;  // unit-norm columns, same order
};

// Eigendecomposition of a general (possibly non-Hermitian, possibly defective)
// operator. Ordering: ascending |Im(lambda)| -- the slowest-decaying modes of a
// damped generator come first.
inline GeneralEigen eig_general(const Mat& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw InvalidDimension("eigendecomposition requires a non-empty square matrix");
    Eigen::ComplexEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("general eigensolver did not converge",
                               es.getMaxIterations() * a.rows());
    const Eigen::Index n = a.rows();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& vals = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const double ii = std::abs(vals(i).imag()), ij = std::abs(vals(j).imag());
        if (ii != ij) return ii < ij;
        return vals(i).real() < vals(j).real();
    });
    GeneralEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = vals(order[k]);
        out.vectors.col(k) = es.eigenvectors().col(order[k]).normalized();
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < n; ++k) {
        const double res = (a * out.vectors.col(k) - out.values(k) * out.vectors.col(k)).norm();
        if (res >= 1e-8 * scale)
            throw NumericalFailure("eigenpair residual " + std::to_string(res));
    }
    return out;
}

}  // namespace ryd
