#pragma once

// Master-equation propagation and direct steady-state extraction.
//
// The generator is used in the standard trace-preserving form
//   d rho/dt = -i (H_nh rho - rho H_nh^dag) + sum_k C_k rho C_k^dag,
//   H_nh = H - (i/2) sum_k C_k^dag C_k,
// so population flows out of the decaying levels and Tr(d rho/dt) = 0.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ryd/algebra.hpp"
#include "ryd/model.hpp"
#include "ryd/observables.hpp"

namespace ryd {

// Reference implementation of the right-hand side, dense and explicit.
// The result is traceless and Hermitian (within roundoff) for Hermitian rho.
inline Mat lindblad_rhs(const DensityMatrix& rho, const Mat& h, const std::vector<Jump>& jumps) {
    const Mat& r = rho.matrix();
    if (h.rows() != r.rows())
        throw InvalidDimension("Hamiltonian dimension does not match the state");
    Mat out = -kI * (h * r - r * h);
    for (const auto& j : jumps) {
        if (j.op.rows() != r.rows())
            throw InvalidDimension("jump operator dimension does not match the state");
        const Mat cdc = j.op.adjoint() * j.op;
        out += j.op * r * j.op.adjoint() - 0.5 * (cdc * r + r * cdc);
    }
    return out;
}

// Precomputed fast form of the same generator. rho must be Hermitian; all
// Runge-Kutta stage values are real combinations of Hermitian matrices, so
// this holds throughout the integration.
class LindbladGenerator {
public:
    LindbladGenerator(const Mat& h, const std::vector<Jump>& jumps) : dim_(h.rows()) {
        Mat anti = Mat::Zero(dim_, dim_);
        for (const auto& j : jumps) anti += j.op.adjoint() * j.op;
        h_nh_ = h - 0.5 * kI * anti;
        for (const auto& j : jumps) {
            std::vector<std::pair<std::pair<int, int>, Cx>> nnz;
            for (int c = 0; c < dim_; ++c)
                for (int r = 0; r < dim_; ++r)
                    if (j.op(r, c) != Cx(0.0, 0.0)) nnz.push_back({{r, c}, j.op(r, c)});
            if (nnz.size() * nnz.size() > 4 * static_cast<size_t>(dim_ * dim_)) {
                dense_jumps_.push_back(j.op);  // too dense for the scatter path
                continue;
            }
            for (const auto& [rc1, v1] : nnz)
                for (const auto& [rc2, v2] : nnz)
                    terms_.push_back({rc1.first, rc2.first, rc1.second, rc2.second,
                                      v1 * std::conj(v2)});
        }
        scratch_.resize(dim_, dim_);
    }

    explicit LindbladGenerator(const SystemOperators& sys)
        : LindbladGenerator(sys.hamiltonian, sys.jumps) {}

    int dim() const { return dim_; }
    const Mat& h_nonhermitian() const { return h_nh_; }

    // out = generator applied to rho. Not safe to call concurrently on one
    // instance (owns scratch storage); give each worker its own copy.
    void apply(const Mat& rho, Mat& out) const {
        scratch_.noalias() = h_nh_ * rho;
        scratch_ *= -kI;                      // -i H_nh rho
        out = scratch_ + scratch_.adjoint();  // + i rho H_nh^dag, using rho = rho^dag
        for (const auto& t : terms_) out(t.to_r, t.to_c) += t.w * rho(t.from_r, t.from_c);
        for (const auto& c : dense_jumps_) out.noalias() += c * rho * c.adjoint();
    }

    Mat apply(const Mat& rho) const {
        Mat out(dim_, dim_);
        apply(rho, out);
        return out;
    }

private:
    struct ScatterTerm {
        int to_r, to_c, from_r, from_c;
        Cx w;
    };
    Eigen::Index dim_;
    Mat h_nh_;
    std::vector<ScatterTerm> terms_;
    std::vector<Mat> dense_jumps_;
    mutable Mat scratch_;
};

struct IntegratorOptions {
    double dt_max = 0.02;        // us
    double sample_every = 0.05;  // us
    double abs_tol = 1e-9;       // max-norm error per step
    bool store_states = false;
};

// Cumulative record of trace drift events (drift is logged, never corrected).
struct TraceDriftLog {
    int events = 0;
    double max_drift = 0.0;
    double first_t = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<double> times;  // us, strictly increasing, starts at 0
    std::vector<ObservableRecord> records;
    std::vector<double> trace_err;  // |Tr rho - 1| at sample times
    std::vector<Mat> states;        // filled only when store_states is set
    Mat final_state;
    TraceDriftLog drift;
    std::vector<std::string> warnings;

    DensityMatrix final_density() const { return DensityMatrix(final_state); }
    double fidelity(size_t i) const { return records.at(i).fidelity; }
    double final_fidelity() const { return records.back().fidelity; }
    size_t size() const { return times.size(); }
};

using MeasureFn = std::function<ObservableRecord(const DensityMatrix&)>;

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct DP5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

// Adaptive explicit Runge-Kutta propagation of the density matrix, sampling
// observables every `sample_every` and always at t_end. Trace drift beyond
// 1e-9 is logged; beyond 1e-6 the run aborts. Sampled states are validated
// (Hermitian, unit trace, positive up to the roundoff floor).
inline Trajectory integrate(const DensityMatrix& rho0, const LindbladGenerator& gen,
                            double t_end, const IntegratorOptions& opts,
                            const MeasureFn& measurer) {
    if (t_end < 0.0) throw ContractViolation("t_end must be non-negative");
    if (opts.dt_max <= 0.0 || opts.sample_every <= 0.0)
        throw ContractViolation("dt_max and sample_every must be positive");
    if (rho0.dim() != gen.dim())
        throw InvalidDimension("initial state dimension does not match the generator");

    using B = detail::DP5;
    const int n = gen.dim();
    Mat rho = rho0.matrix();
    Mat k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n);
    Mat y(n, n), y5(n, n), err(n, n);

    Trajectory traj;
    auto emit = [&](double t) {
        DensityMatrix state(rho);
        traj.times.push_back(t);
        traj.records.push_back(measurer(state));
        traj.trace_err.push_back(std::abs(rho.trace().real() - 1.0));
        if (opts.store_states) traj.states.push_back(rho);
    };
    try {
        emit(0.0);
    } catch (const ContractViolation& e) {
        throw IntegratorFailure(std::string("initial state rejected: ") + e.what(), 0.0);
    }
    if (t_end == 0.0) {
        traj.final_state = rho;
        return traj;
    }

    const size_t n_samples = static_cast<size_t>(std::ceil(t_end / opts.sample_every - 1e-12));
    double t = 0.0;
    double h = std::min(opts.dt_max, 1e-3);
    gen.apply(rho, k1);  // first-same-as-last seed

    for (size_t s = 1; s <= n_samples; ++s) {
        const double t_target = std::min(t_end, static_cast<double>(s) * opts.sample_every);
        while (t < t_target) {
            const double h_free = std::min(h, opts.dt_max);
            const bool clipped = h_free >= t_target - t;
            const double hs = clipped ? t_target - t : h_free;
            if (hs < 1e-12 * std::max(1.0, t))
                throw StiffnessError("step size underflow", t, hs);

            y = rho + hs * (B::a21 * k1);
            gen.apply(y, k2);
            y = rho + hs * (B::a31 * k1 + B::a32 * k2);
            gen.apply(y, k3);
            y = rho + hs * (B::a41 * k1 + B::a42 * k2 + B::a43 * k3);
            gen.apply(y, k4);
            y = rho + hs * (B::a51 * k1 + B::a52 * k2 + B::a53 * k3 + B::a54 * k4);
            gen.apply(y, k5);
            y = rho + hs * (B::a61 * k1 + B::a62 * k2 + B::a63 * k3 + B::a64 * k4 + B::a65 * k5);
            gen.apply(y, k6);
            y5 = rho + hs * (B::b1 * k1 + B::b3 * k3 + B::b4 * k4 + B::b5 * k5 + B::b6 * k6);
            gen.apply(y5, k7);
            err = hs * (B::e1 * k1 + B::e3 * k3 + B::e4 * k4 + B::e5 * k5 + B::e6 * k6 +
                        B::e7 * k7);
            const double err_norm = err.cwiseAbs().maxCoeff() / opts.abs_tol;

            const double fac =
                std::clamp(0.9 * std::pow(std::max(err_norm, 1e-10), -0.2), 0.2, 5.0);
            if (err_norm <= 1.0) {
                t += hs;
                rho = 0.5 * (y5 + y5.adjoint());  // project roundoff back to Hermitian
                k1.swap(k7);
                h = std::min(hs * fac, opts.dt_max);

                const double drift = std::abs(rho.trace().real() - 1.0);
                if (drift > 1e-6)
                    throw IntegratorFailure(
                        "trace drift " + std::to_string(drift) + " exceeds the hard limit", t);
                if (drift > 1e-9) {
                    if (traj.drift.events == 0) {
                        traj.drift.first_t = t;
                        traj.warnings.push_back("trace drift above 1e-9 first seen at t = " +
                                                std::to_string(t) + " us");
                    }
                    traj.drift.events += 1;
                    traj.drift.max_drift = std::max(traj.drift.max_drift, drift);
                }
            } else {
                h = hs * fac;  // rejected; retry with a smaller step
            }
        }
        try {
            emit(t);
        } catch (const ContractViolation& e) {
            throw IntegratorFailure(std::string("state validation failed: ") + e.what(), t);
        }
    }
    traj.final_state = rho;
    return traj;
}

inline Trajectory integrate(const DensityMatrix& rho0, const SystemOperators& sys, double t_end,
                            const IntegratorOptions& opts = {}) {
    LindbladGenerator gen(sys);
    return integrate(rho0, gen, t_end, opts,
                     [&sys](const DensityMatrix& r) { return measure(r, sys); });
}

inline Trajectory integrate(const DensityMatrix& rho0, const ModelParams& p, double t_end,
                            double dt_max = 0.02, double sample_every = 0.05) {
    IntegratorOptions opts;
    opts.dt_max = dt_max;
    opts.sample_every = sample_every;
    return integrate(rho0, build_system(p), t_end, opts);
}

// Generator as a dim^2 x dim^2 matrix acting on column-stacked rho.
// vec(A X B) = (B^T (x) A) vec(X) with column stacking, hence
//   L = -i (I (x) H_nh) + i (conj(H_nh) (x) I) + sum_k conj(C_k) (x) C_k.
inline Mat build_liouvillian(const Mat& h, const std::vector<Jump>& jumps) {
    const Eigen::Index n = h.rows();
    Mat anti = Mat::Zero(n, n);
    for (const auto& j : jumps) anti += j.op.adjoint() * j.op;
    const Mat h_nh = h - 0.5 * kI * anti;
    const Mat id = Mat::Identity(n, n);
    Mat lv = -kI * tensor(id, h_nh) + kI * tensor(h_nh.conjugate(), id);
    for (const auto& j : jumps) lv += tensor(j.op.conjugate(), j.op);
    return lv;
}

inline Mat build_liouvillian(const SystemOperators& sys) {
    return build_liouvillian(sys.hamiltonian, sys.jumps);
}

inline Mat build_liouvillian(const ModelParams& p) {
    return build_liouvillian(build_system(p));
}

inline Vec stack_columns(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unstack_columns(const Vec& v, int n) {
    return Eigen::Map<const Mat>(v.data(), n, n);
}

struct SteadyStateResult {
    std::optional<DensityMatrix> rho;  // empty when the null space is degenerate
    double residual = 0.0;             // ||L vec(rho)||_2
    int null_dimension = 0;
    std::vector<Mat> null_basis;  // raw null-space matrices, unnormalized
};

// Null-space extraction from the dense generator spectrum. Eigenvalues with
// |lambda| < 1e-9 rad/us count as zero; genuine relaxation rates sit orders of
// magnitude above that for any parameters of interest here.
inline SteadyStateResult solve_steady_state(const Mat& h, const std::vector<Jump>& jumps) {
    const int n = static_cast<int>(h.rows());
    const Mat lv = build_liouvillian(h, jumps);
    Eigen::ComplexEigenSolver<Mat> es(lv);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("generator eigensolve did not converge");

    constexpr double kNullTol = 1e-9;
    SteadyStateResult out;
    int best = 0;
    for (int k = 0; k < lv.rows(); ++k) {
        if (std::abs(es.eigenvalues()(k)) < kNullTol) {
            out.null_dimension += 1;
            out.null_basis.push_back(unstack_columns(es.eigenvectors().col(k), n));
        }
        if (std::abs(es.eigenvalues()(k)) < std::abs(es.eigenvalues()(best))) best = k;
    }
    if (out.null_dimension == 0)
        throw NumericalFailure("no steady state found: smallest |eigenvalue| = " +
                               std::to_string(std::abs(es.eigenvalues()(best))));
    if (out.null_dimension > 1) return out;

    Vec x = es.eigenvectors().col(best);
    // One step of inverse iteration tightens the residual when the generator
    // norm is large (e.g. blockade surrogate).
    auto residual_of = [&](const Vec& v) { return (lv * v).norm(); };
    if (residual_of(x) > 0.5e-9) {
        Mat shifted = lv;
        shifted.diagonal().array() += Cx(1e-10, 0.0);
        x = shifted.partialPivLu().solve(x).normalized();
    }

    Mat m = unstack_columns(x, n);
    const Cx tr = m.trace();
    if (std::abs(tr) < 1e-8)
        throw NumericalFailure("steady-state candidate is traceless");
    m *= std::conj(tr) / std::abs(tr);  // rotate the overall phase so the trace is real
    m = 0.5 * (m + m.adjoint());
    m /= m.trace().real();

    out.residual = residual_of(stack_columns(m));
    if (out.residual >= 1e-9)
        throw NumericalFailure("steady-state residual " + std::to_string(out.residual));
    out.rho = DensityMatrix(m);
    return out;
}

inline SteadyStateResult solve_steady_state(const SystemOperators& sys) {
    return solve_steady_state(sys.hamiltonian, sys.jumps);
}

inline DensityMatrix steady_state(const SystemOperators& sys) {
    auto res = solve_steady_state(sys);
    if (res.null_dimension > 1) throw DegenerateSteadyState(res.null_dimension);
    return *res.rho;
}

inline DensityMatrix steady_state(const ModelParams& p,
                                  BlockadeMode mode = BlockadeMode::finite) {
    if (p.gamma0 + p.gamma1 + p.gammaR <= 0.0)
        throw ContractViolation("steady state requires at least one nonzero decay rate");
    return steady_state(build_system(p, mode));
}

}  // namespace ryd
