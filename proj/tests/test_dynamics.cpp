#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "ryd/dynamics.hpp"

using namespace ryd;

namespace {

Mat random_density(int n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Cx(g(rng), g(rng));
    Mat rho = a * a.adjoint();
    return rho / rho.trace().real();
}

double trace_distance(const Mat& a, const Mat& b) {
    const auto ev = eig_hermitian(Mat(a - b));
    return 0.5 * ev.values.cwiseAbs().sum();
}

}  // namespace

TEST_CASE("right-hand side: free and single-channel cases") {
    const int n = kPairDim;
    const DensityMatrix rho = DensityMatrix::maximally_mixed(n);
    REQUIRE(lindblad_rhs(rho, Mat::Zero(n, n), {}).cwiseAbs().maxCoeff() == 0.0);

    // |p0><p0| decaying through the optical channel of atom 1: population
    // flows |p> -> |0> at rate gamma0
    ModelParams p = fixtures::strong_drive();
    p.gamma1 = 0.0;
    p.gammaR = 0.0;
    const auto jumps = jump_operators(p);
    const DensityMatrix rho_p0 = DensityMatrix::pure(ket2(Level::p, Level::g0));
    const Mat drho = lindblad_rhs(rho_p0, Mat::Zero(n, n), jumps);
    Mat expected = Mat::Zero(n, n);
    const int i_p0 = pair_index(Level::p, Level::g0);
    const int i_00 = pair_index(Level::g0, Level::g0);
    expected(i_00, i_00) = p.gamma0;
    expected(i_p0, i_p0) = -p.gamma0;
    REQUIRE((drho - expected).cwiseAbs().maxCoeff() < 1e-12 * p.gamma0);
}

TEST_CASE("the target singlet is dark") {
    // Dissipative part alone: exactly stationary at gammaR = 0, any omega.
    const ModelParams p = fixtures::strong_drive_no_rydberg_decay();
    const auto st = named_states(p);
    const DensityMatrix rho_ds = DensityMatrix::pure(st.at("DS"));
    const Mat dissipator_only =
        lindblad_rhs(rho_ds, Mat::Zero(kPairDim, kPairDim), jump_operators(p));
    REQUIRE(dissipator_only.cwiseAbs().maxCoeff() < 1e-12);

    // Full generator: exactly stationary once the Raman coupling is off,
    // independent of the pair shift.
    for (double vrr_mhz : {0.0, 5.0, 20.0, 200.0}) {
        ModelParams q = p;
        q.omega_raman = 0.0;
        q.vrr = mhz_to_rad_us(vrr_mhz);
        const Mat full = lindblad_rhs(rho_ds, total_hamiltonian(q), jump_operators(q));
        REQUIRE(full.cwiseAbs().maxCoeff() < 1e-12);
    }

    // With the Raman coupling on, the only non-stationarity is the coherent
    // leak |DS> -> singlet(1, r) of size omega * Omega_1 / Omega.
    const Mat full = lindblad_rhs(rho_ds, total_hamiltonian(p), jump_operators(p));
    const double leak = p.omega_raman * p.omega1 / p.omega();
    REQUIRE(full.norm() == Catch::Approx(std::sqrt(2.0) * leak).epsilon(1e-9));
}

TEST_CASE("right-hand side preserves trace and Hermiticity") {
    std::mt19937 rng(808);
    const ModelParams p = fixtures::strong_drive();
    const Mat h = total_hamiltonian(p);
    const auto jumps = jump_operators(p);
    const double scale = h.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix rho(random_density(kPairDim, rng));
        const Mat d = lindblad_rhs(rho, h, jumps);
        REQUIRE(std::abs(d.trace()) < 1e-11 * scale);
        REQUIRE(hermiticity_defect(d) < 1e-11 * scale);
    }
}

TEST_CASE("fast generator agrees with the reference right-hand side") {
    std::mt19937 rng(909);
    for (auto mode : {BlockadeMode::finite, BlockadeMode::truncate}) {
        const SystemOperators sys = build_system(fixtures::strong_drive(), mode);
        const LindbladGenerator gen(sys);
        for (int trial = 0; trial < 5; ++trial) {
            const DensityMatrix rho(random_density(sys.dim, rng));
            const Mat a = gen.apply(rho.matrix());
            const Mat b = lindblad_rhs(rho, sys.hamiltonian, sys.jumps);
            REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-11 * b.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("stacked-column generator matrix") {
    // trivial generator
    REQUIRE(build_liouvillian(Mat::Zero(4, 4), {}).cwiseAbs().maxCoeff() == 0.0);

    const SystemOperators sys = build_system(fixtures::strong_drive());
    const Mat lv = build_liouvillian(sys);
    REQUIRE(lv.rows() == 256);

    // agreement with the direct right-hand side on random states
    std::mt19937 rng(1010);
    const double scale = lv.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho(random_density(kPairDim, rng));
        const Vec via_l = lv * stack_columns(rho.matrix());
        const Mat direct = lindblad_rhs(rho, sys.hamiltonian, sys.jumps);
        REQUIRE((via_l - stack_columns(direct)).cwiseAbs().maxCoeff() < 1e-10 * scale);
    }

    // the trace functional annihilates the generator
    Eigen::RowVectorXcd tr_row = Eigen::RowVectorXcd::Zero(256);
    for (int j = 0; j < 16; ++j) tr_row(j * 16 + j) = 1.0;
    REQUIRE((tr_row * lv).cwiseAbs().maxCoeff() < 1e-10 * scale);

    // the dark singlet is a null vector once the Raman coupling is off
    ModelParams q = fixtures::strong_drive_no_rydberg_decay();
    q.omega_raman = 0.0;
    const SystemOperators sys0 = build_system(q);
    const Mat lv0 = build_liouvillian(sys0);
    const Vec stacked_ds = stack_columns(projector(sys0.ds));
    REQUIRE((lv0 * stacked_ds).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integration: degenerate horizon and early-time shape") {
    const SystemOperators sys = build_system(fixtures::strong_drive());
    const DensityMatrix rho0 = initial_state("11", sys);

    const Trajectory empty = integrate(rho0, sys, 0.0);
    REQUIRE(empty.size() == 1);
    REQUIRE(empty.times[0] == 0.0);
    REQUIRE((empty.final_state - rho0.matrix()).cwiseAbs().maxCoeff() == 0.0);

    // fast scramble into the uncoupled manifold: F reaches ~1/4 within half a
    // microsecond while the purity drops to a comparable value, then the slow
    // climb takes over
    IntegratorOptions opts;
    opts.sample_every = 0.01;
    const Trajectory traj = integrate(rho0, sys, 3.0, opts);
    double t_quarter = -1.0;
    double purity_min = 1.0;
    for (size_t i = 0; i < traj.size(); ++i) {
        if (t_quarter < 0.0 && traj.records[i].fidelity >= 0.24) t_quarter = traj.times[i];
        if (traj.times[i] <= 1.0) purity_min = std::min(purity_min, traj.records[i].purity);
    }
    REQUIRE(t_quarter > 0.0);
    REQUIRE(t_quarter < 1.0);
    REQUIRE(purity_min > 0.15);
    REQUIRE(purity_min < 0.35);
    REQUIRE(traj.final_fidelity() > 0.4);  // the climb toward the singlet is underway

    for (double e : traj.trace_err) REQUIRE(e < 1e-7);
}

TEST_CASE("integration accuracy is step-size independent") {
    const SystemOperators sys = build_system(fixtures::strong_drive());
    const DensityMatrix rho0 = initial_state("11", sys);
    IntegratorOptions coarse;
    coarse.dt_max = 0.02;
    coarse.sample_every = 1.0;
    IntegratorOptions fine = coarse;
    fine.dt_max = 0.01;
    const Trajectory a = integrate(rho0, sys, 6.0, coarse);
    const Trajectory b = integrate(rho0, sys, 6.0, fine);
    REQUIRE(std::abs(a.final_fidelity() - b.final_fidelity()) < 1e-6);
}

TEST_CASE("steady state at the strong-drive point") {
    const ModelParams p = fixtures::strong_drive_no_rydberg_decay();
    const SystemOperators sys = build_system(p);
    const auto res = solve_steady_state(sys);
    REQUIRE(res.null_dimension == 1);
    REQUIRE(res.residual < 1e-9);
    const double f = expect(*res.rho, sys.ds);
    const double xi = p.xi();
    REQUIRE(f >= 0.999);
    REQUIRE(f <= 1.0 - 2.0 * xi * xi + 1e-6);

    // finite Rydberg lifetime: the fidelity deficit grows linearly with the
    // decay rate; the measured coefficient is pinned as a regression value
    // (the refill of the singlet is bottlenecked by the slow relaxation rate)
    const ModelParams pr = fixtures::strong_drive();
    const SystemOperators sysr = build_system(pr);
    const double fr = expect(steady_state(sysr), sysr.ds);
    REQUIRE(1.0 - fr == Catch::Approx(6.93e-3).epsilon(0.05));

    ModelParams pr2 = pr;
    pr2.gammaR *= 2.0;
    const SystemOperators sysr2 = build_system(pr2);
    const double fr2 = expect(steady_state(sysr2), sysr2.ds);
    REQUIRE((1.0 - fr2) / (1.0 - fr) == Catch::Approx(2.0).epsilon(0.15));
}

TEST_CASE("steady state is degenerate without the Raman coupling") {
    ModelParams p = fixtures::strong_drive_no_rydberg_decay();
    p.omega_raman = 0.0;
    const SystemOperators sys = build_system(p);
    const auto res = solve_steady_state(sys);
    REQUIRE(res.null_dimension > 1);
    REQUIRE_FALSE(res.rho.has_value());
    REQUIRE_THROWS_AS(steady_state(sys), DegenerateSteadyState);
}

TEST_CASE("trajectory approaches the directly computed steady state") {
    const ModelParams p = fixtures::strong_drive();
    const SystemOperators sys = build_system(p);
    const DensityMatrix rho_ss = steady_state(sys);
    IntegratorOptions opts;
    opts.sample_every = 5.0;
    const Trajectory traj = integrate(initial_state("11", sys), sys, 40.0, opts);
    REQUIRE(trace_distance(traj.final_state, rho_ss.matrix()) < 5e-3);
}

TEST_CASE("starting in the target state stays flat") {
    const SystemOperators sys = build_system(fixtures::strong_drive_no_rydberg_decay());
    const Trajectory traj = integrate(initial_state("DS", sys), sys, 5.0);
    for (const auto& r : traj.records) REQUIRE(r.fidelity > 0.999);
}
