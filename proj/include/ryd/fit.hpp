#pragma once

// Relaxation-curve fitting: F(t) = F_max (1 - d exp(-gamma_E (t - tau))) for
// t past the initial transient, and tabulation of fit results across sweeps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ryd/dynamics.hpp"
#include "ryd/errors.hpp"

namespace ryd {

struct FitResult {
    double f_max = 0.0;    // plateau fidelity
    double d = 0.0;        // missing fraction at t = tau
    double gamma_e = 0.0;  // relaxation rate, 1/us
    double tau = 0.0;      // window start, us
    double rms_residual = 0.0;  // rms of model - data over the fit window, in F units
    double window_end = 0.0;    // us, last sample used
    int n_points = 0;
    bool window_shrunk = false;  // nonpositive log arguments were dropped
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n != y.size() || n < 2) throw FitError("linear fit needs at least two points");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw FitError("linear fit with degenerate abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

// Default fit-window start: five optical lifetimes past t = 0.
inline double default_fit_tau(const ModelParams& p) { return 5.0 / p.gamma_p(); }

// Extract the relaxation rate from a fidelity trace.
//
// Procedure: the plateau F_max is the mean of the last 5% of samples; the
// plateau scatter defines the noise floor; log(F_max - F) is regressed on t
// over [tau, first t where F_max - F < 10 * noise]. Samples with nonpositive
// log arguments are dropped (window shrink, reported in the result).
inline FitResult fit_entanglement_rate(const Trajectory& traj, double tau) {
    const size_t n = traj.size();
    if (n < 10) throw FitError("trajectory too short to fit");
    const double t_end = traj.times.back();

    // Plateau requirement: the curve must have flattened by the end.
    const auto mid = std::lower_bound(traj.times.begin(), traj.times.end(), 0.5 * t_end);
    const double f_mid = traj.records[mid - traj.times.begin()].fidelity;
    if (std::abs(traj.records.back().fidelity - f_mid) >= 0.01)
        throw FitError("insufficient horizon: fidelity has not plateaued (|F(t_end) - F(t_end/2)| = " +
                       std::to_string(std::abs(traj.records.back().fidelity - f_mid)) + ")");

    const size_t tail = std::max<size_t>(3, n / 20);
    double f_max = 0.0;
    for (size_t i = n - tail; i < n; ++i) f_max += traj.records[i].fidelity;
    f_max /= tail;
    double var = 0.0;
    for (size_t i = n - tail; i < n; ++i) {
        const double dfi = traj.records[i].fidelity - f_max;
        var += dfi * dfi;
    }
    const double noise = std::max(std::sqrt(var / tail), 1e-12);

    FitResult fit;
    fit.tau = tau;
    fit.f_max = f_max;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < n; ++i) {
        const double t = traj.times[i];
        if (t < tau) continue;
        const double gap = f_max - traj.records[i].fidelity;
        if (gap < 10.0 * noise) break;  // inside the plateau scatter, stop here
        if (gap <= 0.0) {
            fit.window_shrunk = true;
            continue;
        }
        xs.push_back(t - tau);
        ys.push_back(std::log(gap));
        fit.window_end = t;
    }
    if (xs.size() < 3)
        throw FitError("fit window is empty: no decaying segment above the noise floor");

    const LinearFit lf = linear_fit(xs, ys);
    fit.gamma_e = -lf.slope;
    fit.d = std::exp(lf.intercept) / f_max;
    fit.n_points = static_cast<int>(xs.size());
    if (!(fit.gamma_e > 0.0))
        throw FitError("fitted relaxation rate is not positive: " + std::to_string(fit.gamma_e));

    double ss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double model = f_max * (1.0 - fit.d * std::exp(-fit.gamma_e * xs[i]));
        const double data = f_max - std::exp(ys[i]);
        ss += (model - data) * (model - data);
    }
    fit.rms_residual = std::sqrt(ss / xs.size());
    return fit;
}

// One row of a sweep: the varied value, the fit (if it succeeded), and the
// end-of-run fidelity.
struct SweepRow {
    double param_value = 0.0;
    std::optional<FitResult> fit;
    double f_final = 0.0;
    std::string note;  // set when the point was flagged instead of fitted
};

struct SweepTable {
    std::string axis;
    std::vector<SweepRow> rows;
};

// Align per-trajectory fits and final fidelities into a table keyed by the
// varied parameter. Points whose fit fails are flagged, not dropped.
inline SweepTable scan_observable(const std::string& axis, const std::vector<double>& values,
                                  const std::vector<Trajectory>& trajs, double tau) {
    if (values.size() != trajs.size())
        throw ContractViolation("one trajectory per axis value required");
    SweepTable table;
    table.axis = axis;
    for (size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.param_value = values[i];
        row.f_final = trajs[i].final_fidelity();
        try {
            row.fit = fit_entanglement_rate(trajs[i], tau);
        } catch (const FitError& e) {
            row.note = e.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// Largest pointwise fidelity difference between any two trajectories.
// Grids must match exactly when `strict`; otherwise trajectories are compared
// on the first grid by linear interpolation.
inline double max_pairwise_fidelity_spread(const std::vector<Trajectory>& trajs,
                                           bool strict = true) {
    if (trajs.size() < 2) return 0.0;
    const auto& ref = trajs.front();
    auto value_at = [](const Trajectory& tr, double t) {
        const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t);
        if (it == tr.times.begin()) return tr.records.front().fidelity;
        if (it == tr.times.end()) return tr.records.back().fidelity;
        const size_t hi = it - tr.times.begin(), lo = hi - 1;
        const double w = (t - tr.times[lo]) / (tr.times[hi] - tr.times[lo]);
        return (1.0 - w) * tr.records[lo].fidelity + w * tr.records[hi].fidelity;
    };
    for (const auto& tr : trajs) {
        if (tr.times == ref.times) continue;
        if (strict)
            throw ContractViolation("trajectories sampled on different time grids");
    }
    double spread = 0.0;
    for (size_t i = 0; i < ref.times.size(); ++i) {
        double lo = std::numeric_limits<double>::max(), hi = -lo;
        for (const auto& tr : trajs) {
            const double f =
                (tr.times == ref.times) ? tr.records[i].fidelity : value_at(tr, ref.times[i]);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        spread = std::max(spread, hi - lo);
    }
    return spread;
}

}  // namespace ryd
