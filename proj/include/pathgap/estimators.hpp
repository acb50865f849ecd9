#pragma once

// Monte-Carlo estimators over batches of paths. Every estimator reduces in fixed
// blocks of paths merged in index order, so reports do not depend on thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pathgap/bounds.hpp"
#include "pathgap/errors.hpp"
#include "pathgap/functionals.hpp"
#include "pathgap/geometry.hpp"
#include "pathgap/malliavin.hpp"
#include "pathgap/parallel.hpp"
#include "pathgap/path_sim.hpp"
#include "pathgap/stats.hpp"

namespace pathgap {

struct RunOptions {
    int threads = 1;
    bool antithetic = false;
};

/// Default resolution for horizon T: max(64, ceil(T / 1e-4)).
[[nodiscard]] inline int default_n_steps(double T)
{
    return std::max(64, static_cast<int>(std::ceil(T / 1e-4 - 1e-9)));
}

/// (K1, K2) = (|(d-1) kappa|, (d-1) kappa) for a constant-curvature model.
[[nodiscard]] inline CurvatureBounds constant_curvature_bounds(const ModelManifold& m)
{
    if (!m.is_constant_curvature()) throw ConfigError("synthetic manifold needs explicitly declared bounds");
    const double r = m.ricci_scalar();
    return {std::fabs(r), r};
}

enum class ChiDenominator {
    Exact,     // Var(F_T) = |a|^2 T
    Empirical  // sample variance of F_T on the same paths
};

struct ChiReport {
    double T = 0.0;
    int n_steps = 0;
    ChiDenominator denominator = ChiDenominator::Exact;
    EstimateWithCI chi;
    double predicted_first_order = 0.0;
    EstimateWithCI var_F;
    EstimateWithCI dirichlet;
    std::array<EstimateWithCI, 6> i_terms{};
};

struct ChiOptions {
    RunOptions run;
    ChiDenominator denominator = ChiDenominator::Exact;
};

/// chi_T = E int |D_tau F_T|^2 dtau / Var(F_T) for F_T = <a, w_T>.
[[nodiscard]] inline ChiReport estimate_chi(const ModelManifold& m, const Vec& a, double T, int n_steps,
                                            std::size_t n_paths, std::uint64_t seed, const ChiOptions& opt = {})
{
    if (!m.is_constant_curvature()) throw UnsupportedError("chi_T needs a constant-curvature manifold");
    if (a.size() != m.dim()) throw ConfigError("direction a has the wrong dimension");
    if (std::fabs(a.norm() - 1.0) > 1e-12) throw ConfigError("direction a must be a unit vector");
    if (n_paths < 2) throw ConfigError("chi_T needs at least two paths");

    const PathBatch batch(m, TimeGrid(T, n_steps), n_paths, seed, opt.run.antithetic);
    // slots: F, F^2, dirichlet, I1..I6
    using Acc = CoMoments<9>;
    const Acc acc = deterministic_reduce<Acc>(n_paths, opt.run.threads, [&](Acc& s, std::size_t k) {
        const PathSample p = batch[k];
        const auto t = linear_functional_terms(a, p, m);
        std::array<double, 9> x{t.F, t.F * t.F, t.dirichlet};
        std::copy(t.i_terms.begin(), t.i_terms.end(), x.begin() + 3);
        s.add(x);
    });

    ChiReport r;
    r.T = T;
    r.n_steps = n_steps;
    r.denominator = opt.denominator;
    r.predicted_first_order = 1.0 + 0.5 * T * m.ricci_scalar() * a.squaredNorm();
    r.dirichlet = acc.estimate(2, seed);
    for (std::size_t i = 0; i < 6; ++i) r.i_terms[i] = acc.estimate(3 + i, seed);

    const double m1 = acc.mean(0);
    const double m2 = acc.mean(1);
    const double var = m2 - m1 * m1;
    r.var_F = {var, acc.linear_stderr({-2.0 * m1, 1.0}), acc.count(), seed};
    if (!(var > 0.0)) throw DegenerateSampleError("sample variance of F_T is not positive");

    const double D = acc.mean(2);
    if (opt.denominator == ChiDenominator::Exact) {
        const double v = a.squaredNorm() * T;
        r.chi = {D / v, r.dirichlet.stderr / v, acc.count(), seed};
    } else {
        r.chi = {D / var, acc.linear_stderr({2.0 * m1 * D / (var * var), -D / (var * var), 1.0 / var}), acc.count(),
                 seed};
    }
    return r;
}

struct Theorem1Report {
    std::int64_t n_checks = 0;
    std::int64_t n_satisfied = 0;
    /// Largest (lhs - rhs) / rhs over all checks; negative when every check has room.
    double max_relative_violation = -std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;  // largest lhs / rhs
    double slack = 1e-8;

    [[nodiscard]] double satisfied_fraction() const noexcept
    {
        return n_checks > 0 ? static_cast<double>(n_satisfied) / static_cast<double>(n_checks) : 1.0;
    }
    [[nodiscard]] bool passed() const noexcept { return n_satisfied == n_checks; }

    void merge(const Theorem1Report& o) noexcept
    {
        n_checks += o.n_checks;
        n_satisfied += o.n_satisfied;
        max_relative_violation = std::max(max_relative_violation, o.max_relative_violation);
        max_ratio = std::max(max_ratio, o.max_ratio);
    }
};

/// Per-path check of int |D~F|^2 <= int Lambda |DF|^2 for every member of the family.
[[nodiscard]] inline Theorem1Report verify_theorem1(const ModelManifold& m, const CurvatureBounds& declared,
                                                    const std::vector<NamedFunctional>& family, double T, int n_steps,
                                                    std::size_t n_paths, std::uint64_t seed,
                                                    const RunOptions& run = {}, double slack = 1e-8)
{
    const auto req = required_times(family);
    const TimeGrid grid(T, n_steps, req);
    const ResolventGrid R(m, grid, declared);
    const auto lam = lambda_cell_integrals(grid, declared);
    const PathBatch batch(m, grid, n_paths, seed, run.antithetic);

    Theorem1Report out = deterministic_reduce<Theorem1Report>(n_paths, run.threads, [&](Theorem1Report& s, std::size_t k) {
        const PathSample p = batch[k];
        for (const auto& f : family) {
            const auto sides = theorem1_sides(f.F, p, R, lam);
            const double lhs = sides.damped_energy;
            const double rhs = sides.weighted_usual_energy;
            const double scale = std::max({rhs, lhs, std::numeric_limits<double>::min()});
            ++s.n_checks;
            if (lhs <= rhs + slack * scale) ++s.n_satisfied;
            if (rhs > 0.0) {
                s.max_relative_violation = std::max(s.max_relative_violation, (lhs - rhs) / rhs);
                s.max_ratio = std::max(s.max_ratio, lhs / rhs);
            } else if (lhs > 0.0) {
                s.max_relative_violation = std::numeric_limits<double>::infinity();
            }
        }
    });
    out.slack = slack;
    return out;
}

struct LsiReport {
    EstimateWithCI entropy;     // E F^2 log F^2 - E F^2 log E F^2
    EstimateWithCI rhs;         // 2 E int |D~F|^2
    EstimateWithCI gap;         // rhs - entropy
    EstimateWithCI variance;    // Var F
    EstimateWithCI poincare_gap;  // E int |D~F|^2 - Var F
    double z_threshold = 4.0;
    bool violated = false;
};

/// Statistical log-Sobolev check; flags a violation only beyond z_threshold standard errors.
[[nodiscard]] inline LsiReport verify_lsi(const ModelManifold& m, const CurvatureBounds& declared,
                                          const CylindricalFunctional& F, double T, int n_steps, std::size_t n_paths,
                                          std::uint64_t seed, const RunOptions& run = {}, double z_threshold = 4.0)
{
    if (n_paths < 2) throw ConfigError("LSI check needs at least two paths");
    const TimeGrid grid(T, n_steps, F.eval_times);
    const ResolventGrid R(m, grid, declared);
    const std::vector<double> unit_lambda(static_cast<std::size_t>(grid.n_steps()), 0.0);
    const PathBatch batch(m, grid, n_paths, seed, run.antithetic);

    // slots: F^2 log F^2, F^2, 2 int|D~F|^2, F
    using Acc = CoMoments<4>;
    const Acc acc = deterministic_reduce<Acc>(n_paths, run.threads, [&](Acc& s, std::size_t k) {
        const PathSample p = batch[k];
        const double f = evaluate(F, p);
        if (!(f > 0.0) || !std::isfinite(f)) throw DataError("LSI functional must be strictly positive and finite");
        const double q = f * f;
        const double e = theorem1_sides(F, p, R, unit_lambda).damped_energy;
        s.add({q * std::log(q), q, 2.0 * e, f});
    });

    LsiReport r;
    r.z_threshold = z_threshold;
    const double A = acc.mean(0);
    const double B = acc.mean(1);
    const double C = acc.mean(2);
    const double M = acc.mean(3);
    const double lb = std::log(B);
    r.entropy = {A - B * lb, acc.linear_stderr({1.0, -(lb + 1.0), 0.0, 0.0}), acc.count(), seed};
    r.rhs = acc.estimate(2, seed);
    r.gap = {C - A + B * lb, acc.linear_stderr({-1.0, lb + 1.0, 1.0, 0.0}), acc.count(), seed};
    r.variance = {B - M * M, acc.linear_stderr({0.0, 1.0, 0.0, -2.0 * M}), acc.count(), seed};
    r.poincare_gap = {0.5 * C - B + M * M, acc.linear_stderr({0.0, -1.0, 0.5, 2.0 * M}), acc.count(), seed};
    r.violated = r.gap.mean < -z_threshold * r.gap.stderr;
    return r;
}

struct SlopeReport {
    EstimateWithCI slope;
    double predicted = 0.0;  // <ric(u_0) a, a> / 2
    bool weighted = true;
    std::vector<ChiReport> points;

    [[nodiscard]] double relative_error() const
    {
        return predicted != 0.0 ? std::fabs(slope.mean - predicted) / std::fabs(predicted) : std::fabs(slope.mean);
    }
};

/// Seed used for the i-th horizon of a ladder.
[[nodiscard]] constexpr std::uint64_t ladder_seed(std::uint64_t seed, std::size_t i) noexcept
{
    return mix64(seed + 0x632BE59BD9B4E019ULL * (i + 1));
}

/// Weighted least-squares slope of chi_T - 1 against T through the origin.
/// n_steps_per_T <= 0 selects default_n_steps(T).
[[nodiscard]] inline SlopeReport small_time_slope(const ModelManifold& m, const Vec& a, const std::vector<double>& T_list,
                                                  int n_steps_per_T, std::size_t n_paths, std::uint64_t seed,
                                                  const ChiOptions& opt = {})
{
    if (T_list.size() < 4) throw ConfigError("slope fit needs a ladder of at least 4 horizons");
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (!(T_list[i] > 0.0)) throw ConfigError("ladder horizons must be > 0");
        for (std::size_t j = 0; j < i; ++j)
            if (T_list[j] == T_list[i]) throw ConfigError("ladder horizons must be distinct");
    }
    SlopeReport r;
    r.predicted = 0.5 * m.ricci_scalar() * a.squaredNorm();
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        const double T = T_list[i];
        const int n = n_steps_per_T > 0 ? n_steps_per_T : default_n_steps(T);
        r.points.push_back(estimate_chi(m, a, T, n, n_paths, ladder_seed(seed, i), opt));
    }
    const bool all_weighted = std::all_of(r.points.begin(), r.points.end(), [](const ChiReport& c) { return c.chi.stderr > 0.0; });
    r.weighted = all_weighted;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& c : r.points) {
        const double w = all_weighted ? 1.0 / (c.chi.stderr * c.chi.stderr) : 1.0;
        sxx += w * c.T * c.T;
        sxy += w * c.T * (c.chi.mean - 1.0);
    }
    const double slope = sxy / sxx;
    double se = 0.0;
    if (all_weighted) {
        se = 1.0 / std::sqrt(sxx);
    } else {
        double rss = 0.0;
        for (const auto& c : r.points) rss += std::pow(c.chi.mean - 1.0 - slope * c.T, 2);
        se = std::sqrt(rss / static_cast<double>(r.points.size() - 1) / sxx);
    }
    if (!std::isfinite(slope) || !std::isfinite(se)) throw DegenerateSampleError("slope fit is ill-conditioned");
    r.slope = {slope, se, static_cast<std::int64_t>(r.points.size()), seed};
    return r;
}

/// Empirical delta-hat in E sum_i |C_i(w, s, 0) a|^2 <= delta s: per-path least-squares
/// slope through the origin over the grid nodes, averaged over paths.
[[nodiscard]] inline EstimateWithCI estimate_delta(const ModelManifold& m, const Vec& a, double T, int n_steps,
                                                   std::size_t n_paths, std::uint64_t seed, const RunOptions& run = {})
{
    const TimeGrid grid(T, n_steps);
    const PathBatch batch(m, grid, n_paths, seed, run.antithetic);
    double stt = 0.0;
    for (double t : grid.times()) stt += t * t;
    using Acc = CoMoments<1>;
    const Acc acc = deterministic_reduce<Acc>(n_paths, run.threads, [&](Acc& s, std::size_t k) {
        const auto c = curvature_integral_norms(a, batch[k], m);
        double sty = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) sty += grid[i] * c[i];
        s.add({sty / stt});
    });
    return acc.estimate(0, seed);
}

}  // namespace pathgap
