#pragma once

// Test functionals and synthetic Ricci paths used by the verifiers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pathgap/bounds.hpp"
#include "pathgap/geometry.hpp"
#include "pathgap/malliavin.hpp"
#include "pathgap/path_sim.hpp"

namespace pathgap {

struct NamedFunctional {
    std::string name;
    CylindricalFunctional F;
};

/// F = c.
[[nodiscard]] inline CylindricalFunctional constant_functional(double c, double t)
{
    return {{t}, [c](std::span<const Vec>) { return c; },
            [](std::span<const Vec> x) { return std::vector<Vec>{Vec::Zero(x[0].size())}; }};
}

/// F = exp(c <b, gamma_t>).
[[nodiscard]] inline CylindricalFunctional exp_linear_functional(const Vec& b, double c, double t)
{
    return {{t}, [b, c](std::span<const Vec> x) { return std::exp(c * b.dot(x[0])); },
            [b, c](std::span<const Vec> x) { return std::vector<Vec>{Vec(c * std::exp(c * b.dot(x[0])) * b)}; }};
}

/// F = 2 + sin<b1, gamma_t1> + 0.5 cos<b2, gamma_t2>.
[[nodiscard]] inline CylindricalFunctional two_slot_trig_functional(const Vec& b1, const Vec& b2, double t1, double t2)
{
    return {{t1, t2},
            [b1, b2](std::span<const Vec> x) { return 2.0 + std::sin(b1.dot(x[0])) + 0.5 * std::cos(b2.dot(x[1])); },
            [b1, b2](std::span<const Vec> x) {
                return std::vector<Vec>{Vec(std::cos(b1.dot(x[0])) * b1), Vec(-0.5 * std::sin(b2.dot(x[1])) * b2)};
            }};
}

/// F = 1 + 0.5 |gamma_t - x0|^2 (ambient distance).
[[nodiscard]] inline CylindricalFunctional quadratic_functional(const Vec& x0, double t)
{
    return {{t}, [x0](std::span<const Vec> x) { return 1.0 + 0.5 * (x[0] - x0).squaredNorm(); },
            [x0](std::span<const Vec> x) { return std::vector<Vec>{Vec(x[0] - x0)}; }};
}

/// Strictly positive family for the log-Sobolev check, on slots {T/3, 2T/3, T}.
[[nodiscard]] inline std::vector<NamedFunctional> lsi_family(const ModelManifold& m, double T)
{
    const int n = m.ambient_dim();
    Vec b1 = Vec::Zero(n);
    b1(0) = 1.0;
    Vec b2 = Vec::Zero(n);
    b2(1) = 1.0;
    Vec b3 = Vec::Zero(n);
    for (int i = 0; i < n; ++i) b3(i) = 1.0 / std::sqrt(static_cast<double>(n));
    const Vec x0 = origin(m).position;
    return {
        {"constant", constant_functional(2.0, T)},
        {"exp_linear", exp_linear_functional(b1, 0.5, T)},
        {"exp_linear_mid", exp_linear_functional(b3, 1.0, 2.0 * T / 3.0)},
        {"two_slot_trig", two_slot_trig_functional(b1, b2, T / 3.0, 2.0 * T / 3.0)},
        {"quadratic", quadratic_functional(x0, T)},
    };
}

/// Times every member of a family needs on the grid.
[[nodiscard]] inline std::vector<double> required_times(const std::vector<NamedFunctional>& family)
{
    std::vector<double> out;
    for (const auto& f : family) out.insert(out.end(), f.F.eval_times.begin(), f.F.eval_times.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Random smooth cylindrical functional with 1 to 3 slots on nodes of a uniform grid
/// with n_steps cells; the last slot is t = T half of the time.
[[nodiscard]] inline CylindricalFunctional random_cylindrical(int ambient_dim, double T, int n_steps, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> n_slots(1, 3);
    std::uniform_int_distribution<int> node(1, n_steps);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);

    const int N = n_slots(rng);
    std::vector<int> idx;
    if (std::bernoulli_distribution(0.5)(rng)) idx.push_back(n_steps);
    while (static_cast<int>(idx.size()) < N) {
        const int k = node(rng);
        if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
    }
    std::sort(idx.begin(), idx.end());
    std::vector<double> times;
    for (int k : idx) times.push_back(k == n_steps ? T : T * k / n_steps);

    auto rand_vec = [&] {
        Vec v(ambient_dim);
        for (int i = 0; i < ambient_dim; ++i) v(i) = normal(rng);
        return v;
    };
    std::vector<Vec> b, c;
    std::vector<double> phase, amp;
    for (int j = 0; j < N; ++j) {
        b.push_back(rand_vec());
        c.push_back(rand_vec());
        phase.push_back(unif(rng));
        amp.push_back(normal(rng));
    }
    const double coupling = normal(rng);

    // f = sum_j amp_j sin(<b_j, x_j> + phase_j) + <c_j, x_j> + coupling <c_1, x_1> <c_N, x_N>
    auto value = [=](std::span<const Vec> x) {
        double s = coupling * c.front().dot(x.front()) * c.back().dot(x.back());
        for (int j = 0; j < N; ++j) s += amp[j] * std::sin(b[j].dot(x[j]) + phase[j]) + c[j].dot(x[j]);
        return s;
    };
    auto grads = [=](std::span<const Vec> x) {
        std::vector<Vec> g;
        for (int j = 0; j < N; ++j) g.push_back(Vec(amp[j] * std::cos(b[j].dot(x[j]) + phase[j]) * b[j] + c[j]));
        g.front() += coupling * c.back().dot(x.back()) * c.front();
        g.back() += coupling * c.front().dot(x.front()) * c.back();
        return g;
    };
    return {times, value, grads};
}

/// ric(t) = s0 Id + sum_m sin(w_m t + p_m) S_m + cos(w_m t + p_m) A_m with random symmetric
/// S_m and antisymmetric A_m, together with bounds (K1, K2) valid on [0, T].
struct SyntheticRicci {
    RicciPath ric;
    CurvatureBounds bounds{0.0, 0.0};
};

[[nodiscard]] inline SyntheticRicci random_synthetic_ricci(int d, double T, std::uint64_t seed, double scale = 1.0,
                                                           double max_freq = 3.0, int modes = 3)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, max_freq);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    const double s0 = scale * normal(rng);
    std::vector<Mat> S, A;
    std::vector<double> w, p;
    for (int m = 0; m < modes; ++m) {
        Mat g(d, d), h(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                g(i, j) = normal(rng);
                h(i, j) = normal(rng);
            }
        S.push_back(0.5 * scale / modes * (g + g.transpose()));
        A.push_back(0.5 * scale / modes * (h - h.transpose()));
        w.push_back(freq(rng));
        p.push_back(unif(rng));
    }
    RicciPath ric = [=](double t) {
        Mat r = s0 * Mat::Identity(d, d);
        for (std::size_t m = 0; m < S.size(); ++m) r += std::sin(w[m] * t + p[m]) * S[m] + std::cos(w[m] * t + p[m]) * A[m];
        return r;
    };

    // Bounds from a dense scan; the margin covers the variation between scan points.
    const int scan = 4000;
    double op_max = 0.0;
    double low_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const Eigen::MatrixXd r = ric(T * i / scan);
        op_max = std::max(op_max, Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()(0));
        const Eigen::MatrixXd sym = 0.5 * (r + r.transpose());
        low_min = std::min(low_min,
                           Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0));
    }
    double variation = 0.0;  // crude Lipschitz bound times half the scan spacing
    for (std::size_t m = 0; m < S.size(); ++m) variation += w[m] * (S[m].norm() + A[m].norm());
    const double margin = variation * 0.5 * T / scan + 1e-9;
    const double k1 = op_max + margin;
    const double k2 = std::max(low_min - margin, -k1);
    return {ric, CurvatureBounds(k1, k2)};
}

/// Family for the damped-vs-weighted energy check: `count` random functionals for a manifold of this ambient dimension.
[[nodiscard]] inline std::vector<NamedFunctional> theorem1_family(int ambient_dim, double T, int n_steps, int count,
                                                                  std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<NamedFunctional> out;
    for (int i = 0; i < count; ++i) out.push_back({"random_" + std::to_string(i), random_cylindrical(ambient_dim, T, n_steps, rng)});
    return out;
}

}  // namespace pathgap
