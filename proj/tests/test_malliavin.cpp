#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pathgap/functionals.hpp"
#include "pathgap/malliavin.hpp"

using namespace pathgap;

namespace {

double op_norm(const Mat& m) { return Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(m)).singularValues()(0); }

GradientField random_field(std::size_t n, int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    GradientField v = GradientField::zero(n, d);
    for (std::size_t k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i) {
            v.left[k](i) = g(rng);
            v.right[k](i) = g(rng);
        }
    return v;
}

// Smooth field sampled at both ends of each cell.
GradientField smooth_field(const TimeGrid& grid, int d)
{
    GradientField v = GradientField::zero(static_cast<std::size_t>(grid.n_steps()), d);
    auto f = [d](double t) {
        Vec x(d);
        for (int i = 0; i < d; ++i) x(i) = std::sin((i + 1) * 2.0 * t + i) + 0.3 * t;
        return x;
    };
    for (std::size_t k = 0; k < v.cells(); ++k) {
        v.left[k] = f(grid[k]);
        v.right[k] = f(grid[k + 1]);
    }
    return v;
}

CurvatureBounds bounds_of(const ModelManifold& m)
{
    const double r = m.ricci_scalar();
    return {std::fabs(r), r};
}

CylindricalFunctional linear_at(const Vec& b, double t)
{
    return {{t}, [b](std::span<const Vec> x) { return b.dot(x[0]); },
            [b](std::span<const Vec>) { return std::vector<Vec>{b}; }};
}

}  // namespace

TEST(Resolvent, ConstantCurvatureIsExact)
{
    const auto m = ModelManifold::sphere(3);
    const TimeGrid grid(2.0, 64);
    const ResolventGrid R(m, grid, bounds_of(m));
    for (std::size_t i = 0; i <= 64; i += 7)
        for (std::size_t j = 0; j <= i; j += 5) {
            const double want = std::exp(-0.5 * 2.0 * (grid[i] - grid[j]));
            EXPECT_LT((R.Q(i, j) - want * Mat::Identity(3, 3)).norm(), 1e-12);
        }
    EXPECT_EQ(R.Q(10, 10), Mat(Mat::Identity(3, 3)));
    EXPECT_THROW((void)R.Q(1, 2), std::invalid_argument);
}

TEST(Resolvent, PiecewiseConstantDiagonalIsProductOfExponentials)
{
    auto ric = [](double t) {
        Mat r = Mat::Zero(2, 2);
        r(0, 0) = std::floor(4.0 * t) * 0.5;
        r(1, 1) = -0.25 * std::floor(4.0 * t);
        return r;
    };
    const auto m = ModelManifold::synthetic(2, ric, true);
    const TimeGrid grid(1.0, 8);
    const ResolventGrid R(m, grid, {2.0, -1.0});
    Eigen::Vector2d expo = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < 8; ++k) {
        const Mat r = ric(grid[k]);
        expo(0) += -0.5 * r(0, 0) * grid.dt(k);
        expo(1) += -0.5 * r(1, 1) * grid.dt(k);
    }
    const Mat Q = R.Q(8, 0);
    EXPECT_NEAR(Q(0, 0), std::exp(expo(0)), 1e-14);
    EXPECT_NEAR(Q(1, 1), std::exp(expo(1)), 1e-14);
    EXPECT_EQ(Q(0, 1), 0.0);
}

TEST(Resolvent, RefinementCocycleAndNormBound)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto syn = random_synthetic_ricci(3, 1.0, seed);
        const auto m = ModelManifold::synthetic(3, syn.ric);
        const TimeGrid coarse(1.0, 512), fine(1.0, 4096);
        const ResolventGrid Rc(m, coarse, syn.bounds), Rf(m, fine, syn.bounds);
        for (auto [i, k, j] : {std::array<std::size_t, 3>{512, 256, 0}, {400, 100, 37}, {511, 510, 3}}) {
            const Mat mixed = Rf.Q(8 * i, 8 * k) * Rf.Q(8 * k, 8 * j);
            EXPECT_LT((Rc.Q(i, j) - mixed).norm(), 1e-9);
            EXPECT_LT((Rc.Q(i, j) - Rc.Q(i, k) * Rc.Q(k, j)).norm(), 1e-12);
            EXPECT_LE(op_norm(Rc.Q(i, j)), std::exp(-0.5 * syn.bounds.k2() * (coarse[i] - coarse[j])) + 1e-8);
        }
    }
}

TEST(Resolvent, FourthOrderConvergence)
{
    const auto syn = random_synthetic_ricci(2, 4.0, 9, 1.0, 6.0);
    const auto m = ModelManifold::synthetic(2, syn.ric);
    const ResolventGrid ref(m, TimeGrid(4.0, 16384), syn.bounds);
    const Mat Qref = ref.Q(16384, 0);
    auto err = [&](int n) { return (ResolventGrid(m, TimeGrid(4.0, n), syn.bounds).Q(n, 0) - Qref).norm(); };
    const double e1 = err(256), e2 = err(2048);
    EXPECT_GT(std::log2(e1 / e2) / 3.0, 3.5);
}

TEST(Resolvent, DeclaredBoundsViolationIsDataError)
{
    const auto m = ModelManifold::synthetic(2, [](double) { return Mat(3.0 * Mat::Identity(2, 2)); });
    EXPECT_THROW(ResolventGrid(m, TimeGrid(1.0, 8), {1.0, 0.0}), DataError);
    EXPECT_NO_THROW(ResolventGrid(m, TimeGrid(1.0, 8), {3.0, 3.0}));
    const auto s = ModelManifold::sphere(3);
    EXPECT_THROW(ResolventGrid(s, TimeGrid(1.0, 8), {1.0, 1.0}), DataError);
}

TEST(UsualGradient, IndicatorStructure)
{
    const auto m = ModelManifold::sphere(2);
    const TimeGrid grid(1.0, 10);
    const auto p = sample_path(m, grid, 4);
    Vec b(3);
    b << 0.3, -1.0, 0.5;
    const auto D = usual_gradient(linear_at(b, 0.5), p);
    const Vec g = frame_coordinates(p.frames[5], b);
    for (std::size_t k = 0; k < 10; ++k) {
        const Vec want = k < 5 ? g : Vec(Vec::Zero(2));
        EXPECT_EQ(D.left[k], want);
        EXPECT_EQ(D.right[k], want);
    }
    const auto Z = usual_gradient(constant_functional(3.0, 1.0), p);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_TRUE(Z.left[k].isZero(0.0));

    const auto e = ModelManifold::euclidean(3);
    const auto pe = sample_path(e, TimeGrid(1.0, 10), 4);
    Vec a(3);
    a << 1.0, 2.0, 3.0;
    const auto De = usual_gradient(linear_at(a, 1.0), pe);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(De.left[k], a);
}

TEST(DampedGradient, FlatAndScalarResolvent)
{
    std::mt19937_64 rng(1);
    const auto e = ModelManifold::euclidean(2);
    const auto pe = sample_path(e, TimeGrid(1.0, 16), 2);
    const ResolventGrid Re(e, pe.grid, {0.0, 0.0});
    const auto F = random_cylindrical(2, 1.0, 16, rng);
    const auto D = usual_gradient(F, pe);
    const auto Dt = damped_gradient(F, pe, Re);
    for (std::size_t k = 0; k < 16; ++k) {
        EXPECT_EQ(D.left[k], Dt.left[k]);
        EXPECT_EQ(D.right[k], Dt.right[k]);
    }

    const auto s = ModelManifold::sphere(2, 0.5);
    const TimeGrid grid(2.0, 20);
    const auto p = sample_path(s, grid, 3);
    const ResolventGrid R(s, grid, bounds_of(s));
    Vec b(3);
    b << 1.0, 0.0, 0.5;
    const double t1 = grid[15];
    const auto Fs = linear_at(b, t1);
    const auto Ds = usual_gradient(Fs, p);
    const auto Dts = damped_gradient(Fs, p, R);
    for (std::size_t k = 0; k < 15; ++k) {
        EXPECT_LT((Dts.left[k] - std::exp(-0.25 * (t1 - grid[k])) * Ds.left[k]).norm(), 1e-14);
        EXPECT_LT((Dts.right[k] - std::exp(-0.25 * (t1 - grid[k + 1])) * Ds.right[k]).norm(), 1e-14);
    }
}

TEST(DampedGradient, IntegralFormAgreesAndConverges)
{
    std::mt19937_64 rng(5);
    const auto syn = random_synthetic_ricci(2, 1.0, 17);
    for (const auto& m : {ModelManifold::sphere(2), ModelManifold::synthetic(2, syn.ric)}) {
        const ModelManifold pos = m;
        const CurvatureBounds cb = m.is_constant_curvature() ? bounds_of(m) : syn.bounds;
        const auto F = random_cylindrical(m.ambient_dim(), 1.0, 8, rng);
        double prev = 0.0;
        for (int n : {256, 512, 1024}) {
            const TimeGrid grid(1.0, n);
            const auto p = sample_path(pos, grid, 10);
            const ResolventGrid R(m, grid, cb);
            const double err = field_distance(damped_gradient(F, p, R), damped_gradient_integral_form(F, p, R), grid);
            if (n == 1024) { EXPECT_LT(err, 1e-6); }
            if (prev > 0.0) { EXPECT_GT(prev / err, 1.8) << n; }
            prev = err;
        }
    }
}

TEST(TransformPair, IdentityWithoutCurvature)
{
    std::mt19937_64 rng(2);
    const auto e = ModelManifold::euclidean(3);
    const TimeGrid grid(1.0, 32);
    const ResolventGrid R(e, grid, {0.0, 0.0});
    const auto v = random_field(32, 3, rng);
    const auto [t, h] = transform_pair(v, R);
    for (std::size_t k = 0; k < 32; ++k) {
        EXPECT_EQ(t.left[k], v.left[k]);
        EXPECT_EQ(h.right[k], v.right[k]);
    }
}

TEST(TransformPair, RoundTripAndDuality)
{
    std::mt19937_64 rng(8);
    const auto syn = random_synthetic_ricci(3, 1.0, 23);
    const auto m = ModelManifold::synthetic(3, syn.ric);
    double prev_rt = 0.0, prev_du = 0.0;
    for (int n : {512, 1024}) {
        const TimeGrid grid(1.0, n);
        const ResolventGrid R(m, grid, syn.bounds);
        const auto v = smooth_field(grid, 3);
        const double vn = std::sqrt(field_energy(v, grid));
        const double rt1 = field_distance(hat_transform(tilde_transform(v, R), R), v, grid) / vn;
        const double rt2 = field_distance(tilde_transform(hat_transform(v, R), R), v, grid) / vn;
        if (n == 1024) {
            EXPECT_LT(rt1, 1e-6);
            EXPECT_LT(rt2, 1e-6);
        }

        const auto p = sample_path(m, grid, 1);
        std::mt19937_64 frng(99);
        const auto F = random_cylindrical(3, 1.0, 64, frng);
        const double lhs = field_inner(damped_gradient(F, p, R), v, grid);
        const double rhs = field_inner(usual_gradient(F, p), tilde_transform(v, R), grid);
        const double du = std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs));
        if (n == 1024) { EXPECT_LT(du, 1e-6); }
        if (prev_rt > 0.0) {
            EXPECT_GT(prev_rt / rt1, 1.8);
            EXPECT_GT(prev_du / du, 1.8);
        }
        prev_rt = rt1;
        prev_du = du;
    }
    // rough fields still round-trip to second order in the ric variation
    const TimeGrid grid(1.0, 1024);
    const ResolventGrid R(m, grid, syn.bounds);
    const auto v = random_field(1024, 3, rng);
    EXPECT_LT(field_distance(hat_transform(tilde_transform(v, R), R), v, grid) / std::sqrt(field_energy(v, grid)), 1e-6);
}

TEST(CorrelatedNorm, MatchesEnergyOfUsualGradient)
{
    std::mt19937_64 rng(4);
    const auto m = ModelManifold::hyperbolic(2);
    for (int i = 0; i < 20; ++i) {
        const auto F = random_cylindrical(3, 1.5, 30, rng);
        const auto p = sample_path(m, TimeGrid(1.5, 30), i);
        const double c = correlated_norm(F, p);
        const double e = field_energy(usual_gradient(F, p), p.grid);
        EXPECT_LT(std::fabs(c - e), 1e-10 * std::max(1.0, c));
    }
    const auto p = sample_path(m, TimeGrid(1.0, 10), 1);
    EXPECT_EQ(correlated_norm(constant_functional(1.0, 0.5), p), 0.0);
    Vec b(3);
    b << 0.2, 0.4, 0.1;
    const double t1 = p.grid[6];
    EXPECT_NEAR(correlated_norm(linear_at(b, t1), p), t1 * frame_coordinates(p.frames[6], b).squaredNorm(), 1e-15);
}

TEST(LinearFunctional, EuclideanGradientIsConstant)
{
    const auto e = ModelManifold::euclidean(3);
    const auto p = sample_path(e, TimeGrid(0.5, 40), 1);
    Vec a(3);
    a << 0.6, 0.0, 0.8;
    const auto D = linear_functional_gradient(a, p, e);
    for (std::size_t k = 0; k < 40; ++k) {
        EXPECT_EQ(D.left[k], a);
        EXPECT_EQ(D.right[k], a);
    }
    const auto t = linear_functional_terms(a, p, e);
    EXPECT_NEAR(t.dirichlet, 0.5, 1e-15);
    const auto syn = ModelManifold::synthetic(3, [](double) { return Mat(Mat::Zero(3, 3)); });
    EXPECT_THROW((void)linear_functional_gradient(a, sample_path(syn, TimeGrid(0.5, 4), 1), syn), UnsupportedError);
}

TEST(LinearFunctional, MatchesBruteForceDoubleSums)
{
    for (const auto& m : {ModelManifold::sphere(3), ModelManifold::hyperbolic(2, -2.0)}) {
        const int d = m.dim();
        Vec a = Vec::Zero(d);
        a(0) = 0.6;
        a(d - 1) = 0.8;
        const auto p = sample_path(m, TimeGrid(0.8, 60), 12);
        const auto D = linear_functional_gradient(a, p, m);
        const auto want = oracle::linear_gradient_bruteforce(a, p, m);
        for (std::size_t k = 0; k < 60; ++k) {
            EXPECT_LT((D.left[k] - want[k]).norm(), 1e-12);
            EXPECT_LT((D.right[k] - want[k + 1]).norm(), 1e-12);
        }
        const auto t = linear_functional_terms(a, p, m);
        EXPECT_NEAR(t.dirichlet, field_energy(D, p.grid), 1e-12);
        double F = 0.0;
        for (const auto& dw : p.increments) F += a.dot(dw);
        EXPECT_EQ(t.F, F);
    }
}

TEST(LinearFunctional, CurvatureIntegralGrowsLinearly)
{
    // E sum_i |C_i(w, s, 0) a|^2 = kappa^2 (2d - 2) s for constant curvature.
    const auto m = ModelManifold::sphere(3);
    Vec a = Vec::Zero(3);
    a(1) = 1.0;
    const TimeGrid grid(0.5, 50);
    const PathBatch batch(m, grid, 20000, 31);
    std::vector<double> mean(51, 0.0);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto c = curvature_integral_norms(a, batch[k], m);
        for (std::size_t i = 0; i < c.size(); ++i) mean[i] += c[i] / batch.size();
    }
    for (std::size_t i : {10u, 25u, 50u}) EXPECT_NEAR(mean[i] / grid[i], 4.0, 0.15);
}

TEST(Theorem1Sides, TightOnHyperbolicPlane)
{
    // ric = -Id, K1 = 1, K2 = -1, one slot at T: both sides equal (e^T - 1)|g|^2.
    const auto m = ModelManifold::hyperbolic(2);
    const double T = 1.3;
    const TimeGrid grid(T, 50);
    const CurvatureBounds cb(1.0, -1.0);
    const ResolventGrid R(m, grid, cb);
    const auto lam = lambda_cell_integrals(grid, cb);
    Vec b(3);
    b << 0.4, -0.7, 0.2;
    const auto p = sample_path(m, grid, 6);
    const auto s = theorem1_sides(linear_at(b, T), p, R, lam);
    const double g2 = frame_coordinates(p.frames.back(), b).squaredNorm();
    EXPECT_NEAR(s.damped_energy, (std::exp(T) - 1.0) * g2, 1e-12 * s.damped_energy);
    EXPECT_NEAR(s.weighted_usual_energy, (std::exp(T) - 1.0) * g2, 1e-12 * s.damped_energy);
}

TEST(Theorem1Sides, RandomFunctionalsSatisfyInequality)
{
    std::mt19937_64 rng(12);
    const auto syn = random_synthetic_ricci(2, 1.0, 5);
    for (const auto& [m, cb] : {std::pair{ModelManifold::sphere(2), CurvatureBounds(1.0, 1.0)},
                                std::pair{ModelManifold::synthetic(2, syn.ric), syn.bounds}}) {
        const TimeGrid grid(1.0, 64);
        const ResolventGrid R(m, grid, cb);
        const auto lam = lambda_cell_integrals(grid, cb);
        for (int i = 0; i < 50; ++i) {
            const auto F = random_cylindrical(m.ambient_dim(), 1.0, 64, rng);
            const auto s = theorem1_sides(F, sample_path(m, grid, i), R, lam);
            EXPECT_LE(s.damped_energy, s.weighted_usual_energy * (1.0 + 1e-8));
        }
    }
}
