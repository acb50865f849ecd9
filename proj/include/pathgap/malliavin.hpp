#pragma once

// Gradients of path functionals along one sampled path: the resolvent of
// dQ/dt = -1/2 ric Q, usual and damped gradients, the v <-> v~ transform pair,
// and the gradient of F_T = <a, w_T> with its curvature integrals.
//
// Fields are stored per grid cell as the two one-sided limits at the cell ends,
// and every time integral is the per-cell trapezoid rule on those limits.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "pathgap/bounds.hpp"
#include "pathgap/errors.hpp"
#include "pathgap/geometry.hpp"
#include "pathgap/path_sim.hpp"
#include "pathgap/quadrature.hpp"

namespace pathgap {

/// A tangent-vector valued function on [0, T], smooth inside each grid cell.
/// left[k] is the limit at t_k from the right, right[k] the limit at t_{k+1} from the left.
struct GradientField {
    std::vector<Vec> left;
    std::vector<Vec> right;

    static GradientField zero(std::size_t n_cells, int dim)
    {
        return {std::vector<Vec>(n_cells, Vec::Zero(dim)), std::vector<Vec>(n_cells, Vec::Zero(dim))};
    }
    [[nodiscard]] std::size_t cells() const noexcept { return left.size(); }
};

/// Trapezoid approximation of the integral of <u, v> over [0, T].
[[nodiscard]] inline double field_inner(const GradientField& u, const GradientField& v, const TimeGrid& grid)
{
    double s = 0.0;
    for (std::size_t k = 0; k < u.cells(); ++k) {
        s += 0.5 * grid.dt(k) * (u.left[k].dot(v.left[k]) + u.right[k].dot(v.right[k]));
    }
    return s;
}

[[nodiscard]] inline double field_energy(const GradientField& v, const TimeGrid& grid) { return field_inner(v, v, grid); }

/// L2(grid) distance between two fields.
[[nodiscard]] inline double field_distance(const GradientField& u, const GradientField& v, const TimeGrid& grid)
{
    double s = 0.0;
    for (std::size_t k = 0; k < u.cells(); ++k) {
        s += 0.5 * grid.dt(k) * ((u.left[k] - v.left[k]).squaredNorm() + (u.right[k] - v.right[k]).squaredNorm());
    }
    return std::sqrt(s);
}

/// Resolvent Q_{t_i, t_j} of dQ/dt = -1/2 ric(t) Q, Q_{s,s} = Id, on a time grid.
///
/// Constant curvature uses the exact scalar exponential, piecewise-constant synthetic
/// ric the matrix exponential of each cell, and smooth synthetic ric one RK4 step
/// per cell. Only the one-cell propagators are stored; Q(i, j) is their product.
class ResolventGrid {
public:
    ResolventGrid(const ModelManifold& m, const TimeGrid& grid, const CurvatureBounds& declared)
        : m_(m), grid_(grid), declared_(declared), d_(m.dim())
    {
        const std::size_t n = static_cast<std::size_t>(grid_.n_steps());
        if (m_.is_constant_curvature()) {
            c_ = m_.ricci_scalar();
            check_bounds(Mat(c_ * Mat::Identity(d_, d_)), 0.0);
            return;
        }
        ric_node_.reserve(n + 1);
        for (std::size_t k = 0; k <= n; ++k) ric_node_.push_back(checked_ric(grid_[k]));
        steps_.reserve(n);
        if (m_.piecewise_constant_ricci()) {
            for (std::size_t k = 0; k < n; ++k) steps_.push_back(expm_step(ric_node_[k], grid_.dt(k)));
        } else {
            ric_mid_.reserve(n);
            for (std::size_t k = 0; k < n; ++k) {
                ric_mid_.push_back(checked_ric(grid_[k] + 0.5 * grid_.dt(k)));
                steps_.push_back(rk4_step(ric_node_[k], ric_mid_[k], ric_node_[k + 1], grid_.dt(k)));
            }
        }
    }

    ResolventGrid(const PathSample& path, const ModelManifold& m, const CurvatureBounds& declared)
        : ResolventGrid(m, path.grid, declared)
    {
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const ModelManifold& manifold() const noexcept { return m_; }
    [[nodiscard]] const CurvatureBounds& declared() const noexcept { return declared_; }
    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] bool exact() const noexcept { return m_.is_constant_curvature(); }

    /// One-cell propagator Q_{t_{k+1}, t_k}.
    [[nodiscard]] Mat step(std::size_t k) const
    {
        if (exact()) return scalar(grid_.dt(k));
        return steps_[k];
    }

    /// Q_{t_i, t_j} for i >= j.
    [[nodiscard]] Mat Q(std::size_t i, std::size_t j) const
    {
        if (i < j) throw std::invalid_argument("resolvent Q(i, j) needs i >= j");
        if (exact()) return scalar(grid_[i] - grid_[j]);
        Mat q = Mat::Identity(d_, d_);
        for (std::size_t k = j; k < i; ++k) q = steps_[k] * q;
        return q;
    }

    /// Q_{t_{k+1}, tau} for tau inside cell k, with the same integrator as the cell step.
    [[nodiscard]] Mat within_cell(std::size_t k, double tau) const
    {
        const double h = grid_[k + 1] - tau;
        if (exact()) return scalar(h);
        if (h <= 0.0) return Mat::Identity(d_, d_);
        if (m_.piecewise_constant_ricci()) return expm_step(ric_node_[k], h);
        const RicciPath& ric = m_.ricci_path();
        return rk4_step(ric(tau), ric(tau + 0.5 * h), ric_node_[k + 1], h);
    }

    /// ric at the left end t_k of cell k, as seen from inside the cell.
    [[nodiscard]] Mat ric_left(std::size_t k) const
    {
        if (exact()) return c_ * Mat::Identity(d_, d_);
        return ric_node_[k];
    }

    /// ric at the right end t_{k+1} of cell k, as seen from inside the cell.
    [[nodiscard]] Mat ric_right(std::size_t k) const
    {
        if (exact()) return c_ * Mat::Identity(d_, d_);
        return m_.piecewise_constant_ricci() ? ric_node_[k] : ric_node_[k + 1];
    }

    /// ric at an arbitrary time inside cell k.
    [[nodiscard]] Mat ric_in_cell(std::size_t k, double t) const
    {
        if (exact()) return c_ * Mat::Identity(d_, d_);
        if (m_.piecewise_constant_ricci()) return ric_node_[k];
        return m_.ricci_path()(t);
    }

private:
    [[nodiscard]] Mat scalar(double h) const { return std::exp(-0.5 * c_ * h) * Mat::Identity(d_, d_); }

    [[nodiscard]] Mat checked_ric(double t) const
    {
        Mat r = m_.ricci_path()(t);
        if (r.rows() != d_ || r.cols() != d_) throw DataError("ricci_path returned a matrix of the wrong shape");
        if (!r.allFinite()) throw DataError("ricci_path returned a non-finite matrix");
        check_bounds(r, t);
        return r;
    }

    void check_bounds(const Mat& r, double t) const
    {
        const double tol = 1e-9 * std::max(1.0, declared_.k1());
        const Eigen::MatrixXd dense = r;
        const double op = Eigen::JacobiSVD<Eigen::MatrixXd>(dense).singularValues()(0);
        const Eigen::MatrixXd sym = 0.5 * (dense + dense.transpose());
        const double low = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
        if (op > declared_.k1() + tol || low < declared_.k2() - tol) {
            std::ostringstream os;
            os << std::setprecision(10) << "ric at t=" << t << " violates declared bounds (|||ric|||=" << op
               << " vs k1=" << declared_.k1() << ", min eig sym=" << low << " vs k2=" << declared_.k2() << ")";
            throw DataError(os.str());
        }
    }

    [[nodiscard]] Mat expm_step(const Mat& ric, double h) const
    {
        const Eigen::MatrixXd a = -0.5 * h * Eigen::MatrixXd(ric);
        return Mat(a.exp());
    }

    [[nodiscard]] Mat rk4_step(const Mat& r0, const Mat& rm, const Mat& r1, double h) const
    {
        const Mat I = Mat::Identity(d_, d_);
        const Mat a0 = -0.5 * r0;
        const Mat am = -0.5 * rm;
        const Mat a1 = -0.5 * r1;
        const Mat k1 = a0;
        const Mat k2 = am * (I + 0.5 * h * k1);
        const Mat k3 = am * (I + 0.5 * h * k2);
        const Mat k4 = a1 * (I + h * k3);
        return I + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    ModelManifold m_;
    TimeGrid grid_;
    CurvatureBounds declared_;
    int d_;
    double c_ = 0.0;
    std::vector<Mat> ric_node_;
    std::vector<Mat> ric_mid_;
    std::vector<Mat> steps_;
};

/// F(gamma) = f(gamma(t_1), ..., gamma(t_N)). `slot_gradients` returns the ambient
/// differential of f in each slot; its frame coordinates are the intrinsic gradients.
struct CylindricalFunctional {
    std::vector<double> eval_times;
    std::function<double(std::span<const Vec>)> value;
    std::function<std::vector<Vec>(std::span<const Vec>)> slot_gradients;
};

namespace detail {

inline std::vector<Vec> slot_positions(const CylindricalFunctional& F, const PathSample& path,
                                       std::vector<std::size_t>* nodes = nullptr)
{
    std::vector<Vec> xs;
    xs.reserve(F.eval_times.size());
    for (double t : F.eval_times) {
        const std::size_t i = path.grid.index_of(t);
        if (nodes) nodes->push_back(i);
        xs.push_back(path.position(i));
    }
    return xs;
}

}  // namespace detail

[[nodiscard]] inline double evaluate(const CylindricalFunctional& F, const PathSample& path)
{
    const auto xs = detail::slot_positions(F, path);
    return F.value(xs);
}

/// u_{t_j}^{-1} d_j f together with the grid node of t_j.
struct SlotGradient {
    std::size_t node;
    Vec g;
};

[[nodiscard]] inline std::vector<SlotGradient> slot_gradients(const CylindricalFunctional& F, const PathSample& path)
{
    std::vector<std::size_t> nodes;
    const auto xs = detail::slot_positions(F, path, &nodes);
    const auto grads = F.slot_gradients(xs);
    if (grads.size() != nodes.size()) throw DataError("slot_gradients returned the wrong number of vectors");
    std::vector<SlotGradient> out;
    out.reserve(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        Vec g = frame_coordinates(path.frames[nodes[j]], grads[j]);
        if (!g.allFinite()) throw DataError("slot gradient is not finite");
        out.push_back({nodes[j], std::move(g)});
    }
    return out;
}

/// D_tau F = sum_j u_{t_j}^{-1} d_j f 1(tau <= t_j); constant on every cell.
[[nodiscard]] inline GradientField usual_gradient(const CylindricalFunctional& F, const PathSample& path)
{
    const std::size_t n = static_cast<std::size_t>(path.grid.n_steps());
    const int d = static_cast<int>(path.increments.front().size());
    GradientField D = GradientField::zero(n, d);
    const auto slots = slot_gradients(F, path);
    std::size_t j = slots.size();
    Vec acc = Vec::Zero(d);
    for (std::size_t k = n; k-- > 0;) {
        while (j > 0 && slots[j - 1].node >= k + 1) acc += slots[--j].g;
        D.left[k] = acc;
        D.right[k] = acc;
    }
    return D;
}

/// D~_tau F = sum_j Q*_{t_j, tau} u_{t_j}^{-1} d_j f 1(tau <= t_j).
[[nodiscard]] inline GradientField damped_gradient(const CylindricalFunctional& F, const PathSample& path,
                                                   const ResolventGrid& R)
{
    const std::size_t n = static_cast<std::size_t>(path.grid.n_steps());
    const int d = R.dim();
    GradientField Dt = GradientField::zero(n, d);
    const auto slots = slot_gradients(F, path);
    std::size_t j = slots.size();
    Vec next_left = Vec::Zero(d);
    for (std::size_t k = n; k-- > 0;) {
        Vec r = next_left;
        while (j > 0 && slots[j - 1].node == k + 1) r += slots[--j].g;
        Dt.right[k] = r;
        Dt.left[k] = R.step(k).transpose() * r;
        next_left = Dt.left[k];
    }
    return Dt;
}

/// The same field from D~_t = D_t - 1/2 int_t^T Q*_{s,t} ric*_s D_s ds.
[[nodiscard]] inline GradientField damped_gradient_integral_form(const CylindricalFunctional& F,
                                                                 const PathSample& path, const ResolventGrid& R)
{
    const GradientField D = usual_gradient(F, path);
    const std::size_t n = D.cells();
    const int d = R.dim();
    GradientField Dt = GradientField::zero(n, d);
    Vec Y = Vec::Zero(d);  // int_{t_{k+1}}^T Q*_{s,t_{k+1}} ric*_s D_s ds
    for (std::size_t k = n; k-- > 0;) {
        Dt.right[k] = D.right[k] - 0.5 * Y;
        const Mat Pt = R.step(k).transpose();
        const double h = R.grid().dt(k);
        Y = Pt * Y + 0.5 * h * (R.ric_left(k).transpose() * D.left[k] + Pt * (R.ric_right(k).transpose() * D.right[k]));
        Dt.left[k] = D.left[k] - 0.5 * Y;
    }
    return Dt;
}

/// v~_t = v_t - 1/2 ric_t int_0^t Q_{t,s} v_s ds.
[[nodiscard]] inline GradientField tilde_transform(const GradientField& v, const ResolventGrid& R)
{
    const std::size_t n = v.cells();
    GradientField out = GradientField::zero(n, R.dim());
    Vec I = Vec::Zero(R.dim());
    for (std::size_t k = 0; k < n; ++k) {
        out.left[k] = v.left[k] - 0.5 * R.ric_left(k) * I;
        const Mat P = R.step(k);
        I = P * I + 0.5 * R.grid().dt(k) * (P * v.left[k] + v.right[k]);
        out.right[k] = v.right[k] - 0.5 * R.ric_right(k) * I;
    }
    return out;
}

/// v^_t = v_t + 1/2 ric_t int_0^t v_s ds.
[[nodiscard]] inline GradientField hat_transform(const GradientField& v, const ResolventGrid& R)
{
    const std::size_t n = v.cells();
    GradientField out = GradientField::zero(n, R.dim());
    Vec J = Vec::Zero(R.dim());
    for (std::size_t k = 0; k < n; ++k) {
        out.left[k] = v.left[k] + 0.5 * R.ric_left(k) * J;
        J += 0.5 * R.grid().dt(k) * (v.left[k] + v.right[k]);
        out.right[k] = v.right[k] + 0.5 * R.ric_right(k) * J;
    }
    return out;
}

/// (v~, v^).
[[nodiscard]] inline std::pair<GradientField, GradientField> transform_pair(const GradientField& v,
                                                                            const ResolventGrid& R)
{
    return {tilde_transform(v, R), hat_transform(v, R)};
}

/// |grad f|_C^2 = sum_{j,k} <u^{-1} d_j f, u^{-1} d_k f> (t_j ^ t_k).
[[nodiscard]] inline double correlated_norm(const CylindricalFunctional& F, const PathSample& path)
{
    const auto slots = slot_gradients(F, path);
    double s = 0.0;
    for (std::size_t j = 0; j < slots.size(); ++j) {
        for (std::size_t k = 0; k < slots.size(); ++k) {
            const double t = path.grid[std::min(slots[j].node, slots[k].node)];
            s += slots[j].g.dot(slots[k].g) * t;
        }
    }
    return s;
}

/// Integral of Lambda(t, T) over every grid cell (8-point Gauss-Legendre, smooth integrand).
[[nodiscard]] inline std::vector<double> lambda_cell_integrals(const TimeGrid& grid, const CurvatureBounds& cb)
{
    const Horizon H(grid.horizon());
    const auto& rule = gauss8();
    std::vector<double> out(static_cast<std::size_t>(grid.n_steps()));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double h = grid.dt(k);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            s += rule.weights[q] * lambda(std::min(grid[k] + h * rule.nodes[q], grid.horizon()), H, cb);
        }
        out[k] = s * h;
    }
    return out;
}

/// Both sides of int |D~F|^2 <= int Lambda |DF|^2 on one path. The damped energy is
/// integrated with a Gauss rule inside each cell, so exact cases stay exact.
struct Theorem1Sides {
    double damped_energy;
    double weighted_usual_energy;
};

[[nodiscard]] inline Theorem1Sides theorem1_sides(const CylindricalFunctional& F, const PathSample& path,
                                                  const ResolventGrid& R, std::span<const double> lambda_cells)
{
    const GradientField D = usual_gradient(F, path);
    const GradientField Dt = damped_gradient(F, path, R);
    const auto& rule = gauss8();
    const TimeGrid& grid = path.grid;
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t k = 0; k < D.cells(); ++k) {
        rhs += lambda_cells[k] * D.left[k].squaredNorm();
        const double h = grid.dt(k);
        if (Dt.right[k].squaredNorm() == 0.0) continue;
        double s = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double tau = grid[k] + h * rule.nodes[q];
            s += rule.weights[q] * (R.within_cell(k, tau).transpose() * Dt.right[k]).squaredNorm();
        }
        lhs += s * h;
    }
    return {lhs, rhs};
}

/// Pieces of D_tau F_T for F_T = <a, w_T> and their energy decomposition.
struct LinearFunctionalTerms {
    double F = 0.0;
    double dirichlet = 0.0;
    /// int|X|^2, int|a|^2, 1/4 int|R|^2, int<a,R>, 2 int<X,a>, int<X,R>; they sum to `dirichlet`.
    std::array<double, 6> i_terms{};
};

namespace detail {

struct LinearGradientNodes {
    std::vector<Vec> X;  // sum_i (int_tau^T <C_i(w,s,tau) a, dw_s>) e_i
    std::vector<Vec> R;  // int_tau^T ric(u_s) a ds
};

inline LinearGradientNodes linear_gradient_nodes(const Vec& a, const PathSample& path, const ModelManifold& m)
{
    if (!m.is_constant_curvature()) {
        throw UnsupportedError("gradient of F_T needs the curvature tensor, unavailable in synthetic mode");
    }
    const int d = m.dim();
    const std::size_t n = static_cast<std::size_t>(path.grid.n_steps());
    const Mat I = Mat::Identity(d, d);

    // g[k] column i: sum_{r<k} Omega(e_i, dw_r) a, so C_i(s_m, tau_k) a = -(g[m] - g[k]).
    std::vector<Mat> g(n + 1, Mat::Zero(d, d));
    for (std::size_t r = 0; r < n; ++r) {
        g[r + 1] = g[r];
        for (int i = 0; i < d; ++i) {
            g[r + 1].col(i) += curvature_action(m, path.frames[r], I.col(i), path.increments[r]) * a;
        }
    }
    // A[k]_i = sum_{m>=k} <g_i[m], dw_m>; wtail[k] = w_T - w_{t_k}.
    LinearGradientNodes out{std::vector<Vec>(n + 1, Vec::Zero(d)), std::vector<Vec>(n + 1, Vec::Zero(d))};
    Vec A = Vec::Zero(d);
    Vec wtail = Vec::Zero(d);
    Vec Rtail = Vec::Zero(d);
    Vec ra_next = ricci_matrix(m, path.grid[n], path.frames[n]) * a;
    for (std::size_t k = n; k-- > 0;) {
        A += g[k].transpose() * path.increments[k];
        wtail += path.increments[k];
        const Vec ra = ricci_matrix(m, path.grid[k], path.frames[k]) * a;
        Rtail += 0.5 * path.grid.dt(k) * (ra + ra_next);
        ra_next = ra;
        out.X[k] = -A + g[k].transpose() * wtail;
        out.R[k] = Rtail;
    }
    return out;
}

}  // namespace detail

/// D_tau F_T at the grid nodes (left = value at t_k, right = value at t_{k+1}).
/// Inner curvature integrals use the midpoint rule, the outer dw integral the left point.
[[nodiscard]] inline GradientField linear_functional_gradient(const Vec& a, const PathSample& path,
                                                              const ModelManifold& m)
{
    const auto nodes = detail::linear_gradient_nodes(a, path, m);
    const std::size_t n = nodes.X.size() - 1;
    GradientField D = GradientField::zero(n, m.dim());
    for (std::size_t k = 0; k < n; ++k) {
        D.left[k] = nodes.X[k] + a + 0.5 * nodes.R[k];
        D.right[k] = nodes.X[k + 1] + a + 0.5 * nodes.R[k + 1];
    }
    return D;
}

[[nodiscard]] inline LinearFunctionalTerms linear_functional_terms(const Vec& a, const PathSample& path,
                                                                   const ModelManifold& m)
{
    const auto nodes = detail::linear_gradient_nodes(a, path, m);
    const std::size_t n = nodes.X.size() - 1;
    LinearFunctionalTerms out;
    for (const Vec& dw : path.increments) out.F += a.dot(dw);
    auto terms_at = [&](std::size_t k) {
        const Vec& X = nodes.X[k];
        const Vec& R = nodes.R[k];
        return std::array<double, 6>{X.squaredNorm(), a.squaredNorm(), 0.25 * R.squaredNorm(),
                                     a.dot(R),        2.0 * X.dot(a), X.dot(R)};
    };
    auto prev = terms_at(0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto next = terms_at(k + 1);
        const double h = 0.5 * path.grid.dt(k);
        for (std::size_t i = 0; i < 6; ++i) out.i_terms[i] += h * (prev[i] + next[i]);
        prev = next;
    }
    for (double v : out.i_terms) out.dirichlet += v;
    return out;
}

/// Sum_i |C_i(w, t_k, 0) a|^2 at every node; grows like delta * t in expectation.
[[nodiscard]] inline std::vector<double> curvature_integral_norms(const Vec& a, const PathSample& path,
                                                                  const ModelManifold& m)
{
    if (!m.is_constant_curvature()) {
        throw UnsupportedError("curvature integrals need the curvature tensor, unavailable in synthetic mode");
    }
    const int d = m.dim();
    const std::size_t n = static_cast<std::size_t>(path.grid.n_steps());
    const Mat I = Mat::Identity(d, d);
    Mat c = Mat::Zero(d, d);
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (int i = 0; i < d; ++i) c.col(i) -= curvature_action(m, path.frames[r], I.col(i), path.increments[r]) * a;
        out[r + 1] = c.squaredNorm();
    }
    return out;
}

}  // namespace pathgap
