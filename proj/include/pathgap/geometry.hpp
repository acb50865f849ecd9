#pragma once

// Constant-curvature model manifolds (Euclidean space, round sphere embedded in
// R^{d+1}, hyperboloid in Minkowski R^{d,1}) and a synthetic mode carrying only
// a prescribed Ricci matrix path.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "pathgap/errors.hpp"

namespace pathgap {

/// Largest supported intrinsic dimension; vectors and matrices live on the stack.
inline constexpr int kMaxDim = 8;
inline constexpr int kMaxAmbient = kMaxDim + 1;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;

/// Time-dependent Ricci matrix in the moving frame, t -> d x d.
using RicciPath = std::function<Mat(double)>;

enum class ManifoldKind { Euclidean, Sphere, Hyperbolic, SyntheticRicciPath };

[[nodiscard]] inline std::string_view to_string(ManifoldKind k) noexcept
{
    switch (k) {
    case ManifoldKind::Euclidean: return "euclidean";
    case ManifoldKind::Sphere: return "sphere";
    case ManifoldKind::Hyperbolic: return "hyperbolic";
    case ManifoldKind::SyntheticRicciPath: return "synthetic";
    }
    return "unknown";
}

[[nodiscard]] inline ManifoldKind parse_manifold_kind(std::string_view s)
{
    if (s == "euclidean") return ManifoldKind::Euclidean;
    if (s == "sphere") return ManifoldKind::Sphere;
    if (s == "hyperbolic") return ManifoldKind::Hyperbolic;
    if (s == "synthetic") return ManifoldKind::SyntheticRicciPath;
    throw ConfigError("unknown manifold kind '" + std::string(s) + "'");
}

/// Immutable description of the base manifold. Copies share the Ricci callback.
class ModelManifold {
public:
    static ModelManifold euclidean(int dim) { return ModelManifold(ManifoldKind::Euclidean, dim, 0.0, nullptr, false); }

    static ModelManifold sphere(int dim, double kappa = 1.0)
    {
        if (!(kappa > 0.0)) throw ConfigError("sphere needs sectional curvature kappa > 0");
        return ModelManifold(ManifoldKind::Sphere, dim, kappa, nullptr, false);
    }

    static ModelManifold hyperbolic(int dim, double kappa = -1.0)
    {
        if (!(kappa < 0.0)) throw ConfigError("hyperbolic space needs sectional curvature kappa < 0");
        return ModelManifold(ManifoldKind::Hyperbolic, dim, kappa, nullptr, false);
    }

    /// Flat positions with an externally prescribed ric(t). With `piecewise_constant`
    /// the resolvent freezes ric at the left end of every grid cell.
    static ModelManifold synthetic(int dim, RicciPath ricci, bool piecewise_constant = false)
    {
        if (!ricci) throw ConfigError("synthetic manifold requires a ricci_path callback");
        return ModelManifold(ManifoldKind::SyntheticRicciPath, dim, 0.0,
                             std::make_shared<const RicciPath>(std::move(ricci)), piecewise_constant);
    }

    /// Constant-curvature model of the given kind; kappa is ignored for Euclidean.
    static ModelManifold constant_curvature(ManifoldKind kind, int dim, double kappa)
    {
        switch (kind) {
        case ManifoldKind::Euclidean: return euclidean(dim);
        case ManifoldKind::Sphere: return sphere(dim, kappa);
        case ManifoldKind::Hyperbolic: return hyperbolic(dim, kappa);
        case ManifoldKind::SyntheticRicciPath: break;
        }
        throw ConfigError("synthetic manifold has no constant-curvature form");
    }

    [[nodiscard]] ManifoldKind kind() const noexcept { return kind_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] double sectional() const noexcept { return kappa_; }
    [[nodiscard]] bool is_constant_curvature() const noexcept { return kind_ != ManifoldKind::SyntheticRicciPath; }
    [[nodiscard]] bool piecewise_constant_ricci() const noexcept { return piecewise_; }

    /// Dimension of the coordinates a position lives in.
    [[nodiscard]] int ambient_dim() const noexcept
    {
        return (kind_ == ManifoldKind::Sphere || kind_ == ManifoldKind::Hyperbolic) ? dim_ + 1 : dim_;
    }

    /// Sphere radius 1/sqrt(kappa) or hyperboloid scale 1/sqrt(-kappa); 0 otherwise.
    [[nodiscard]] double radius() const noexcept
    {
        return kappa_ == 0.0 ? 0.0 : 1.0 / std::sqrt(std::fabs(kappa_));
    }

    /// (d - 1) kappa, the Ricci eigenvalue of the constant-curvature models.
    [[nodiscard]] double ricci_scalar() const noexcept { return (dim_ - 1) * kappa_; }

    [[nodiscard]] const RicciPath& ricci_path() const
    {
        if (!ricci_) throw ConfigError("manifold has no ricci_path");
        return *ricci_;
    }

private:
    ModelManifold(ManifoldKind kind, int dim, double kappa, std::shared_ptr<const RicciPath> ricci, bool piecewise)
        : kind_(kind), dim_(dim), kappa_(kappa), ricci_(std::move(ricci)), piecewise_(piecewise)
    {
        if (dim < 2 || dim > kMaxDim) {
            std::ostringstream os;
            os << "dimension " << dim << " outside supported range [2, " << kMaxDim << "]";
            throw ConfigError(os.str());
        }
    }

    ManifoldKind kind_;
    int dim_;
    double kappa_;
    std::shared_ptr<const RicciPath> ricci_;
    bool piecewise_;
};

/// A point of the orthonormal frame bundle: position plus an ambient x d frame matrix
/// whose columns are an orthonormal basis of the tangent space.
struct FramePoint {
    Vec position;
    Mat frame;
};

/// Ambient inner product: Euclidean, or Minkowski (+,...,+,-) on the hyperboloid.
[[nodiscard]] inline double ambient_inner(const ModelManifold& m, const Vec& x, const Vec& y)
{
    if (m.kind() == ManifoldKind::Hyperbolic) {
        const Eigen::Index last = x.size() - 1;
        return x.head(last).dot(y.head(last)) - x(last) * y(last);
    }
    return x.dot(y);
}

/// Canonical starting frame: the north pole / hyperboloid vertex / origin with the coordinate frame.
[[nodiscard]] inline FramePoint origin(const ModelManifold& m)
{
    const int d = m.dim();
    const int n = m.ambient_dim();
    FramePoint fp;
    fp.position = Vec::Zero(n);
    fp.frame = Mat::Zero(n, d);
    for (int i = 0; i < d; ++i) fp.frame(i, i) = 1.0;
    if (n > d) fp.position(d) = m.radius();
    return fp;
}

/// Equivariant Ricci matrix ric(u) = u^{-1} Ric u.
[[nodiscard]] inline Mat ricci_matrix(const ModelManifold& m, double t, const FramePoint& /*frame*/)
{
    if (m.is_constant_curvature()) {
        return m.ricci_scalar() * Mat::Identity(m.dim(), m.dim());
    }
    Mat r = m.ricci_path()(t);
    if (r.rows() != m.dim() || r.cols() != m.dim()) {
        throw DataError("ricci_path returned a matrix of the wrong shape");
    }
    return r;
}

/// The map c -> Omega_u(a, b) c = kappa (<b, c> a - <a, c> b), as a d x d matrix.
[[nodiscard]] inline Mat curvature_action(const ModelManifold& m, const FramePoint& /*frame*/, const Vec& a, const Vec& b)
{
    if (!m.is_constant_curvature()) {
        throw UnsupportedError("curvature tensor is not defined in synthetic Ricci-path mode");
    }
    return m.sectional() * (a * b.transpose() - b * a.transpose());
}

/// Frame coordinates u^{-1} grad f of an ambient differential: the directional
/// derivatives of f along the frame vectors.
[[nodiscard]] inline Vec frame_coordinates(const FramePoint& fp, const Vec& ambient_gradient)
{
    return fp.frame.transpose() * ambient_gradient;
}

namespace detail {

inline void reorthonormalize(const ModelManifold& m, FramePoint& fp)
{
    const int d = m.dim();
    switch (m.kind()) {
    case ManifoldKind::Sphere: {
        const double r = m.radius();
        fp.position *= r / fp.position.norm();
        const Vec n = fp.position / r;
        fp.frame -= n * (n.transpose() * fp.frame);
        break;
    }
    case ManifoldKind::Hyperbolic: {
        const double r = m.radius();
        fp.position *= r / std::sqrt(-ambient_inner(m, fp.position, fp.position));
        const Vec n = fp.position / r;
        for (int j = 0; j < d; ++j) {
            const Vec col = fp.frame.col(j);
            fp.frame.col(j) += ambient_inner(m, col, n) * n;
        }
        break;
    }
    case ManifoldKind::Euclidean:
    case ManifoldKind::SyntheticRicciPath:
        return;
    }
    // Modified Gram-Schmidt in the ambient metric (positive definite on the tangent space).
    for (int j = 0; j < d; ++j) {
        Vec col = fp.frame.col(j);
        for (int i = 0; i < j; ++i) {
            const Vec prev = fp.frame.col(i);
            col -= ambient_inner(m, col, prev) * prev;
        }
        col /= std::sqrt(ambient_inner(m, col, col));
        fp.frame.col(j) = col;
    }
}

}  // namespace detail

/// Follow the geodesic with initial velocity frame * v for time h, transporting the frame
/// parallel along it (closed form on every model), then re-orthonormalize.
inline void geodesic_step_inplace(const ModelManifold& m, FramePoint& fp, const Vec& v, double h)
{
    const Vec V = fp.frame * (v * h);
    switch (m.kind()) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::SyntheticRicciPath:
        fp.position += V;
        return;
    case ManifoldKind::Sphere: {
        const double speed = V.norm();
        if (speed == 0.0) return;
        const double r = m.radius();
        const double ang = speed / r;
        const Vec n = fp.position / r;
        const Vec e = V / speed;
        const double c = std::cos(ang);
        const double s = std::sin(ang);
        fp.position = r * (c * n + s * e);
        const Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxAmbient> along = e.transpose() * fp.frame;
        fp.frame += ((c - 1.0) * e - s * n) * along;
        break;
    }
    case ManifoldKind::Hyperbolic: {
        const double sq = ambient_inner(m, V, V);
        if (!(sq > 0.0)) return;
        const double speed = std::sqrt(sq);
        const double r = m.radius();
        const double ang = speed / r;
        const Vec n = fp.position / r;
        const Vec e = V / speed;
        const double c = std::cosh(ang);
        const double s = std::sinh(ang);
        fp.position = r * (c * n + s * e);
        Vec le = e;
        le(le.size() - 1) = -le(le.size() - 1);
        const Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxAmbient> along = le.transpose() * fp.frame;
        fp.frame += ((c - 1.0) * e + s * n) * along;
        break;
    }
    }
    detail::reorthonormalize(m, fp);
}

[[nodiscard]] inline FramePoint geodesic_step(const ModelManifold& m, const FramePoint& fp, const Vec& v, double h)
{
    if (!(h > 0.0)) throw std::invalid_argument("geodesic_step needs h > 0");
    FramePoint out = fp;
    geodesic_step_inplace(m, out, v, h);
    return out;
}

/// Largest violation of the frame-bundle constraints: orthonormality of the frame,
/// tangency, and the surface equation.
[[nodiscard]] inline double frame_defect(const ModelManifold& m, const FramePoint& fp)
{
    const int d = m.dim();
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double g = ambient_inner(m, fp.frame.col(i), fp.frame.col(j));
            worst = std::max(worst, std::fabs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    if (m.kind() == ManifoldKind::Sphere || m.kind() == ManifoldKind::Hyperbolic) {
        const double r = m.radius();
        const double target = m.kind() == ManifoldKind::Sphere ? r * r : -r * r;
        const double q = ambient_inner(m, fp.position, fp.position);
        worst = std::max(worst, std::fabs(q - target) / (r * r));
        for (int j = 0; j < d; ++j) {
            worst = std::max(worst, std::fabs(ambient_inner(m, fp.frame.col(j), fp.position)) / r);
        }
    }
    return worst;
}

/// Riemannian distance between two positions.
[[nodiscard]] inline double distance(const ModelManifold& m, const Vec& x, const Vec& y)
{
    switch (m.kind()) {
    case ManifoldKind::Sphere: {
        const double r = m.radius();
        const double c = std::clamp(x.dot(y) / (r * r), -1.0, 1.0);
        // atan2 form is accurate for nearby points where acos is not.
        const double s = (x - y).norm() / (2.0 * r);
        return r * 2.0 * std::atan2(s, std::sqrt(std::max(0.0, (1.0 + c) / 2.0)));
    }
    case ManifoldKind::Hyperbolic: {
        const double r = m.radius();
        const double c = std::max(1.0, -ambient_inner(m, x, y) / (r * r));
        return r * std::acosh(c);
    }
    case ManifoldKind::Euclidean:
    case ManifoldKind::SyntheticRicciPath:
        break;
    }
    return (x - y).norm();
}

}  // namespace pathgap
