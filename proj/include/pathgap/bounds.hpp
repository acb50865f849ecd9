#pragma once

// Closed-form spectral-gap bounds for the Ornstein-Uhlenbeck operator on path
// space, as functions of the Ricci bounds (K1, K2) and the horizon T.
//
// All expressions are written without the ratio K1/K2 so that they stay
// well conditioned as K2 -> 0; the exponential differences go through
// phi(x) = (1 - e^{-x}) / x and sinhc(x) = sinh(x) / x.

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pathgap {

/// Below this value of |K2| * T every formula is evaluated through its K2 -> 0 expansion.
inline constexpr double kFlatCurvatureThreshold = 1e-6;

/// Admissible Ricci bounds: K2 Id <= sym(ric) and |||ric||| <= K1.
class CurvatureBounds {
public:
    CurvatureBounds(double k1, double k2) : k1_(k1), k2_(k2)
    {
        if (!admissible(k1, k2)) {
            std::ostringstream os;
            os << "inadmissible curvature bounds (k1=" << k1 << ", k2=" << k2
               << "): need k1 >= 0, k1 + k2 >= 0, k2 <= k1";
            throw std::invalid_argument(os.str());
        }
    }

    [[nodiscard]] static bool admissible(double k1, double k2) noexcept
    {
        return std::isfinite(k1) && std::isfinite(k2) && k1 >= 0.0 && k1 + k2 >= 0.0 && k2 <= k1;
    }

    [[nodiscard]] double k1() const noexcept { return k1_; }
    [[nodiscard]] double k2() const noexcept { return k2_; }

    friend bool operator==(const CurvatureBounds&, const CurvatureBounds&) = default;

private:
    double k1_;
    double k2_;
};

/// Time horizon T > 0 of the path space.
class Horizon {
public:
    explicit Horizon(double T) : T_(T)
    {
        if (!(T > 0.0) || !std::isfinite(T)) {
            throw std::invalid_argument("horizon must be finite and > 0");
        }
    }
    [[nodiscard]] double value() const noexcept { return T_; }

private:
    double T_;
};

namespace detail {

inline constexpr double kSeriesCutoff = 0.5 * kFlatCurvatureThreshold;

/// (1 - e^{-x}) / x
[[nodiscard]] inline double phi(double x) noexcept
{
    if (std::fabs(x) < kSeriesCutoff) {
        return 1.0 - 0.5 * x + x * x / 6.0;
    }
    return -std::expm1(-x) / x;
}

/// sinh(x) / x
[[nodiscard]] inline double sinhc(double x) noexcept
{
    if (std::fabs(x) < kSeriesCutoff) {
        return 1.0 + x * x / 6.0;
    }
    return std::sinh(x) / x;
}

/// log(1 + z) / z
[[nodiscard]] inline double log1p_ratio(double z) noexcept
{
    if (std::fabs(z) < kSeriesCutoff) {
        return 1.0 - 0.5 * z + z * z / 3.0;
    }
    return std::log1p(z) / z;
}

inline void check_time(double t, double T)
{
    if (!(t >= 0.0 && t <= T)) {
        std::ostringstream os;
        os << "time " << t << " outside [0, " << T << "]";
        throw std::domain_error(os.str());
    }
}

/// (K1/K2) (1 - e^{-K2 T / 2}) == Lambda(0, T) - 1
[[nodiscard]] inline double lambda0_excess(double T, const CurvatureBounds& cb) noexcept
{
    return cb.k1() * 0.5 * T * phi(0.5 * cb.k2() * T);
}

}  // namespace detail

[[nodiscard]] inline bool is_flat(const Horizon& T, const CurvatureBounds& cb) noexcept
{
    return std::fabs(cb.k2()) * T.value() < kFlatCurvatureThreshold;
}

/// Weight Lambda(t, T) comparing damped and usual gradient energies.
[[nodiscard]] inline double lambda(double t, const Horizon& horizon, const CurvatureBounds& cb)
{
    const double T = horizon.value();
    detail::check_time(t, T);
    const double k1 = cb.k1();
    const double k2 = cb.k2();
    if (k1 == 0.0) {
        return 1.0;
    }
    const double x = 0.5 * k2 * t;
    const double y = 0.5 * k2 * T;

    const double linear = k1 * 0.5 * (T - t) * detail::phi(0.5 * k2 * (T - t))
                        + k1 * 0.5 * t * detail::phi(x);

    // (1 - e^{-x} - e^{-y} sinh x) / K2^2. For K2 > 0 and x > 1 the direct form is
    // well conditioned; elsewhere (1 - e^{-y}) sinh x - 2 sinh^2(x/2) avoids the 0/0.
    double quad = 0.0;
    if (k2 > 0.0 && x > 1.0) {
        quad = (-std::expm1(-x) - std::exp(-y) * std::sinh(x)) / (k2 * k2);
    } else {
        const double s = detail::sinhc(0.5 * x);
        quad = 0.25 * T * t * detail::phi(y) * detail::sinhc(x) - 0.125 * t * t * s * s;
    }
    return 1.0 + linear + k1 * k1 * quad;
}

/// d/dt Lambda(t, T).
[[nodiscard]] inline double lambda_prime(double t, const Horizon& horizon, const CurvatureBounds& cb)
{
    const double T = horizon.value();
    detail::check_time(t, T);
    const double k1 = cb.k1();
    const double k2 = cb.k2();
    if (k1 == 0.0) {
        return 0.0;
    }
    const double x = 0.5 * k2 * t;
    const double y = 0.5 * k2 * T;
    const double linear = 0.5 * k1 * (std::exp(-x) - std::exp(-(y - x)));
    double quad = 0.0;
    if (k2 > 0.0 && x > 1.0) {
        quad = k1 * k1 / (2.0 * k2) * (std::exp(-x) - std::exp(-y) * std::cosh(x));
    } else {
        quad = 0.25 * k1 * k1 * (T * detail::phi(y) * std::cosh(x) - t * detail::sinhc(x));
    }
    return linear + quad;
}

struct ArgmaxResult {
    double t_star;
    /// True when the maximum sits on the boundary t = T (K2 <= 0, or K1 = 0 where Lambda is constant).
    bool boundary;
};

/// Location of sup_t Lambda(t, T), from the closed-form stationarity condition.
[[nodiscard]] inline ArgmaxResult lambda_argmax(const Horizon& horizon, const CurvatureBounds& cb)
{
    const double T = horizon.value();
    const double k1 = cb.k1();
    const double k2 = cb.k2();
    if (k1 == 0.0 || k2 <= 0.0) {
        return {T, true};
    }
    // e^{K2 t0} = (1 + b/(2+b) (1 - e^{-K2 T/2})) e^{K2 T/2},  b = K1/K2
    const double excess = detail::lambda0_excess(T, cb);
    const double denom = 2.0 * k2 + k1;
    const double z = k2 * excess / denom;
    double t0 = 0.5 * T + excess * detail::log1p_ratio(z) / denom;
    if (t0 > T) t0 = T;
    if (t0 < 0.0) t0 = 0.0;
    return {t0, false};
}

/// sup_{t in [0,T]} Lambda(t, T).
[[nodiscard]] inline double lambda_sup(const Horizon& horizon, const CurvatureBounds& cb)
{
    if (cb.k1() == 0.0) {
        return 1.0;
    }
    if (cb.k2() > 0.0) {
        // Equal to the closed form in b = K1/K2, whose terms cancel like b^2 for small K2.
        return lambda(lambda_argmax(horizon, cb).t_star, horizon, cb);
    }
    const double l0 = 1.0 + detail::lambda0_excess(horizon.value(), cb);
    return 0.5 + 0.5 * l0 * l0;
}

/// Closed-form upper bound psi(T, K1, K2) on the inverse spectral gap.
[[nodiscard]] inline double psi(const Horizon& horizon, const CurvatureBounds& cb)
{
    const double k1 = cb.k1();
    const double k2 = cb.k2();
    if (k1 == 0.0) {
        return 1.0;
    }
    const double T = horizon.value();
    const double c = detail::lambda0_excess(T, cb);
    if (k2 <= 0.0) {
        return 1.0 + 0.5 * c * (2.0 + c);
    }
    // (1+b)^2 - b sqrt((2+b)(2+2b-b e^{-y})) e^{-y/2}  ==  1 + c (2 + c) / (1 + S e^{-y/2})
    const double u = k2 * c / (2.0 * k2 + k1);
    const double se = std::sqrt(1.0 + u) * std::exp(-0.25 * k2 * T);
    return 1.0 + c * (2.0 + c) / (1.0 + se);
}

struct SmallTimeGap {
    double lower;
    double upper;
};

/// First-order small-T window 1 - K1 T/2 <= Spect <= 1 + K2(x) T/2.
[[nodiscard]] inline SmallTimeGap gap_bounds_small_time(double T, const CurvatureBounds& cb, double k2_at_x)
{
    if (!(T >= 0.0)) {
        throw std::domain_error("horizon must be >= 0");
    }
    return {1.0 - 0.5 * cb.k1() * T, 1.0 + 0.5 * k2_at_x * T};
}

struct BoundReport {
    double T;
    double k1;
    double k2;
    double lambda_at_0;
    double lambda_at_T;
    double t_star;
    bool t_star_boundary;
    double lambda_sup;
    double psi;
    double gap_lower_from_sup;
    double gap_lower_from_psi;
};

[[nodiscard]] inline BoundReport bound_report(const Horizon& horizon, const CurvatureBounds& cb)
{
    BoundReport r{};
    r.T = horizon.value();
    r.k1 = cb.k1();
    r.k2 = cb.k2();
    r.lambda_at_0 = lambda(0.0, horizon, cb);
    r.lambda_at_T = lambda(r.T, horizon, cb);
    const auto arg = lambda_argmax(horizon, cb);
    r.t_star = arg.t_star;
    r.t_star_boundary = arg.boundary;
    r.lambda_sup = lambda_sup(horizon, cb);
    r.psi = psi(horizon, cb);
    r.gap_lower_from_sup = 1.0 / r.lambda_sup;
    r.gap_lower_from_psi = 1.0 / r.psi;
    return r;
}

/// (t, Lambda(t, T)) on n + 1 equally spaced points of [0, T].
[[nodiscard]] inline std::vector<std::pair<double, double>> lambda_profile(const Horizon& horizon,
                                                                           const CurvatureBounds& cb, int n)
{
    if (n < 1) {
        throw std::invalid_argument("profile needs n >= 1");
    }
    const double T = horizon.value();
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = (i == n) ? T : T * static_cast<double>(i) / n;
        out.emplace_back(t, lambda(t, horizon, cb));
    }
    return out;
}

}  // namespace pathgap
