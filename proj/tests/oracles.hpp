#pragma once

// Independent reference implementations for the tests: the closed forms exactly as
// they are usually written (ratio K1/K2 and all), evaluated in 50-digit arithmetic,
// plus brute-force versions of the discrete path computations.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <functional>
#include <vector>

#include "pathgap/geometry.hpp"
#include "pathgap/path_sim.hpp"

namespace oracle {

using mp = boost::multiprecision::cpp_bin_float_50;

inline mp lambda(mp t, mp T, mp k1, mp k2)
{
    using boost::multiprecision::exp;
    if (k2 == 0) return 1 + k1 * T / 2 + k1 * k1 * (T * t / 4 - t * t / 8);
    const mp b = k1 / k2;
    return 1 + b * (1 - exp(-k2 * (T - t) / 2)) + b * (1 - exp(-k2 * t / 2)) +
           b * b * ((1 - exp(-k2 * t / 2)) + (exp(-k2 * (T + t) / 2) - exp(-k2 * (T - t) / 2)) / 2);
}

inline mp lambda_prime(mp t, mp T, mp k1, mp k2)
{
    using boost::multiprecision::exp;
    return -k1 / 2 * exp(-k2 * (T - t) / 2) + k1 / 2 * exp(-k2 * t / 2) + k1 * k1 / (2 * k2) * exp(-k2 * t / 2) -
           k1 * k1 / (4 * k2) * exp(-k2 * (T + t) / 2) - k1 * k1 / (4 * k2) * exp(-k2 * (T - t) / 2);
}

/// Root of the stationarity equation e^{K2 t0/2} = sqrt(1 + b/(2+b)(1 - e^{-K2T/2})) e^{K2T/4}.
inline mp argmax(mp T, mp k1, mp k2)
{
    using boost::multiprecision::exp;
    using boost::multiprecision::log;
    using boost::multiprecision::sqrt;
    const mp b = k1 / k2;
    const mp rhs = sqrt(1 + b / (2 + b) * (1 - exp(-k2 * T / 2))) * exp(k2 * T / 4);
    return 2 * log(rhs) / k2;
}

/// sup Lambda for K2 > 0 in the closed form with beta = K1/K2.
inline mp sup_positive(mp T, mp k1, mp k2)
{
    using boost::multiprecision::exp;
    using boost::multiprecision::sqrt;
    const mp b = k1 / k2;
    const mp S = sqrt(1 + b / (2 + b) * (1 - exp(-k2 * T / 2)));
    const mp e = exp(-k2 * T / 4);
    return (1 + b) * (1 + b) - (b + b * b / 2) * S * e - (b + b * b - b * b / 2 * exp(-k2 * T / 2)) / S * e;
}

/// sup Lambda = Lambda(T, T) for K2 < 0.
inline mp sup_negative(mp T, mp k1, mp k2)
{
    using boost::multiprecision::exp;
    const mp l0 = 1 + k1 / k2 * (1 - exp(-k2 * T / 2));
    return mp(1) / 2 + l0 * l0 / 2;
}

inline mp psi_positive(mp T, mp k1, mp k2)
{
    using boost::multiprecision::exp;
    using boost::multiprecision::sqrt;
    const mp b = k1 / k2;
    return (1 + b) * (1 + b) - b * sqrt((2 + b) * (2 + 2 * b - b * exp(-k2 * T / 2))) * exp(-k2 * T / 4);
}

inline mp flat_limit(mp T, mp k1) { return 1 + k1 * T / 2 + k1 * k1 * T * T / 8; }

/// Golden-section maximization of a unimodal function on [a, b].
inline mp golden_max(const std::function<mp(mp)>& f, mp a, mp b, mp tol)
{
    using boost::multiprecision::sqrt;
    const mp g = (sqrt(mp(5)) - 1) / 2;
    mp c = b - g * (b - a), d = a + g * (b - a);
    mp fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2;
}

/// D_tau F_T at every node by the defining double sums, O(n^2 d^3).
inline std::vector<pathgap::Vec> linear_gradient_bruteforce(const pathgap::Vec& a, const pathgap::PathSample& p,
                                                            const pathgap::ModelManifold& m)
{
    using pathgap::Mat;
    using pathgap::Vec;
    const int d = m.dim();
    const std::size_t n = p.increments.size();
    const double ric = m.ricci_scalar();
    std::vector<Vec> out;
    for (std::size_t k = 0; k <= n; ++k) {
        Vec X = Vec::Zero(d);
        for (int i = 0; i < d; ++i) {
            Vec e = Vec::Zero(d);
            e(i) = 1.0;
            Mat C = Mat::Zero(d, d);  // C_i(w, s_mm, tau_k)
            double outer = 0.0;
            for (std::size_t mm = k; mm < n; ++mm) {
                outer += (C * a).dot(p.increments[mm]);
                const Vec& dw = p.increments[mm];
                C -= m.sectional() * (e * dw.transpose() - dw * e.transpose());
            }
            X(i) = outer;
        }
        const double tail = p.grid.horizon() - p.grid[k];
        out.push_back(X + a + 0.5 * ric * tail * a);
    }
    return out;
}

}  // namespace oracle
