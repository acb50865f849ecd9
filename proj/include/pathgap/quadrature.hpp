#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cstddef>

namespace pathgap {

/// Gauss-Legendre rule on [0, 1]; exact for polynomials of degree 2n - 1.
template <std::size_t N>
struct UnitGaussRule {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    UnitGaussRule()
    {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        // boost stores the nonnegative half; an odd rule starts with the centre node.
        std::size_t pos = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) {
                nodes[pos] = 0.5;
                weights[pos++] = 0.5 * w[i];
                continue;
            }
            nodes[pos] = 0.5 * (1.0 - x[i]);
            weights[pos++] = 0.5 * w[i];
            nodes[pos] = 0.5 * (1.0 + x[i]);
            weights[pos++] = 0.5 * w[i];
        }
    }
};

[[nodiscard]] inline const UnitGaussRule<8>& gauss8()
{
    static const UnitGaussRule<8> rule;
    return rule;
}

}  // namespace pathgap
