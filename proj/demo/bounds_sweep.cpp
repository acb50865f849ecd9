// Gap lower bound 1/psi(T, K1, K2) for a few curvature regimes, with the comparison
// weight's maximiser. Output is a plain text table.

#include <cstdio>
#include <utility>

#include "pathgap/bounds.hpp"

int main()
{
    using namespace pathgap;
    const std::pair<double, double> regimes[] = {{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.25}, {1.0, 0.0}, {1.0, -1.0}, {3.0, 1.0}};
    std::printf("%6s %6s %6s %10s %10s %10s %8s\n", "K1", "K2", "T", "Lambda(0)", "psi", "1/psi", "t*/T");
    for (const auto& [k1, k2] : regimes) {
        const CurvatureBounds cb(k1, k2);
        for (double T : {0.1, 0.5, 1.0, 2.0, 4.0}) {
            const Horizon H(T);
            const auto r = bound_report(H, cb);
            std::printf("%6.2f %6.2f %6.2f %10.5f %10.5f %10.5f %8.4f%s\n", k1, k2, T, r.lambda_at_0, r.psi,
                        r.gap_lower_from_psi, r.t_star / T, r.t_star_boundary ? " (end)" : "");
        }
    }
    return 0;
}
