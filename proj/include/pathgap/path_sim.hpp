#pragma once

// Geodesic random walk on the frame bundle: every step follows the geodesic with
// initial velocity u * dw and carries the frame along by parallel transport.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "pathgap/geometry.hpp"

namespace pathgap {

/// Discretization times 0 = t_0 < ... < t_n = T.
class TimeGrid {
public:
    /// Uniform grid with `n_steps` cells plus every time in `required` inserted exactly.
    TimeGrid(double T, int n_steps, std::span<const double> required = {})
    {
        if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("grid horizon must be > 0");
        if (n_steps < 1) throw std::invalid_argument("grid needs n_steps >= 1");
        times_.reserve(static_cast<std::size_t>(n_steps) + 1 + required.size());
        for (int i = 0; i <= n_steps; ++i) times_.push_back(i == n_steps ? T : T * i / n_steps);

        // Nodes closer than this to a required time are replaced by it.
        const double snap = 1e-9 * T / n_steps;
        for (double t : required) {
            if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("required grid time outside [0, T]");
            auto it = std::lower_bound(times_.begin(), times_.end(), t);
            if (it != times_.end() && std::fabs(*it - t) <= snap) {
                if (it != times_.begin() && std::next(it) != times_.end()) *it = t;
                continue;
            }
            if (it != times_.begin() && std::fabs(*std::prev(it) - t) <= snap) {
                auto p = std::prev(it);
                if (p != times_.begin()) *p = t;
                continue;
            }
            times_.insert(it, t);
        }
    }

    [[nodiscard]] double horizon() const noexcept { return times_.back(); }
    [[nodiscard]] int n_steps() const noexcept { return static_cast<int>(times_.size()) - 1; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return times_[i]; }
    [[nodiscard]] double dt(std::size_t i) const noexcept { return times_[i + 1] - times_[i]; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }

    /// Index of a node that equals t exactly.
    [[nodiscard]] std::size_t index_of(double t) const
    {
        auto it = std::lower_bound(times_.begin(), times_.end(), t);
        if (it == times_.end() || *it != t) {
            std::ostringstream os;
            os << std::setprecision(17) << "time " << t << " is not a grid node";
            throw std::invalid_argument(os.str());
        }
        return static_cast<std::size_t>(it - times_.begin());
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> times_;
};

/// One discretized Brownian path on the frame bundle.
struct PathSample {
    TimeGrid grid;
    std::vector<FramePoint> frames;  // n_steps + 1
    std::vector<Vec> increments;     // n_steps, driving Brownian increments in R^d
    std::uint64_t seed = 0;

    [[nodiscard]] const Vec& position(std::size_t i) const { return frames[i].position; }
};

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of path k in a batch: a pure function of (base_seed, k).
[[nodiscard]] constexpr std::uint64_t path_seed(std::uint64_t base_seed, std::uint64_t k) noexcept
{
    return mix64(base_seed ^ mix64(k ^ 0xD1B54A32D192ED03ULL));
}

/// Sample a geodesic random walk started at origin(m). With `negate` the Gaussian
/// increments drawn from `seed` are used with flipped sign (antithetic partner).
[[nodiscard]] inline PathSample sample_path(const ModelManifold& m, const TimeGrid& grid, std::uint64_t seed,
                                            bool negate = false)
{
    const int d = m.dim();
    const auto n = static_cast<std::size_t>(grid.n_steps());
    PathSample p{grid, {}, {}, seed};
    p.frames.reserve(n + 1);
    p.increments.reserve(n);
    p.frames.push_back(origin(m));

    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sign = negate ? -1.0 : 1.0;
    FramePoint current = p.frames.front();
    for (std::size_t i = 0; i < n; ++i) {
        const double sd = std::sqrt(grid.dt(i));
        Vec dw(d);
        for (int j = 0; j < d; ++j) dw(j) = sign * sd * normal(engine);
        geodesic_step_inplace(m, current, dw, 1.0);
        p.increments.push_back(dw);
        p.frames.push_back(current);
    }
    return p;
}

/// n_paths reproducible samples; path k depends only on (base_seed, k).
class PathBatch {
public:
    PathBatch(ModelManifold m, TimeGrid grid, std::size_t n_paths, std::uint64_t base_seed, bool antithetic = false)
        : m_(std::move(m)), grid_(std::move(grid)), n_(n_paths), base_(base_seed), antithetic_(antithetic)
    {
        if (n_paths < 1) throw std::invalid_argument("batch needs n_paths >= 1");
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] const ModelManifold& manifold() const noexcept { return m_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] bool antithetic() const noexcept { return antithetic_; }

    /// With antithetic sampling paths 2j and 2j+1 share a seed and have opposite increments.
    [[nodiscard]] PathSample operator[](std::size_t k) const
    {
        if (antithetic_) return sample_path(m_, grid_, path_seed(base_, k / 2), (k % 2) == 1);
        return sample_path(m_, grid_, path_seed(base_, k));
    }

private:
    ModelManifold m_;
    TimeGrid grid_;
    std::size_t n_;
    std::uint64_t base_;
    bool antithetic_;
};

/// Debug dump: step, time, position..., frame (column major)..., dw...
inline void write_path_csv(std::ostream& os, const PathSample& p)
{
    const auto n = static_cast<std::size_t>(p.grid.n_steps());
    const Eigen::Index amb = p.frames.front().position.size();
    const Eigen::Index d = p.frames.front().frame.cols();
    os << "step,time";
    for (Eigen::Index i = 0; i < amb; ++i) os << ",x" << i;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < amb; ++i) os << ",e" << j << "_" << i;
    for (Eigen::Index j = 0; j < d; ++j) os << ",dw" << j;
    os << '\n' << std::setprecision(17);
    for (std::size_t s = 0; s <= n; ++s) {
        os << s << ',' << p.grid[s];
        const FramePoint& fp = p.frames[s];
        for (Eigen::Index i = 0; i < amb; ++i) os << ',' << fp.position(i);
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index i = 0; i < amb; ++i) os << ',' << fp.frame(i, j);
        for (Eigen::Index j = 0; j < d; ++j) os << ',' << (s < n ? p.increments[s](j) : 0.0);
        os << '\n';
    }
}

}  // namespace pathgap
