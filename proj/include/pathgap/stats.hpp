#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace pathgap {

/// Monte-Carlo mean with its standard error stderr = sample_std / sqrt(n).
struct EstimateWithCI {
    double mean = 0.0;
    double stderr = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] double lower(double z = 1.959963984540054) const noexcept { return mean - z * stderr; }
    [[nodiscard]] double upper(double z = 1.959963984540054) const noexcept { return mean + z * stderr; }
    [[nodiscard]] bool covers(double value, double z = 1.959963984540054) const noexcept
    {
        return lower(z) <= value && value <= upper(z);
    }
};

/// Streaming means and co-moments of K jointly observed quantities (Welford, Chan merge).
template <std::size_t K>
class CoMoments {
public:
    void add(const std::array<double, K>& x) noexcept
    {
        ++n_;
        const double nn = static_cast<double>(n_);
        std::array<double, K> delta{};
        for (std::size_t i = 0; i < K; ++i) {
            delta[i] = x[i] - mean_[i];
            mean_[i] += delta[i] / nn;
        }
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                m2_[i][j] += delta[i] * (x[j] - mean_[j]);
            }
        }
    }

    void merge(const CoMoments& o) noexcept
    {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double nt = na + nb;
        std::array<double, K> delta{};
        for (std::size_t i = 0; i < K; ++i) delta[i] = o.mean_[i] - mean_[i];
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                m2_[i][j] += o.m2_[i][j] + delta[i] * delta[j] * na * nb / nt;
            }
        }
        for (std::size_t i = 0; i < K; ++i) mean_[i] += delta[i] * nb / nt;
        n_ += o.n_;
    }

    [[nodiscard]] std::int64_t count() const noexcept { return n_; }
    [[nodiscard]] double mean(std::size_t i) const noexcept { return mean_[i]; }

    /// Unbiased sample covariance.
    [[nodiscard]] double covariance(std::size_t i, std::size_t j) const noexcept
    {
        return n_ > 1 ? m2_[i][j] / static_cast<double>(n_ - 1) : 0.0;
    }

    /// Standard error of sum_i g_i * mean_i (delta method for a smooth function with gradient g).
    [[nodiscard]] double linear_stderr(const std::array<double, K>& g) const noexcept
    {
        if (n_ < 2) return 0.0;
        double v = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) v += g[i] * g[j] * covariance(i, j);
        }
        return std::sqrt(std::max(0.0, v) / static_cast<double>(n_));
    }

    [[nodiscard]] EstimateWithCI estimate(std::size_t i, std::uint64_t seed) const noexcept
    {
        std::array<double, K> g{};
        g[i] = 1.0;
        return {mean_[i], linear_stderr(g), n_, seed};
    }

private:
    std::int64_t n_ = 0;
    std::array<double, K> mean_{};
    std::array<std::array<double, K>, K> m2_{};
};

}  // namespace pathgap
