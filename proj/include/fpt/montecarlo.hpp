#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "fpt/boundary.hpp"
#include "fpt/quadrature.hpp"

namespace fpt {

/// Counter-based random stream: output k is the SplitMix64 finalizer applied
/// to key(seed, stream_id) + k·γ. (seed, stream_id) fixes the whole sequence,
/// so paths can be generated in any order on any number of workers.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        std::uint64_t z = (state_ += kGamma);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double normal() { return normal_(*this); }
    /// Uniform on (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
    boost::random::normal_distribution<double> normal_;
};

/// One sampled path on the grid 0 = u_0 < ... < u_m = s.
struct BridgePath {
    std::vector<double> grid;
    std::vector<double> values;
};

/// Exact grid sample of a 3-dimensional Bessel bridge from a (time 0) to 0
/// (time s): the norm of (a(1-u/s) + β¹, β², β³) for independent Brownian
/// bridges β^i pinned at 0 on [0, s].
BridgePath sample_bessel_bridge(double a, double s, std::size_t m, RngStream& rng);

/// Euler scheme for dX = dW + (1/X - X/(s-u)) du with reflection at 0 and the
/// final value pinned to 0. Biased; used only as a cross-check.
BridgePath sample_bessel_bridge_euler(double a, double s, std::size_t m, RngStream& rng);

struct McParams {
    std::size_t n_paths = 100000;
    std::size_t steps = 1024;
    std::uint64_t seed = 0;
    /// Pair each bridge with its reflection (β ↦ -β). n_paths counts both members.
    bool antithetic = true;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;

    std::pair<double, double> confidence_interval(double z = 1.96) const {
        return {mean - z * std_error, mean + z * std_error};
    }
};

/// E[exp{-∫_0^s f''(u) X̃_u du}] over Bessel bridges from a = f(0) to 0,
/// trapezoid rule on the m-step grid. With antithetic pairing the standard
/// error comes from the pair averages and an odd n_paths is rounded up.
McEstimate bridge_functional_estimate(const Boundary& bd, double s, const McParams& params,
                                      std::uint64_t stream_offset = 0);

/// Hitting density through the Girsanov identity:
/// E[...] · exp{-½∫_0^s (f')² - f'(0)a} · φ_a(s), per grid point.
DensityCurve girsanov_density_curve(const Boundary& bd, std::span<const double> s_grid, const McParams& params);

struct DirectHittingResult {
    /// Histogram density at each grid point from a bin centred on it.
    DensityCurve density;
    std::vector<double> cdf;  ///< fraction of paths hit by each grid point
    std::vector<double> cdf_std_error;
    double hit_fraction = 0.0;  ///< hit by the horizon max(s_grid)
    double hit_std_error = 0.0;
    double horizon = 0.0;
    double bin_width = 0.0;
    /// Counts of first crossings in equal bins over [0, horizon].
    std::vector<std::size_t> histogram;
};

/// Simulates B on m uniform steps up to max(s_grid). Within a step where both
/// gaps f - B are positive, a crossing of the linearised boundary happens with
/// probability exp{-2 g_i g_{i+1} / Δt}. Crossing times are step midpoints;
/// density bins are whole steps centred on each s. bin_width <= 0 selects
/// horizon / n_bins.
DirectHittingResult direct_hitting_density(const Boundary& bd, std::span<const double> s_grid,
                                           const McParams& params, double bin_width = 0.0,
                                           std::size_t n_bins = 64);

}  // namespace fpt
