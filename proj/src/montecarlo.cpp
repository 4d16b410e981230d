#include "fpt/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fpt/error.hpp"
#include "fpt/kernels.hpp"
#include "fpt/parallel.hpp"

namespace fpt {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Precomputed conditional-Gaussian coefficients of a Brownian bridge pinned
// at 0 on [0, s], plus the drift a(1 - u/s) of the first coordinate.
struct BridgeGrid {
    std::vector<double> u;
    std::vector<double> ratio;  // (s - u_i) / (s - u_{i-1})
    std::vector<double> sd;     // sqrt(δ (s - u_i) / (s - u_{i-1}))
    std::vector<double> drift;  // a (s - u_i) / s

    BridgeGrid(double a, double s, std::size_t m) : u(m + 1), ratio(m + 1), sd(m + 1), drift(m + 1) {
        for (std::size_t i = 0; i <= m; ++i) u[i] = s * static_cast<double>(i) / static_cast<double>(m);
        u[m] = s;
        for (std::size_t i = 0; i <= m; ++i) drift[i] = a * (s - u[i]) / s;
        for (std::size_t i = 1; i <= m; ++i) {
            const double rem_prev = s - u[i - 1], rem = s - u[i];
            ratio[i] = rem / rem_prev;
            sd[i] = std::sqrt((u[i] - u[i - 1]) * rem / rem_prev);
        }
    }
};

void check_bridge_args(double a, double s, std::size_t m) {
    if (!(a > 0.0)) throw DomainError("bridge start a must be positive");
    if (!(s > 0.0)) throw DomainError("bridge horizon s must be positive");
    if (m < 2) throw DomainError("bridge needs at least 2 steps");
}

struct Moments {
    double mean, std_error;
};

Moments sample_moments(const std::vector<double>& ys) {
    const double n = static_cast<double>(ys.size());
    const double mean = pairwise_sum(ys) / n;
    if (ys.size() < 2) return {mean, 0.0};
    std::vector<double> sq(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) sq[i] = (ys[i] - mean) * (ys[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), state_(mix64(mix64(seed + kGamma) ^ (stream_id * 0xD1B54A32D192ED03ull))) {}

BridgePath sample_bessel_bridge(double a, double s, std::size_t m, RngStream& rng) {
    check_bridge_args(a, s, m);
    const BridgeGrid g(a, s, m);
    BridgePath path{g.u, std::vector<double>(m + 1)};
    double b1 = 0.0, b2 = 0.0, b3 = 0.0;
    path.values[0] = a;
    for (std::size_t i = 1; i < m; ++i) {
        b1 = b1 * g.ratio[i] + g.sd[i] * rng.normal();
        b2 = b2 * g.ratio[i] + g.sd[i] * rng.normal();
        b3 = b3 * g.ratio[i] + g.sd[i] * rng.normal();
        const double x = g.drift[i] + b1;
        path.values[i] = std::sqrt(x * x + b2 * b2 + b3 * b3);
    }
    path.values[m] = 0.0;
    return path;
}

BridgePath sample_bessel_bridge_euler(double a, double s, std::size_t m, RngStream& rng) {
    check_bridge_args(a, s, m);
    BridgePath path{std::vector<double>(m + 1), std::vector<double>(m + 1)};
    for (std::size_t i = 0; i <= m; ++i) path.grid[i] = s * static_cast<double>(i) / static_cast<double>(m);
    path.grid[m] = s;
    double x = a;
    path.values[0] = a;
    for (std::size_t i = 1; i < m; ++i) {
        const double u = path.grid[i - 1];
        const double dt = path.grid[i] - u;
        const double safe = std::max(x, 1e-300);
        x += (1.0 / safe - x / (s - u)) * dt + std::sqrt(dt) * rng.normal();
        x = std::abs(x);
        path.values[i] = x;
    }
    path.values[m] = 0.0;
    return path;
}

McEstimate bridge_functional_estimate(const Boundary& bd, double s, const McParams& params,
                                      std::uint64_t stream_offset) {
    const double a = bd.initial_level();
    const std::size_t m = params.steps;
    check_bridge_args(a, s, m);
    if (params.n_paths < 1) throw DomainError("n_paths must be at least 1");
    const auto start = std::chrono::steady_clock::now();

    const BridgeGrid g(a, s, m);
    // Trapezoid weights times f''(u_i).
    std::vector<double> kw(m + 1);
    bool zero_rate = true;
    for (std::size_t i = 0; i <= m; ++i) {
        const double w = (i == 0 ? g.u[1] - g.u[0] : i == m ? g.u[m] - g.u[m - 1] : g.u[i + 1] - g.u[i - 1]);
        kw[i] = 0.5 * w * bd.d2f(g.u[i]);
        if (kw[i] != 0.0) zero_rate = false;
    }

    McEstimate est;
    est.n_steps = m;
    est.seed = params.seed;
    const std::size_t samples = params.antithetic ? (params.n_paths + 1) / 2 : params.n_paths;
    est.n_paths = params.antithetic ? 2 * samples : samples;

    if (zero_rate) {
        // Integrand is identically 1.
        est.mean = 1.0;
        est.std_error = 0.0;
    } else {
        std::vector<double> ys(samples);
        const bool anti = params.antithetic;
        parallel_for(samples, [&](std::size_t j) {
            RngStream rng(params.seed, stream_offset + j);
            double b1 = 0.0, b2 = 0.0, b3 = 0.0;
            double plus = kw[0] * a, minus = kw[0] * a;
            for (std::size_t i = 1; i < m; ++i) {
                b1 = b1 * g.ratio[i] + g.sd[i] * rng.normal();
                b2 = b2 * g.ratio[i] + g.sd[i] * rng.normal();
                b3 = b3 * g.ratio[i] + g.sd[i] * rng.normal();
                const double r2 = b2 * b2 + b3 * b3;
                const double xp = g.drift[i] + b1;
                plus += kw[i] * std::sqrt(xp * xp + r2);
                if (anti) {
                    const double xm = g.drift[i] - b1;
                    minus += kw[i] * std::sqrt(xm * xm + r2);
                }
            }
            ys[j] = anti ? 0.5 * (std::exp(-plus) + std::exp(-minus)) : std::exp(-plus);
        });
        const Moments mo = sample_moments(ys);
        est.mean = mo.mean;
        est.std_error = mo.std_error;
    }
    est.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

DensityCurve girsanov_density_curve(const Boundary& bd, std::span<const double> s_grid, const McParams& params) {
    DensityCurve curve;
    const double a = bd.initial_level();
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        const double s = s_grid[k];
        if (!(s > 0.0)) throw DomainError("density horizons must be positive");
        const McEstimate est = bridge_functional_estimate(bd, s, params, static_cast<std::uint64_t>(k) << 40);
        const double scale = girsanov_prefactor(bd, s) * level_density(a, s);
        curve.s.push_back(s);
        curve.value.push_back(est.mean * scale);
        curve.std_error.push_back(est.std_error * scale);
        curve.status.push_back(PointStatus::sampled);
        curve.v.push_back(est.mean);
        curve.diagnostics.emplace_back();
        curve.message.emplace_back();
    }
    return curve;
}

DirectHittingResult direct_hitting_density(const Boundary& bd, std::span<const double> s_grid,
                                           const McParams& params, double bin_width, std::size_t n_bins) {
    if (s_grid.empty()) throw DomainError("direct_hitting_density needs a non-empty grid");
    if (params.n_paths < 1) throw DomainError("n_paths must be at least 1");
    if (params.steps < 1) throw DomainError("steps must be at least 1");
    if (n_bins < 1) throw DomainError("n_bins must be at least 1");
    for (const double s : s_grid) {
        if (!(s > 0.0)) throw DomainError("density horizons must be positive");
    }
    const double horizon = *std::max_element(s_grid.begin(), s_grid.end());
    const std::size_t m = params.steps;
    const double dt = horizon / static_cast<double>(m);
    if (!(bin_width > 0.0)) bin_width = horizon / static_cast<double>(n_bins);
    const auto half_steps = static_cast<std::size_t>(std::max(1.0, std::round(bin_width / (2.0 * dt))));
    // Simulate half a bin past the horizon so the last bin stays centred.
    const std::size_t total_steps = m + half_steps;

    std::vector<double> level(total_steps + 1);
    for (std::size_t i = 0; i <= total_steps; ++i) level[i] = bd.f(dt * static_cast<double>(i));
    const double sd = std::sqrt(dt);

    constexpr std::int64_t kNoHit = -1;
    std::vector<std::int64_t> hit_step(params.n_paths, kNoHit);
    parallel_for(params.n_paths, [&](std::size_t j) {
        RngStream rng(params.seed, (std::uint64_t{1} << 62) + j);
        double x = 0.0;
        double gap0 = level[0];
        for (std::size_t i = 0; i < total_steps; ++i) {
            x += sd * rng.normal();
            const double gap1 = level[i + 1] - x;
            if (gap1 <= 0.0) {
                hit_step[j] = static_cast<std::int64_t>(i);
                return;
            }
            const double e = -2.0 * gap0 * gap1 / dt;
            if (e > -745.0 && rng.uniform() < std::exp(e)) {
                hit_step[j] = static_cast<std::int64_t>(i);
                return;
            }
            gap0 = gap1;
        }
    });

    std::vector<std::size_t> per_step(total_steps, 0);
    for (const auto h : hit_step) {
        if (h != kNoHit) ++per_step[static_cast<std::size_t>(h)];
    }
    std::vector<std::size_t> cumulative(total_steps + 1, 0);  // hits within the first i steps
    for (std::size_t i = 0; i < total_steps; ++i) cumulative[i + 1] = cumulative[i] + per_step[i];

    const double n = static_cast<double>(params.n_paths);
    auto binomial_se = [n](double p) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / n); };

    DirectHittingResult out;
    out.horizon = horizon;
    out.bin_width = 2.0 * static_cast<double>(half_steps) * dt;
    for (const double s : s_grid) {
        const auto centre = static_cast<std::size_t>(std::llround(s / dt));
        const std::size_t lo = centre > half_steps ? centre - half_steps : 0;
        const std::size_t hi = std::min(total_steps, centre + half_steps);
        const double width = static_cast<double>(hi - lo) * dt;
        const double p = static_cast<double>(cumulative[hi] - cumulative[lo]) / n;
        out.density.s.push_back(s);
        out.density.value.push_back(p / width);
        out.density.std_error.push_back(binomial_se(p) / width);
        out.density.status.push_back(PointStatus::sampled);
        out.density.v.push_back(std::numeric_limits<double>::quiet_NaN());
        out.density.diagnostics.emplace_back();
        out.density.message.emplace_back();

        const auto steps_done = std::min(total_steps, static_cast<std::size_t>(std::floor(s / dt + 1e-9)));
        const double c = static_cast<double>(cumulative[steps_done]) / n;
        out.cdf.push_back(c);
        out.cdf_std_error.push_back(binomial_se(c));
    }
    out.hit_fraction = static_cast<double>(cumulative[m]) / n;
    out.hit_std_error = binomial_se(out.hit_fraction);

    out.histogram.assign(n_bins, 0);
    const double hist_width = horizon / static_cast<double>(n_bins);
    for (std::size_t i = 0; i < m; ++i) {
        const double mid = (static_cast<double>(i) + 0.5) * dt;
        const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(mid / hist_width));
        out.histogram[bin] += per_step[i];
    }
    return out;
}

}  // namespace fpt
