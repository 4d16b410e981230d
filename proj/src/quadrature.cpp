#include "fpt/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>

#include "fpt/error.hpp"
#include "fpt/kernels.hpp"
#include "fpt/parallel.hpp"

namespace fpt {

namespace {

constexpr int kOrder = 15;

struct GaussLegendre {
    std::array<double, kOrder> nodes{};
    std::array<double, kOrder> weights{};

    GaussLegendre() {
        // Newton on P_n from Chebyshev initial guesses.
        for (int i = 0; i < kOrder; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= kOrder; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

const GaussLegendre& rule() {
    static const GaussLegendre gl;
    return gl;
}

double gl_panel(const Integrand& g, double lo, double hi) {
    const auto& r = rule();
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (int i = 0; i < kOrder; ++i) {
        const double x = mid + half * r.nodes[i];
        const double y = g(x);
        if (!std::isfinite(y)) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "non-finite integrand sample at x = %.17g", x);
            throw QuadratureError(buf, std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::infinity());
        }
        sum += r.weights[i] * y;
    }
    return half * sum;
}

struct Panel {
    double lo, hi;
    double coarse;  // single-panel estimate
    double left, right;
    double error;

    double value() const { return left + right; }
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel make_panel(const Integrand& g, double lo, double hi, double coarse) {
    const double mid = 0.5 * (lo + hi);
    Panel p{lo, hi, coarse, gl_panel(g, lo, mid), gl_panel(g, mid, hi), 0.0};
    p.error = std::abs(p.coarse - p.value());
    return p;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0)) throw ConfigError("abs_tol must be positive");
    if (max_panels < 1) throw ConfigError("max_panels must be at least 1");
    if (!(truncation_sigmas > 0.0)) throw ConfigError("truncation_sigmas must be positive");
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw ConfigError("eps0 must lie in (0, 1)");
    if (!(eps_ratio > 0.0 && eps_ratio < 1.0)) throw ConfigError("eps_ratio must lie in (0, 1)");
    if (eps_terms < 5) throw ConfigError("eps_terms must be at least 5");
}

std::vector<double> QuadratureSpec::eps_schedule(double span) const {
    std::vector<double> eps(static_cast<std::size_t>(eps_terms));
    double e = eps0 * std::min(1.0, span);
    for (auto& x : eps) {
        x = e;
        e *= eps_ratio;
    }
    return eps;
}

QuadResult integrate_interval(const Integrand& g, double lo, double hi, const QuadratureSpec& spec,
                              std::span<const double> breakpoints) {
    if (!(hi > lo)) {
        if (hi == lo) return {};
        throw DomainError("integrate_interval requires lo <= hi");
    }
    std::vector<double> cuts{lo, hi};
    for (const double b : breakpoints) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Panel> queue;
    std::vector<Panel> done;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = make_panel(g, cuts[i], cuts[i + 1], gl_panel(g, cuts[i], cuts[i + 1]));
        total_error += p.error;
        queue.push(p);
    }
    std::size_t panels = queue.size();

    while (total_error > spec.abs_tol && !queue.empty()) {
        if (panels >= spec.max_panels) {
            double value = 0.0;
            auto q = queue;
            while (!q.empty()) {
                value += q.top().value();
                q.pop();
            }
            for (const auto& p : done) value += p.value();
            throw QuadratureError("quadrature panel budget exhausted", value, total_error);
        }
        const Panel worst = queue.top();
        queue.pop();
        total_error -= worst.error;
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Cannot bisect further; keep its error in the total.
            total_error += worst.error;
            done.push_back(worst);
            continue;
        }
        Panel l = make_panel(g, worst.lo, mid, worst.left);
        Panel r = make_panel(g, mid, worst.hi, worst.right);
        total_error += l.error + r.error;
        queue.push(l);
        queue.push(r);
        ++panels;
    }

    while (!queue.empty()) {
        done.push_back(queue.top());
        queue.pop();
    }
    std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) { return x.lo < y.lo; });
    std::vector<double> values, errors;
    values.reserve(done.size());
    errors.reserve(done.size());
    for (const auto& p : done) {
        values.push_back(p.value());
        errors.push_back(p.error);
    }
    return {pairwise_sum(values), pairwise_sum(errors), panels};
}

QuadResult integrate_semi_infinite(const Integrand& g, std::span<const GaussianFeature> features,
                                   const QuadratureSpec& spec) {
    if (features.empty()) throw DomainError("integrate_semi_infinite needs at least one feature");
    const double k = spec.truncation_sigmas;
    double upper = 0.0;
    for (const auto& f : features) {
        if (!(f.width > 0.0) || !std::isfinite(f.center)) throw DomainError("feature widths must be positive");
        upper = std::max(upper, f.center + k * f.width);
    }
    if (!(upper > 0.0)) return {};
    std::vector<double> cuts;
    const int steps = static_cast<int>(std::ceil(k));
    for (const auto& f : features) {
        for (int j = -steps; j <= steps; ++j) cuts.push_back(f.center + j * f.width);
    }
    return integrate_interval(g, 0.0, upper, spec, cuts);
}

std::string to_string(LimitVerdict v) {
    switch (v) {
        case LimitVerdict::converged: return "converged";
        case LimitVerdict::diverging: return "diverging";
        case LimitVerdict::oscillating: return "oscillating";
    }
    return "unknown";
}

namespace {

LimitVerdict classify(const std::vector<double>& values, double noise) {
    const std::size_t n = values.size();
    std::vector<double> diffs(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) diffs[i] = values[i + 1] - values[i];

    // Last four differences.
    const std::size_t first = diffs.size() - 4;
    bool shrinking = true, growing = true;
    for (std::size_t i = first; i + 1 < diffs.size(); ++i) {
        const double d0 = std::abs(diffs[i]), d1 = std::abs(diffs[i + 1]);
        if (!(d1 < d0 || d1 <= noise)) shrinking = false;
        if (!(d1 >= d0) || d1 <= noise) growing = false;
    }
    if (shrinking) return LimitVerdict::converged;
    bool same_sign = true;
    for (std::size_t i = first; i + 1 < diffs.size(); ++i) {
        if (diffs[i] * diffs[i + 1] < 0.0) same_sign = false;
    }
    if (growing && same_sign) return LimitVerdict::diverging;
    return LimitVerdict::oscillating;
}

}  // namespace

VResult v_of(double t, double a, double s, const Boundary& bd, const QuadratureSpec& spec) {
    if (!(t >= 0.0 && t < s)) throw DomainError("v_of requires 0 <= t < s");
    if (!(a > 0.0)) throw DomainError("v_of requires a > 0");
    spec.validate();

    VResult out;
    auto& diag = out.diagnostics;
    diag.eps = spec.eps_schedule(s - t);
    diag.values.reserve(diag.eps.size());
    for (const double eps : diag.eps) {
        const double tau = s - eps;
        const KernelSlice slice(bd, t, a, tau, s);
        const double dt = slice.elapsed();
        const double precision = 1.0 / eps + 1.0 / dt;
        const double width = 1.0 / std::sqrt(precision);
        const double shift = slice.df_tau();
        const double direct_peak = ((a + slice.drift_integral()) / dt - shift) / precision;
        const double image_peak = ((slice.drift_integral() - a) / dt - shift) / precision;
        const std::array<GaussianFeature, 3> features{{
            {0.0, std::sqrt(eps)},
            {std::max(0.0, direct_peak), width},
            {std::max(0.0, image_peak), width},
        }};
        const auto r = integrate_semi_infinite([&](double b) { return slice.G(b); }, features, spec);
        diag.values.push_back(r.value);
    }

    const auto n = static_cast<Eigen::Index>(diag.eps.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = diag.eps[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = std::sqrt(e);
        design(i, 2) = e;
        rhs(i) = diag.values[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
    diag.coefficients = {coef(0), coef(1), coef(2)};
    diag.fit_rms = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));

    double scale = 1.0;
    for (const double v : diag.values) scale = std::max(scale, std::abs(v));
    diag.verdict = classify(diag.values, 50.0 * spec.abs_tol * scale);
    diag.extrapolated = diag.verdict == LimitVerdict::converged ? coef(0) : std::numeric_limits<double>::quiet_NaN();
    out.value = diag.extrapolated;
    return out;
}

std::string to_string(PointStatus s) {
    switch (s) {
        case PointStatus::converged: return "converged";
        case PointStatus::diverging: return "diverging";
        case PointStatus::oscillating: return "oscillating";
        case PointStatus::exact_linear: return "exact-linear";
        case PointStatus::negligible: return "negligible";
        case PointStatus::failed: return "failed";
        case PointStatus::sampled: return "sampled";
    }
    return "unknown";
}

bool is_usable(PointStatus s) {
    return s == PointStatus::converged || s == PointStatus::exact_linear || s == PointStatus::negligible ||
           s == PointStatus::sampled;
}

bool DensityCurve::all_usable() const {
    return std::all_of(status.begin(), status.end(), [](PointStatus st) { return is_usable(st); });
}

namespace {

struct DensityPoint {
    double value = std::numeric_limits<double>::quiet_NaN();
    double error = 0.0;
    double v = std::numeric_limits<double>::quiet_NaN();
    PointStatus status = PointStatus::failed;
    std::optional<LimitDiagnostics> diagnostics;
    std::string message;
};

DensityPoint density_at(double s, const Boundary& bd, const QuadratureSpec& spec, VPolicy policy) {
    DensityPoint out;
    if (!(s > 0.0)) throw DomainError("density horizons must be positive");
    const double a = bd.initial_level();
    const double level = level_density(a, s);
    const double pref = girsanov_prefactor(bd, s);
    if (policy == VPolicy::exact_when_linear && bd.is_linear()) {
        out.v = 1.0;
        out.value = level * pref;
        out.status = PointStatus::exact_linear;
        return out;
    }
    if (level == 0.0) {
        out.value = 0.0;
        out.status = PointStatus::negligible;
        return out;
    }
    try {
        VResult vr = v_of(0.0, a, s, bd, spec);
        out.v = vr.value;
        switch (vr.diagnostics.verdict) {
            case LimitVerdict::converged:
                out.status = PointStatus::converged;
                out.value = vr.value * level * pref;
                out.error = std::abs(vr.diagnostics.values.back() - vr.value) * level * pref;
                break;
            case LimitVerdict::diverging: out.status = PointStatus::diverging; break;
            case LimitVerdict::oscillating: out.status = PointStatus::oscillating; break;
        }
        out.diagnostics = std::move(vr.diagnostics);
    } catch (const QuadratureError& e) {
        out.status = PointStatus::failed;
        out.message = e.what();
    }
    return out;
}

}  // namespace

DensityCurve fpt_density(std::span<const double> s_grid, const Boundary& bd, const QuadratureSpec& spec,
                         VPolicy policy) {
    spec.validate();
    const std::size_t n = s_grid.size();
    std::vector<DensityPoint> points(n);
    parallel_for(n, [&](std::size_t i) { points[i] = density_at(s_grid[i], bd, spec, policy); });

    DensityCurve curve;
    curve.s.assign(s_grid.begin(), s_grid.end());
    for (auto& p : points) {
        curve.value.push_back(p.value);
        curve.std_error.push_back(p.error);
        curve.status.push_back(p.status);
        curve.v.push_back(p.v);
        curve.diagnostics.push_back(std::move(p.diagnostics));
        curve.message.push_back(std::move(p.message));
    }
    return curve;
}

CdfResult fpt_cdf(double t_max, const Boundary& bd, const QuadratureSpec& spec, VPolicy policy) {
    if (!(t_max > 0.0)) throw DomainError("fpt_cdf requires t_max > 0");
    spec.validate();
    // Geometric breakpoints resolve the flat start and the peak at any scale.
    std::vector<double> cuts;
    for (int j = 1; j <= 40; ++j) cuts.push_back(t_max * std::ldexp(1.0, -j));

    PointStatus bad = PointStatus::converged;
    auto density = [&](double s) {
        const DensityPoint p = density_at(s, bd, spec, policy);
        if (!is_usable(p.status)) bad = p.status;
        return p.value;
    };
    CdfResult out;
    try {
        const QuadResult r = integrate_interval(density, 0.0, t_max, spec, cuts);
        out.value = r.value;
        out.error = r.error;
    } catch (const QuadratureError& e) {
        out.ok = false;
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.error = std::numeric_limits<double>::infinity();
        out.message = is_usable(bad) ? std::string(e.what()) : "density point " + to_string(bad);
    }
    return out;
}

}  // namespace fpt
