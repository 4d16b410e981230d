#include "fpt/validation.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fpt/error.hpp"

namespace fpt {

namespace {

double sample(const KernelTerm& term, const EvalPoint& p, const Boundary& bd) {
    const double v = term(p, bd);
    if (!std::isfinite(v)) throw DomainError("non-finite kernel sample in residual");
    return v;
}

struct Stencil {
    double centre, time_derivative, first, second;
};

// Central differences of term in (time, space), where the two coordinates are
// selected by the member pointers.
Stencil stencil(const KernelTerm& term, const EvalPoint& p, const Boundary& bd, double EvalPoint::*time,
                double EvalPoint::*space, double h, double k) {
    auto at = [&](double dt, double dx) {
        EvalPoint q = p;
        q.*time += dt;
        q.*space += dx;
        return sample(term, q, bd);
    };
    const double u0 = at(0.0, 0.0);
    const double up = at(0.0, h), um = at(0.0, -h);
    return {u0, (at(k, 0.0) - at(-k, 0.0)) / (2.0 * k), (up - um) / (2.0 * h), (up - 2.0 * u0 + um) / (h * h)};
}

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

double slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

double residual_backward_schrodinger(const KernelTerm& term, const EvalPoint& p, const Boundary& bd, double h,
                                     double k) {
    require(h > 0.0 && k > 0.0, "residual steps must be positive");
    require(p.t - k >= 0.0 && p.t + k < p.tau && p.a - h > 0.0, "residual stencil leaves the admissible region");
    const Stencil st = stencil(term, p, bd, &EvalPoint::t, &EvalPoint::a, h, k);
    return std::abs(-st.time_derivative - 0.5 * st.second + p.a * bd.d2f(p.t) * st.centre);
}

double residual_forward_schrodinger(const KernelTerm& term, const EvalPoint& p, const Boundary& bd, double h,
                                    double k) {
    require(h > 0.0 && k > 0.0, "residual steps must be positive");
    require(p.tau - k > p.t && p.b - h > 0.0, "residual stencil leaves the admissible region");
    const Stencil st = stencil(term, p, bd, &EvalPoint::tau, &EvalPoint::b, h, k);
    return std::abs(st.time_derivative - 0.5 * st.second + p.b * bd.d2f(p.tau) * st.centre);
}

double residual_bessel_cauchy(const EvalPoint& p, const Boundary& bd, double h, double k, const KernelTerm& term) {
    require(h > 0.0 && k > 0.0, "residual steps must be positive");
    require(p.t - k >= 0.0 && p.t + k < p.tau && p.tau < p.s && p.a - h > 0.0,
            "residual stencil leaves the admissible region");
    const Stencil st = stencil(term, p, bd, &EvalPoint::t, &EvalPoint::a, h, k);
    const double drift = 1.0 / p.a - p.a / (p.s - p.t);
    return std::abs(-st.time_derivative + bd.d2f(p.t) * p.a * st.centre - 0.5 * st.second - drift * st.first);
}

double forward_solution_term(const EvalPoint& p, const Boundary& bd) {
    return forward_fundamental_solution(p.tau, p.b, bd);
}

std::string to_string(ResidualVerdict v) {
    switch (v) {
        case ResidualVerdict::converges_to_zero: return "converges-to-zero";
        case ResidualVerdict::plateau: return "plateau";
        case ResidualVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::vector<double> default_residual_steps() { return {1e-2, 5e-3, 2.5e-3}; }

ResidualReport residual_report(std::string operator_name, const EvalPoint& p,
                               const std::function<double(double)>& residual, std::span<const double> steps) {
    if (steps.size() < 3) throw ConfigError("residual report needs at least 3 step sizes");
    ResidualReport r;
    r.operator_name = std::move(operator_name);
    r.point = p;
    r.h.assign(steps.begin(), steps.end());
    for (const double h : steps) r.residuals.push_back(residual(h));

    bool all_zero = true;
    for (const double v : r.residuals) all_zero = all_zero && v == 0.0;
    if (all_zero) {
        r.ratios.assign(steps.size() - 1, std::numeric_limits<double>::quiet_NaN());
        r.order = std::numeric_limits<double>::infinity();
        r.verdict = ResidualVerdict::converges_to_zero;
        return r;
    }
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) r.ratios.push_back(r.residuals[i] / r.residuals[i + 1]);

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        lx.push_back(std::log(steps[i]));
        ly.push_back(std::log(r.residuals[i]));
    }
    r.order = slope(lx, ly);

    bool quadratic = true;
    for (const double q : r.ratios) quadratic = quadratic && q >= 3.5 && q <= 4.5;
    const double last = r.ratios.back();
    if (quadratic)
        r.verdict = ResidualVerdict::converges_to_zero;
    else if (last >= 0.8 && last <= 1.25)
        r.verdict = ResidualVerdict::plateau;
    else
        r.verdict = ResidualVerdict::inconclusive;
    return r;
}

TestFunction gaussian_bump(double center, double width) {
    if (!(width > 0.0)) throw DomainError("bump width must be positive");
    return {[center, width](double b) {
                const double z = (b - center) / width;
                return std::exp(-0.5 * z * z);
            },
            center, width};
}

std::vector<double> delta_limit_error(const Boundary& bd, double a, double tau, double s, const TestFunction& g,
                                      std::span<const double> eps, const QuadratureSpec& spec, DeltaKernel kernel) {
    require(a > 0.0, "delta test needs a > 0");
    require(kernel == DeltaKernel::kernel_H || tau < s, "delta test with G needs tau < s");
    std::vector<double> errors;
    errors.reserve(eps.size());
    for (const double e : eps) {
        require(e > 0.0 && e <= tau, "delta test needs 0 < eps <= tau");
        const KernelSlice slice(bd, tau - e, a, tau, s);
        const Integrand integrand = [&](double b) {
            const double k = kernel == DeltaKernel::green_G ? slice.G(b) : slice.H(b);
            return k == 0.0 ? 0.0 : k * g.f(b);
        };
        const double peak = a + slice.drift_integral() - slice.df_tau() * e;
        const GaussianFeature features[] = {{peak, std::sqrt(e)}, {g.center, g.width}};
        const QuadResult q = integrate_semi_infinite(integrand, features, spec);
        errors.push_back(std::abs(q.value - g.f(a)));
    }
    return errors;
}

double chain_reconstruction_check(const EvalPoint& p, const Boundary& bd, double c) {
    require(p.t >= 0.0 && p.t < p.tau && p.tau < p.s, "chain check needs 0 <= t < tau < s");
    require(p.a > 0.0 && p.b > 0.0, "chain check needs a > 0 and b > 0");
    require(c > 0.0, "gauge constant must be positive");
    const auto ints = bd.integrals().over(p.t, p.tau);

    // Absorbed heat kernel in y = a, z = b - ∫f'.
    const double heat = heat_image_kernel(p.t, p.a, p.tau, p.b - ints.fp);
    const double girsanov = std::exp(0.5 * ints.fp2 - bd.df(p.tau) * p.b + bd.df(p.t) * p.a);

    const double back_rem = p.s - p.t, fwd_rem = p.s - p.tau;
    const double backward = c * std::pow(back_rem, 1.5) * std::exp(p.a * p.a / (2.0 * back_rem)) / p.a;
    const double forward = p.b / fwd_rem * c * std::pow(fwd_rem, -0.5) * std::exp(-p.b * p.b / (2.0 * fwd_rem));

    const double chain = heat * girsanov * (backward * forward) / (c * c);
    const double direct = green_G(p, bd);
    if (direct == 0.0) return chain == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(chain - direct) / std::abs(direct);
}

NegativityReport negative_mass(const Boundary& bd, double t, double a, double tau, const QuadratureSpec& spec) {
    const KernelSlice slice(bd, t, a, tau);
    const Integrand abs_h = [&](double b) { return std::abs(slice.H(b)); };
    NegativityReport r;
    const double cut = slice.drift_integral();
    if (cut > 0.0) r.negative_mass = integrate_interval(abs_h, 0.0, cut, spec).value;
    const double dt = slice.elapsed();
    const GaussianFeature features[] = {{a + cut - slice.df_tau() * dt, std::sqrt(dt)},
                                        {std::max(cut, 0.0), std::sqrt(dt)}};
    r.absolute_mass = integrate_semi_infinite(abs_h, features, spec).value;
    return r;
}

std::string to_string(PairVerdict v) {
    switch (v) {
        case PairVerdict::agree: return "agree";
        case PairVerdict::disagree: return "disagree";
        case PairVerdict::not_applicable: return "n/a";
    }
    return "unknown";
}

double z_score(double x, double se_x, double y, double se_y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return std::numeric_limits<double>::quiet_NaN();
    const double se = std::hypot(se_x, se_y);
    if (se > 0.0) return (x - y) / se;
    const double scale = std::max(std::abs(x), std::abs(y));
    if (std::abs(x - y) <= 1e-12 * scale) return 0.0;
    return x > y ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

PairVerdict pair_verdict(double z) {
    if (std::isnan(z)) return PairVerdict::not_applicable;
    return std::abs(z) <= 3.0 ? PairVerdict::agree : PairVerdict::disagree;
}

CrossRouteReport cross_route_report(const Boundary& bd, std::span<const double> s_grid, const QuadratureSpec& spec,
                                    const McParams& mc, VPolicy policy) {
    CrossRouteReport report;
    report.boundary = bd.expr().to_string();
    const DensityCurve limit = fpt_density(s_grid, bd, spec, VPolicy::epsilon_limit);
    const DensityCurve closed = policy == VPolicy::epsilon_limit ? limit : fpt_density(s_grid, bd, spec, policy);
    const DensityCurve girsanov = girsanov_density_curve(bd, s_grid, mc);
    const DirectHittingResult direct = direct_hitting_density(bd, s_grid, mc);
    report.direct_hit_fraction = direct.hit_fraction;
    report.direct_hit_se = direct.hit_std_error;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        CrossRouteRow row;
        row.s = s_grid[i];
        row.closed_status = closed.status[i];
        row.closed = is_usable(row.closed_status) ? closed.value[i] : nan;
        row.closed_error = closed.std_error[i];
        row.v = closed.v[i];
        row.limit_verdict = limit.diagnostics[i] ? to_string(limit.diagnostics[i]->verdict) : to_string(limit.status[i]);
        row.girsanov = girsanov.value[i];
        row.girsanov_se = girsanov.std_error[i];
        row.direct = direct.density.value[i];
        row.direct_se = direct.density.std_error[i];
        row.z_closed_girsanov = z_score(row.closed, row.closed_error, row.girsanov, row.girsanov_se);
        row.z_closed_direct = z_score(row.closed, row.closed_error, row.direct, row.direct_se);
        row.z_girsanov_direct = z_score(row.girsanov, row.girsanov_se, row.direct, row.direct_se);
        row.closed_girsanov = pair_verdict(row.z_closed_girsanov);
        row.closed_direct = pair_verdict(row.z_closed_direct);
        row.girsanov_direct = pair_verdict(row.z_girsanov_direct);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace fpt
