#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpt/boundary.hpp"

namespace fpt {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    std::size_t max_panels = std::size_t{1} << 20;
    /// Semi-infinite integrals are truncated at max(center + k·width) over the
    /// integrand's Gaussian features.
    double truncation_sigmas = 12.0;
    /// τ↑s limit schedule: ε_i = eps0 · min(1, s - t) · eps_ratio^i.
    double eps0 = 1e-2;
    double eps_ratio = 0.5;
    int eps_terms = 10;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
    std::vector<double> eps_schedule(double span) const;
};

/// Location and scale of a Gaussian-like factor of an integrand.
struct GaussianFeature {
    double center = 0.0;
    double width = 1.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t panels = 0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 15-point Gauss–Legendre on [lo, hi]. A panel's error
/// estimate is |Q(panel) - Q(left) - Q(right)|; the worst panel is bisected
/// until the summed estimate is <= abs_tol. `breakpoints` seed the panels.
/// Throws QuadratureError on a non-finite sample or when max_panels is hit.
QuadResult integrate_interval(const Integrand& g, double lo, double hi, const QuadratureSpec& spec,
                              std::span<const double> breakpoints = {});

/// ∫_0^∞ g over (0, B], B = max(center + truncation_sigmas·width). Panels are
/// seeded one width apart around every feature.
QuadResult integrate_semi_infinite(const Integrand& g, std::span<const GaussianFeature> features,
                                   const QuadratureSpec& spec);

enum class LimitVerdict { converged, diverging, oscillating };
std::string to_string(LimitVerdict v);

/// The table V(ε) = ∫_0^∞ G(t,a;s-ε,b) db and its small-ε model fit
/// V(ε) ≈ v + c1·√ε + c2·ε.
struct LimitDiagnostics {
    std::vector<double> eps;
    std::vector<double> values;
    std::array<double, 3> coefficients{};  ///< v, c1, c2
    double fit_rms = 0.0;
    LimitVerdict verdict = LimitVerdict::oscillating;
    /// coefficients[0] when converged, NaN otherwise.
    double extrapolated = 0.0;
};

struct VResult {
    double value = 0.0;  ///< NaN unless the limit converged
    LimitDiagnostics diagnostics;

    bool converged() const { return diagnostics.verdict == LimitVerdict::converged; }
};

/// v(t, a) = lim_{ε↓0} ∫_0^∞ G(t,a;s-ε,b) db. A divergent or oscillating
/// limit is reported through the diagnostics, not thrown.
VResult v_of(double t, double a, double s, const Boundary& bd, const QuadratureSpec& spec);

/// How fpt_density obtains v(0, a).
enum class VPolicy {
    /// Always the ε-limit of the Green's-function integral.
    epsilon_limit,
    /// v = 1 exactly when f'' is symbolically zero (the killing rate vanishes),
    /// otherwise the ε-limit.
    exact_when_linear,
};

enum class PointStatus {
    converged,     ///< ε-limit converged
    diverging,     ///< ε-limit diverged; value is NaN
    oscillating,   ///< ε-limit oscillated; value is NaN
    exact_linear,  ///< v = 1 because f'' ≡ 0
    negligible,    ///< φ_a(s) underflows; value is 0
    failed,        ///< quadrature failure; value is NaN
    sampled,       ///< Monte Carlo estimate
};
std::string to_string(PointStatus s);
bool is_usable(PointStatus s);

/// Per-horizon densities with uncertainties. For a converged ε-limit the
/// uncertainty is the gap between the smallest-ε value and the extrapolation;
/// exact points carry zero.
struct DensityCurve {
    std::vector<double> s;
    std::vector<double> value;
    std::vector<double> std_error;
    std::vector<PointStatus> status;
    /// Closed-form route only: v(0, a) and its limit table (empty when not computed).
    std::vector<double> v;
    std::vector<std::optional<LimitDiagnostics>> diagnostics;
    std::vector<std::string> message;

    std::size_t size() const { return s.size(); }
    bool all_usable() const;
};

/// Closed-form first-passage density φ_T(s) = v(0,a)·φ_a(s)·exp{-½∫_0^s(f')² - f'(0)a}.
/// Grid points are independent; a failing point never aborts the curve.
DensityCurve fpt_density(std::span<const double> s_grid, const Boundary& bd, const QuadratureSpec& spec,
                         VPolicy policy = VPolicy::epsilon_limit);

struct CdfResult {
    double value = 0.0;  ///< NaN when a density point was unusable
    double error = 0.0;
    bool ok = true;
    std::string message;
};

/// P(T < t_max) by adaptive Gauss–Legendre over the closed-form density.
CdfResult fpt_cdf(double t_max, const Boundary& bd, const QuadratureSpec& spec,
                  VPolicy policy = VPolicy::epsilon_limit);

}  // namespace fpt
