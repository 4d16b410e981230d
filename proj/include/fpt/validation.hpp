#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fpt/boundary.hpp"
#include "fpt/kernels.hpp"
#include "fpt/montecarlo.hpp"
#include "fpt/quadrature.hpp"

namespace fpt {

/// A kernel evaluated at a full evaluation point.
using KernelTerm = std::function<double(const EvalPoint&, const Boundary&)>;

/// |(-∂_t - ½∂_aa + a f''(t)) term| at p, central differences with steps k in
/// t and h in a. Requires t - k >= 0, t + k < τ and a - h > 0.
double residual_backward_schrodinger(const KernelTerm& term, const EvalPoint& p, const Boundary& bd, double h,
                                     double k);

/// |(∂_τ - ½∂_bb + b f''(τ)) term| at p in the forward variables.
/// Requires τ - k > t and b - h > 0.
double residual_forward_schrodinger(const KernelTerm& term, const EvalPoint& p, const Boundary& bd, double h,
                                    double k);

/// |(-∂_t + f''(t)a - ½∂_aa - (1/a - a/(s-t))∂_a) term| at p, by default on
/// green_G. Requires t - k >= 0, t + k < τ < s and a - h > 0.
double residual_bessel_cauchy(const EvalPoint& p, const Boundary& bd, double h, double k,
                              const KernelTerm& term = green_G);

/// ψ̃(τ, b) of forward_fundamental_solution as a KernelTerm (ignores t, a).
double forward_solution_term(const EvalPoint& p, const Boundary& bd);

enum class ResidualVerdict { converges_to_zero, plateau, inconclusive };
std::string to_string(ResidualVerdict v);

struct ResidualReport {
    std::string operator_name;
    EvalPoint point;
    std::vector<double> h;  ///< space steps; the time step equals h
    std::vector<double> residuals;
    /// residuals[i] / residuals[i+1].
    std::vector<double> ratios;
    /// Least-squares slope of log residual against log h.
    double order = 0.0;
    ResidualVerdict verdict = ResidualVerdict::inconclusive;

    bool converges() const { return verdict == ResidualVerdict::converges_to_zero; }
};

/// Default step ladder {1e-2, 5e-3, 2.5e-3}.
std::vector<double> default_residual_steps();

/// Evaluates residual(h) on each step (k = h), fits the order and classifies:
/// every halving ratio in [3.5, 4.5] means converges_to_zero, a last ratio in
/// [0.8, 1.25] means plateau. Needs at least 3 steps.
ResidualReport residual_report(std::string operator_name, const EvalPoint& p,
                               const std::function<double(double)>& residual, std::span<const double> steps);

/// Smooth test function with a Gaussian-scale hint for quadrature.
struct TestFunction {
    std::function<double(double)> f;
    double center = 1.0;
    double width = 1.0;
};

/// exp(-(b - center)² / (2 width²)).
TestFunction gaussian_bump(double center, double width);

enum class DeltaKernel { green_G, kernel_H };

/// |∫_0^∞ K(τ-ε, a; τ, b) g(b) db - g(a)| for each ε. The G kernel uses the
/// horizon s > τ. QuadratureError propagates.
std::vector<double> delta_limit_error(const Boundary& bd, double a, double tau, double s, const TestFunction& g,
                                      std::span<const double> eps, const QuadratureSpec& spec,
                                      DeltaKernel kernel = DeltaKernel::green_G);

/// Rebuilds G from the absorbed heat kernel in shifted variables, the Girsanov
/// gauge and the backward/forward gauges A e^{B x²} with free constant c, then
/// returns |G_chain - G| / |G|. Requires 0 <= t < τ < s, a > 0, b > 0.
double chain_reconstruction_check(const EvalPoint& p, const Boundary& bd, double c = 1.0);

struct NegativityReport {
    double negative_mass = 0.0;  ///< ∫ |H| over b where H < 0
    double absolute_mass = 0.0;  ///< ∫ |H| over b > 0
};

/// Mass of H(t,a;τ,·) on the negative region 0 < b < ∫_t^τ f'.
NegativityReport negative_mass(const Boundary& bd, double t, double a, double tau, const QuadratureSpec& spec);

enum class PairVerdict { agree, disagree, not_applicable };
std::string to_string(PairVerdict v);

/// (x - y) / sqrt(se_x² + se_y²); with both errors zero, 0 when x and y agree
/// to 1e-12 relative and ±inf otherwise.
double z_score(double x, double se_x, double y, double se_y);
/// agree when |z| <= 3; not_applicable when z is NaN.
PairVerdict pair_verdict(double z);

struct CrossRouteRow {
    double s = 0.0;
    double closed = 0.0;
    double closed_error = 0.0;
    PointStatus closed_status = PointStatus::failed;
    std::string limit_verdict;  ///< ε-limit verdict, or "not-computed"
    double v = 0.0;
    double girsanov = 0.0;
    double girsanov_se = 0.0;
    double direct = 0.0;
    double direct_se = 0.0;
    double z_closed_girsanov = 0.0;
    double z_closed_direct = 0.0;
    double z_girsanov_direct = 0.0;
    PairVerdict closed_girsanov = PairVerdict::not_applicable;
    PairVerdict closed_direct = PairVerdict::not_applicable;
    PairVerdict girsanov_direct = PairVerdict::not_applicable;
};

struct CrossRouteReport {
    std::string boundary;
    std::vector<CrossRouteRow> rows;
    /// Total hitting probability by the horizon from the direct route.
    double direct_hit_fraction = 0.0;
    double direct_hit_se = 0.0;
};

/// Closed form, Girsanov Monte Carlo and direct Monte Carlo per horizon, with
/// pairwise z-scores. Failures are recorded in the rows. For the limit column
/// the ε-limit diagnostics are always computed; `policy` decides the value.
CrossRouteReport cross_route_report(const Boundary& bd, std::span<const double> s_grid, const QuadratureSpec& spec,
                                    const McParams& mc, VPolicy policy = VPolicy::epsilon_limit);

}  // namespace fpt
