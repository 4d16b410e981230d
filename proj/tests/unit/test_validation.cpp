#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/kernels.hpp"
#include "fpt/validation.hpp"

using namespace fpt;

namespace {

const std::vector<std::string> kCorpus = {"1", "1+t", "2+0.25*t^2", "1+t^2/2", "cosh(t)"};
const EvalPoint kBackward{0.3, 1.0, 0.8, 1.2, 1.0};
const EvalPoint kCauchy{0.2, 1.0, 0.6, 0.9, 1.0};

ResidualReport backward(const KernelTerm& term, const EvalPoint& p, const Boundary& bd) {
    const auto steps = default_residual_steps();
    return residual_report(
        "backward", p, [&](double h) { return residual_backward_schrodinger(term, p, bd, h, h); }, steps);
}

ResidualReport forward(const KernelTerm& term, const EvalPoint& p, const Boundary& bd) {
    const auto steps = default_residual_steps();
    return residual_report(
        "forward", p, [&](double h) { return residual_forward_schrodinger(term, p, bd, h, h); }, steps);
}

}  // namespace

TEST_CASE("direct term solves the backward equation") {
    const Boundary bd = make_boundary("1+t^2/2");
    const ResidualReport r = backward(schrodinger_direct_term, kBackward, bd);
    CHECK(r.converges());
    CHECK(r.order == doctest::Approx(2.0).epsilon(0.25));
    for (const double q : r.ratios) CHECK((q >= 3.5 && q <= 4.5));
}

TEST_CASE("full H solves the backward equation only without drift") {
    const ResidualReport flat = backward(kernel_H, kBackward, make_boundary("1"));
    CHECK(flat.converges());

    const ResidualReport lin = backward(kernel_H, kBackward, make_boundary("1+t"));
    CHECK(lin.verdict == ResidualVerdict::plateau);
    CHECK(lin.residuals.back() == doctest::Approx(0.22414943461328185).epsilon(1e-4));
}

TEST_CASE("forward equation") {
    const Boundary bd = make_boundary("1+t^2/2");
    CHECK(forward(schrodinger_direct_term, kBackward, bd).converges());
    CHECK(forward(forward_solution_term, kBackward, make_boundary("1+t")).converges());
    CHECK(forward(forward_solution_term, kBackward, bd).converges());
    CHECK(forward(kernel_H, kBackward, make_boundary("1")).converges());
}

TEST_CASE("bessel cauchy residual") {
    const auto steps = default_residual_steps();
    const Boundary one = make_boundary("1");
    const ResidualReport r = residual_report(
        "cauchy", kCauchy, [&](double h) { return residual_bessel_cauchy(kCauchy, one, h, h); }, steps);
    CHECK(r.converges());

    const KernelTerm scaled = [](const EvalPoint& p, const Boundary& b) { return 3.5 * green_G(p, b); };
    const Boundary bd = make_boundary("1+t^2/2");
    CHECK(residual_bessel_cauchy(kCauchy, bd, 1e-2, 1e-2, scaled) ==
          doctest::Approx(3.5 * residual_bessel_cauchy(kCauchy, bd, 1e-2, 1e-2)).epsilon(1e-9));

    const Boundary lin = make_boundary("1+t");
    const ResidualReport plateau = residual_report(
        "cauchy", kCauchy, [&](double h) { return residual_bessel_cauchy(kCauchy, lin, h, h); }, steps);
    CHECK(plateau.verdict == ResidualVerdict::plateau);
}

TEST_CASE("residual stencil must stay admissible") {
    const Boundary one = make_boundary("1");
    CHECK_THROWS_AS(residual_backward_schrodinger(kernel_H, {0.0, 1.0, 0.5, 1.0, 1.0}, one, 1e-2, 1e-2), DomainError);
    CHECK_THROWS_AS(residual_forward_schrodinger(kernel_H, {0.0, 1.0, 0.5, 0.001, 1.0}, one, 1e-2, 1e-2), DomainError);
    const std::vector<double> two = {1e-2, 5e-3};
    CHECK_THROWS_AS(residual_report("x", kCauchy, [](double) { return 1.0; }, two), ConfigError);
}

TEST_CASE("residual verdicts") {
    const std::vector<double> steps = {1e-2, 5e-3, 2.5e-3};
    CHECK(residual_report("q", kCauchy, [](double h) { return h * h; }, steps).verdict ==
          ResidualVerdict::converges_to_zero);
    CHECK(residual_report("p", kCauchy, [](double h) { return 1.0 + h * h; }, steps).verdict ==
          ResidualVerdict::plateau);
    CHECK(residual_report("l", kCauchy, [](double h) { return h; }, steps).verdict == ResidualVerdict::inconclusive);
    const ResidualReport zero = residual_report("z", kCauchy, [](double) { return 0.0; }, steps);
    CHECK(zero.converges());
}

TEST_CASE("delta property") {
    const QuadratureSpec spec;
    const std::vector<double> eps = {1e-2, 1e-3, 1e-4};
    const Boundary one = make_boundary("1");
    const auto e1 = delta_limit_error(one, 1.0, 0.5, 1.0, gaussian_bump(1.0, 0.3), eps, spec);
    CHECK(e1[0] > e1[1]);
    CHECK(e1[1] > e1[2]);

    const TestFunction flat{[](double) { return 1.0; }, 1.0, 1.0};
    const std::vector<double> small = {1e-4};
    const auto mass = delta_limit_error(one, 1.0, 0.5, 1.0, flat, small, spec, DeltaKernel::kernel_H);
    CHECK(mass[0] <= 1e-8);

    const auto e2 = delta_limit_error(make_boundary("1+t^2/2"), 1.0, 0.5, 1.0, gaussian_bump(1.0, 0.3), eps, spec);
    CHECK(e2[0] > e2[1]);
    CHECK(e2[1] > e2[2]);
}

TEST_CASE("chain reconstruction") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Boundary bd = make_boundary("1+t^2/2");
    const Boundary flat = make_boundary("1");
    for (int i = 0; i < 20; ++i) {
        const double t = 0.5 * u(rng), tau = t + 0.05 + 0.4 * u(rng);
        const EvalPoint p{t, 0.3 + 1.5 * u(rng), tau, 0.3 + 1.5 * u(rng), 1.0};
        CHECK(chain_reconstruction_check(p, bd) <= 1e-12);
        CHECK(chain_reconstruction_check(p, flat) <= 1e-14);
        CHECK(chain_reconstruction_check(p, bd, 7.0) <= 1e-12);
        CHECK(chain_reconstruction_check(p, bd, 1e-3) <= 1e-12);
    }
}

TEST_CASE("negative mass follows the sign law") {
    const QuadratureSpec spec;
    const NegativityReport flat = negative_mass(make_boundary("1"), 0.0, 1.0, 0.5, spec);
    CHECK(flat.negative_mass == 0.0);
    CHECK(flat.absolute_mass > 0.0);
    const NegativityReport lin = negative_mass(make_boundary("1+t"), 0.0, 1.0, 1.0, spec);
    CHECK(lin.negative_mass > 0.0);
    CHECK(lin.negative_mass < lin.absolute_mass);
}

TEST_CASE("z scores and verdicts") {
    CHECK(z_score(1.0, 0.0, 1.0, 0.0) == 0.0);
    CHECK(std::isinf(z_score(1.0, 0.0, 2.0, 0.0)));
    CHECK(z_score(1.0, 0.3, 1.0 + 0.5, 0.4) == doctest::Approx(-1.0));
    CHECK(std::isnan(z_score(std::nan(""), 0.1, 1.0, 0.1)));
    CHECK(pair_verdict(2.9) == PairVerdict::agree);
    CHECK(pair_verdict(-3.1) == PairVerdict::disagree);
    CHECK(pair_verdict(std::nan("")) == PairVerdict::not_applicable);
}

TEST_CASE("cross route report") {
    McParams mc;
    mc.n_paths = 20000;
    mc.steps = 256;
    mc.seed = 17;
    const std::vector<double> grid = {0.5, 1.0};
    const CrossRouteReport one = cross_route_report(make_boundary("1"), grid, QuadratureSpec{}, mc);
    REQUIRE(one.rows.size() == 2);
    for (const auto& r : one.rows) {
        CHECK(r.closed_status == PointStatus::converged);
        CHECK(r.limit_verdict == "converged");
        CHECK(r.girsanov == level_density(1.0, r.s));
        CHECK(r.closed_girsanov == PairVerdict::agree);
        CHECK(r.girsanov_direct == PairVerdict::agree);
    }
    const CrossRouteReport lin =
        cross_route_report(make_boundary("1+t"), grid, QuadratureSpec{}, mc, VPolicy::exact_when_linear);
    for (const auto& r : lin.rows) {
        CHECK(r.closed_status == PointStatus::exact_linear);
        CHECK(r.limit_verdict == "diverging");
        CHECK(r.closed_girsanov == PairVerdict::agree);
    }
}
