#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/kernels.hpp"
#include "fpt/quadrature.hpp"

using namespace fpt;

namespace {

bool rel_close(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::abs(ref); }

const std::vector<std::string> kCorpus = {"1", "1+t", "2+0.25*t^2", "1+t^2/2", "cosh(t)"};

}  // namespace

TEST_CASE("level density") {
    CHECK(rel_close(level_density(1.0, 1.0), 0.24197072451914335, 1e-14));
    CHECK(rel_close(level_density(2.0, 1.0), 0.10798193302637610, 1e-14));
    CHECK(level_density(1.0, 0.0) == 0.0);
    CHECK(std::isinf(log_level_density(1.0, 0.0)));
    CHECK_THROWS_AS(level_density(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(level_density(1.0, -1.0), DomainError);
    for (double a : {0.5, 1.0, 2.0}) {
        for (double t : {0.5, 1.0, 2.0}) {
            CHECK(rel_close(level_density(a, t), level_density(1.0, t / (a * a)) / (a * a), 1e-13));
        }
    }
}

TEST_CASE("heat image kernel") {
    CHECK(rel_close(heat_image_kernel(0.0, 1.0, 1.0, 1.0), 0.34495131388824463, 1e-14));
    CHECK(heat_image_kernel(0.2, 1.3, 0.9, 0.0) == 0.0);
    CHECK(heat_image_kernel(0.0, 1.0, 0.5, 2.0) > 0.0);
    CHECK_THROWS_AS(heat_image_kernel(1.0, 1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("kernel H reference values") {
    const Boundary one = make_boundary("1");
    CHECK(rel_close(kernel_H({0.0, 1.0, 1.0, 1.0, 2.0}, one), 0.34495131388824463, 1e-14));
    CHECK(rel_close(kernel_H({0.0, 1.0, 0.5, 1.0, 1.0}, one), 0.55385609087071026, 1e-14));

    const Boundary quad = make_boundary("1+t^2/2");
    CHECK(rel_close(kernel_H({0.3, 1.0, 0.8, 1.2, 1.5}, quad), 0.30660626002863368, 1e-12));
    CHECK(rel_close(kernel_H({0.0, 1.0, 1.0, 0.25, 2.0}, quad), -0.10901454164052063, 1e-12));
    const Boundary ch = make_boundary("cosh(t)");
    CHECK(rel_close(kernel_H({0.3, 1.0, 0.8, 1.2, 1.5}, ch), 0.27900671481389060, 1e-12));
}

TEST_CASE("kernel H sign law and linear reduction") {
    const Boundary lin = make_boundary("1+t");
    CHECK(kernel_H({0.0, 1.0, 1.0, 0.5, 2.0}, lin) < 0.0);
    CHECK(kernel_H({0.0, 1.0, 1.0, 1.5, 2.0}, lin) > 0.0);
    CHECK(kernel_H({0.0, 1.0, 1.0, 1.0, 2.0}, lin) == 0.0);
    CHECK(rel_close(kernel_H({0.0, 1.0, 1.0, 2.0, 2.0}, lin), 0.20922354798137670, 1e-12));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& text : kCorpus) {
        const Boundary bd = make_boundary(text);
        for (int i = 0; i < 50; ++i) {
            const double t = 2.0 * u(rng), tau = t + 0.05 + u(rng);
            const double a = 0.1 + 2.0 * u(rng), b = 0.05 + 3.0 * u(rng);
            const double drift = bd.integrals().int_fp(t, tau);
            const double h = kernel_H({t, a, tau, b, tau + 1.0}, bd);
            if (std::abs(b - drift) < 1e-9) continue;
            CHECK((h > 0.0) == (b > drift));
        }
    }
}

TEST_CASE("constant boundary collapses to the heat image kernel") {
    const Boundary two = make_boundary("2");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double t = u(rng), tau = t + 0.01 + u(rng), a = 0.1 + 3 * u(rng), b = 0.1 + 3 * u(rng);
        const double ref = heat_image_kernel(t, a, tau, b);
        CHECK(std::abs(kernel_H({t, a, tau, b, 3.0}, two) - ref) <= 1e-15 * std::abs(ref) + 1e-300);
    }
}

TEST_CASE("green G") {
    const Boundary one = make_boundary("1");
    CHECK(rel_close(green_G({0.0, 1.0, 0.5, 1.0, 1.0}, one), 0.95015550442882137, 1e-13));
    const Boundary quad = make_boundary("1+t^2/2");
    CHECK(rel_close(green_G({0.3, 1.0, 0.8, 1.2, 1.5}, quad), 0.44785787097547834, 1e-12));
    CHECK(std::abs(green_G({0.0, 1.0, 0.5, 1e-8, 1.0}, one)) < 1e-12);
    CHECK_THROWS_AS(green_G({0.0, 1.0, 1.0, 1.0, 1.0}, one), DomainError);
    CHECK_THROWS_AS(kernel_H({0.0, 1.0, 1.0, 0.0, 2.0}, one), DomainError);
    CHECK_THROWS_AS(kernel_H({0.0, -1.0, 1.0, 1.0, 2.0}, one), DomainError);

    const Boundary lin = make_boundary("1+t");
    for (double b = 1.0; b < 4.0; b += 0.25) CHECK(green_G({0.0, 1.0, 1.0, b, 2.0}, lin) >= 0.0);
}

TEST_CASE("girsanov prefactor") {
    CHECK(girsanov_prefactor(make_boundary("1"), 3.0) == 1.0);
    CHECK(rel_close(girsanov_prefactor(make_boundary("1+t"), 1.0), 0.22313016014842983, 1e-13));
    CHECK(rel_close(girsanov_prefactor(make_boundary("1+t^2/2"), 2.0), 0.26359713811572677, 1e-12));
    CHECK(rel_close(girsanov_prefactor(make_boundary("cosh(t)"), 1.0), 0.81598643251110998, 1e-12));
}

TEST_CASE("direct and image terms") {
    CHECK(rel_close(schrodinger_direct_term({0.0, 1.0, 1.0, 1.0, 2.0}, make_boundary("1")), 0.3989422804014327, 1e-14));
    CHECK(rel_close(schrodinger_direct_term({0.0, 1.0, 1.0, 2.0, 2.0}, make_boundary("1+t")), 0.24197072451914335,
                    1e-13));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Boundary bd = make_boundary("1+t^2/2");
    for (int i = 0; i < 20; ++i) {
        const EvalPoint p{u(rng), 0.2 + 2 * u(rng), 0.0, 0.2 + 2 * u(rng), 4.0};
        EvalPoint q = p;
        q.tau = p.t + 0.1 + u(rng);
        const double direct = schrodinger_direct_term(q, bd);
        CHECK(std::abs(kernel_H(q, bd) + schrodinger_image_term(q, bd) - direct) <= 1e-14 * std::abs(direct));
    }
}

TEST_CASE("forward fundamental solution") {
    CHECK(rel_close(forward_fundamental_solution(0.5, 1.2, make_boundary("1+t^2/2")), 0.31437881293186861, 1e-12));
}

TEST_CASE("boundary integrals") {
    for (const auto& text : kCorpus) {
        const Boundary bd = make_boundary(text);
        for (double t : {0.0, 0.3, 1.1}) {
            for (double tau : {1.5, 2.0, 4.0}) {
                CHECK(std::abs(bd.integrals().int_fp(t, tau) - (bd.f(tau) - bd.f(t))) <= 1e-10);
                CHECK(bd.integrals().int_fp2(t, tau) >= 0.0);
            }
        }
    }
    const Boundary ch = make_boundary("cosh(t)");
    const double exact = (std::sinh(2.0) - 2.0) / 4.0;
    CHECK(std::abs(ch.integrals().int_fp2(0.0, 1.0) - exact) <= 1e-12);
    CHECK(ch.integrals().int_fp2(1.0, 0.0) == -ch.integrals().int_fp2(0.0, 1.0));
}

TEST_CASE("Chapman-Kolmogorov for the heat image kernel") {
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    for (const auto& [t, r, tau, y, z] : std::vector<std::array<double, 5>>{{0.0, 0.4, 1.0, 1.0, 1.3}, {0.2, 0.3, 0.9, 0.5, 2.0}}) {
        const Integrand g = [&](double w) { return heat_image_kernel(t, y, r, w) * heat_image_kernel(r, w, tau, z); };
        const GaussianFeature features[] = {{y, std::sqrt(r - t)}, {z, std::sqrt(tau - r)}};
        const double lhs = integrate_semi_infinite(g, features, spec).value;
        CHECK(std::abs(lhs - heat_image_kernel(t, y, tau, z)) <= 1e-8);
    }
}

TEST_CASE("log-space evaluation survives extreme exponents") {
    const Boundary one = make_boundary("1");
    const SignedLog h = log_kernel_H({0.0, 40.0, 1e-3, 40.0005, 1.0}, one);
    CHECK(h.sign == 1);
    CHECK(std::isfinite(h.log_abs));
    const SignedLog far = log_kernel_H({0.0, 1.0, 1e-4, 30.0, 1.0}, one);
    CHECK(far.sign == 1);
    CHECK(far.log_abs < -700.0);
}
