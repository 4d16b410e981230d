#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "fpt/boundary.hpp"

namespace fpt {

/// Backward point (t, a), forward point (tau, b) and horizon s.
struct EvalPoint {
    double t = 0.0;
    double a = 1.0;
    double tau = 1.0;
    double b = 1.0;
    double s = 1.0;
};

/// ∫_t^τ f'(u) du and ∫_t^τ f'(u)² du by adaptive Simpson, memoized per (t, τ).
///
/// The cache is shared between threads behind a reader/writer lock.
class BoundaryIntegrals {
public:
    struct Values {
        double fp = 0.0;   ///< ∫ f'
        double fp2 = 0.0;  ///< ∫ (f')²
    };

    explicit BoundaryIntegrals(BoundaryExpr derivative, double abs_tol = 1e-12);

    Values over(double t, double tau) const;
    double int_fp(double t, double tau) const { return over(t, tau).fp; }
    double int_fp2(double t, double tau) const { return over(t, tau).fp2; }

    double tolerance() const { return abs_tol_; }

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept;
    };

    Values compute(double t, double tau) const;

    BoundaryExpr derivative_;
    double abs_tol_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, Values, KeyHash> cache_;
};

/// A real number stored as sign·exp(log_abs); sign is -1, 0 or +1.
struct SignedLog {
    double log_abs = -std::numeric_limits<double>::infinity();
    int sign = 0;

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

/// Kernels at fixed backward point (t, a), forward time τ and horizon s,
/// as functions of the forward level b. Precomputes the boundary integrals.
class KernelSlice {
public:
    /// Requires 0 <= t < τ and a > 0; s only matters for the G methods.
    KernelSlice(const Boundary& bd, double t, double a, double tau,
                double s = std::numeric_limits<double>::quiet_NaN());

    SignedLog log_H(double b) const;
    /// Requires τ < s.
    SignedLog log_G(double b) const;
    double H(double b) const { return log_H(b).value(); }
    double G(double b) const { return log_G(b).value(); }
    double direct(double b) const;
    double image(double b) const;

    /// ∫_t^τ f'(u) du
    double drift_integral() const { return int_fp_; }
    double elapsed() const { return tau_ - t_; }
    double df_tau() const { return df_tau_; }

private:
    void check_b(double b) const;
    double log_front(double b) const;

    double t_, a_, tau_, s_;
    double int_fp_, int_fp2_;
    double df_t_, df_tau_;
    double log_norm_;     // -½log(2πΔ)
    double log_phi_a_;    // log φ_a(s - t), NaN when s is unset
};

/// First-passage density of standard Brownian motion to the fixed level a:
/// a / sqrt(2π t³) · exp(-a²/(2t)), with the value 0 at t = 0.
double level_density(double a, double t);
/// log of level_density; -inf at t = 0.
double log_level_density(double a, double t);

/// Heat kernel on the half line absorbed at 0 (method of images).
double heat_image_kernel(double t, double y, double tau, double z);

/// Kernel H(t,a;τ,b) of the linear-potential Schrödinger equation: Girsanov
/// gauge exp{½∫(f')² - f'(τ)b + f'(t)a} times the two-image Gaussian bracket
/// centred at a + ∫f' and -a + ∫f'. Its sign is sign(b - ∫_t^τ f').
SignedLog log_kernel_H(const EvalPoint& p, const Boundary& bd);
double kernel_H(const EvalPoint& p, const Boundary& bd);

/// G(t,a;τ,b) = φ_b(s-τ)/φ_a(s-t) · H(t,a;τ,b), requires 0 <= t < τ < s.
SignedLog log_green_G(const EvalPoint& p, const Boundary& bd);
double green_G(const EvalPoint& p, const Boundary& bd);

/// exp{-½∫_0^s (f')² du - f'(0)·a}.
double girsanov_prefactor(const Boundary& bd, double s);

/// Direct (non-image) Gaussian term of H, with the full gauge.
double schrodinger_direct_term(const EvalPoint& p, const Boundary& bd);
/// Image term of H, so that H = direct - image.
double schrodinger_image_term(const EvalPoint& p, const Boundary& bd);

/// Forward solution ψ̃(τ,b) = (2πτ)^{-1/2} exp{-(b-f(τ))²/(2τ) + ½∫_0^τ(f')² - f'(τ)b}
/// of ∂_τψ = ½∂_bbψ - b f''(τ) ψ. Requires τ > 0.
double forward_fundamental_solution(double tau, double b, const Boundary& bd);

}  // namespace fpt
