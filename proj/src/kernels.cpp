#include "fpt/kernels.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fpt/error.hpp"

namespace fpt {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2π)
constexpr int kMaxSimpsonDepth = 50;
constexpr std::size_t kMaxCacheEntries = 1 << 18;

struct Pair {
    double fp, fp2;
};

class SimpsonIntegrator {
public:
    explicit SimpsonIntegrator(const BoundaryExpr& d) : d_(d) {}

    Pair operator()(double lo, double hi, double tol) const {
        // A few initial pieces keep symmetric integrands from passing the
        // error test by accident on the first bisection.
        constexpr int kPieces = 4;
        Pair total{0.0, 0.0};
        const double w = (hi - lo) / kPieces;
        for (int i = 0; i < kPieces; ++i) {
            const double a = lo + i * w;
            const double b = i + 1 == kPieces ? hi : lo + (i + 1) * w;
            const Pair fa = sample(a), fb = sample(b), fm = sample(0.5 * (a + b));
            const Pair whole = simpson(a, b, fa, fm, fb);
            const Pair piece = refine(a, b, fa, fm, fb, whole, tol / kPieces, 0);
            total.fp += piece.fp;
            total.fp2 += piece.fp2;
        }
        return total;
    }

private:
    Pair sample(double u) const {
        const double v = d_.eval(u);
        return {v, v * v};
    }

    static Pair simpson(double a, double b, Pair fa, Pair fm, Pair fb) {
        const double h = (b - a) / 6.0;
        return {h * (fa.fp + 4.0 * fm.fp + fb.fp), h * (fa.fp2 + 4.0 * fm.fp2 + fb.fp2)};
    }

    Pair refine(double a, double b, Pair fa, Pair fm, Pair fb, Pair whole, double tol, int depth) const {
        const double m = 0.5 * (a + b);
        const Pair flm = sample(0.5 * (a + m)), frm = sample(0.5 * (m + b));
        const Pair left = simpson(a, m, fa, flm, fm);
        const Pair right = simpson(m, b, fm, frm, fb);
        const double e1 = left.fp + right.fp - whole.fp;
        const double e2 = left.fp2 + right.fp2 - whole.fp2;
        const double scale = std::max(std::abs(whole.fp), std::abs(whole.fp2));
        const double eff_tol = std::max(tol, 8.0 * std::numeric_limits<double>::epsilon() * scale);
        if (depth >= kMaxSimpsonDepth || (std::abs(e1) <= 15.0 * eff_tol && std::abs(e2) <= 15.0 * eff_tol)) {
            return {left.fp + right.fp + e1 / 15.0, left.fp2 + right.fp2 + e2 / 15.0};
        }
        const Pair l = refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
        const Pair r = refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        return {l.fp + r.fp, l.fp2 + r.fp2};
    }

    const BoundaryExpr& d_;
};

// log|e^{x1} - e^{x2}| with d = x1 - x2 supplied exactly.
SignedLog image_bracket(double x1, double x2, double d) {
    if (d > 0.0) return {x1 + std::log(-std::expm1(-d)), 1};
    if (d < 0.0) return {x2 + std::log(-std::expm1(d)), -1};
    return {};
}

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

// ---------------------------------------------------------------------------

BoundaryIntegrals::BoundaryIntegrals(BoundaryExpr derivative, double abs_tol)
    : derivative_(std::move(derivative)), abs_tol_(abs_tol) {}

std::size_t BoundaryIntegrals::KeyHash::operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
    std::uint64_t h = k.first * 0x9E3779B97F4A7C15ull;
    h ^= k.second + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
}

BoundaryIntegrals::Values BoundaryIntegrals::over(double t, double tau) const {
    if (t == tau) return {};
    if (t > tau) {
        const Values v = over(tau, t);
        return {-v.fp, -v.fp2};
    }
    const std::pair key{std::bit_cast<std::uint64_t>(t), std::bit_cast<std::uint64_t>(tau)};
    {
        std::shared_lock lock(mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const Values v = compute(t, tau);
    std::unique_lock lock(mutex_);
    if (cache_.size() >= kMaxCacheEntries) cache_.clear();
    cache_.emplace(key, v);
    return v;
}

BoundaryIntegrals::Values BoundaryIntegrals::compute(double t, double tau) const {
    if (derivative_.is_constant()) {
        const double c = derivative_.eval(0.0);
        return {c * (tau - t), c * c * (tau - t)};
    }
    const Pair r = SimpsonIntegrator(derivative_)(t, tau, abs_tol_);
    return {r.fp, r.fp2};
}

// ---------------------------------------------------------------------------

double log_level_density(double a, double t) {
    require(a > 0.0, "level density requires a > 0");
    require(t >= 0.0, "level density requires t >= 0");
    if (t == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(a) - 0.5 * kLog2Pi - 1.5 * std::log(t) - a * a / (2.0 * t);
}

double level_density(double a, double t) {
    const double l = log_level_density(a, t);
    return std::isinf(l) ? 0.0 : std::exp(l);
}

double heat_image_kernel(double t, double y, double tau, double z) {
    require(tau > t, "heat image kernel requires tau > t");
    const double dt = tau - t;
    const double x1 = -(z - y) * (z - y) / (2.0 * dt);
    const double x2 = -(z + y) * (z + y) / (2.0 * dt);
    SignedLog br = image_bracket(x1, x2, 2.0 * y * z / dt);
    br.log_abs -= 0.5 * (kLog2Pi + std::log(dt));
    return br.value();
}

KernelSlice::KernelSlice(const Boundary& bd, double t, double a, double tau, double s)
    : t_(t), a_(a), tau_(tau), s_(s) {
    require(t >= 0.0 && t < tau, "kernel requires 0 <= t < tau");
    require(a > 0.0, "kernel requires a > 0");
    const auto ints = bd.integrals().over(t, tau);
    int_fp_ = ints.fp;
    int_fp2_ = ints.fp2;
    df_t_ = bd.df(t);
    df_tau_ = bd.df(tau);
    log_norm_ = -0.5 * (kLog2Pi + std::log(tau - t));
    log_phi_a_ = std::isnan(s) ? s : log_level_density(a, s - t);
}

void KernelSlice::check_b(double b) const { require(b > 0.0, "kernel requires b > 0"); }

double KernelSlice::log_front(double b) const {
    return 0.5 * int_fp2_ - df_tau_ * b + df_t_ * a_ + log_norm_;
}

SignedLog KernelSlice::log_H(double b) const {
    check_b(b);
    const double dt = tau_ - t_;
    const double u = b - a_ - int_fp_;
    const double v = b + a_ - int_fp_;
    SignedLog out = image_bracket(-u * u / (2.0 * dt), -v * v / (2.0 * dt), 2.0 * a_ * (b - int_fp_) / dt);
    out.log_abs += log_front(b);
    return out;
}

SignedLog KernelSlice::log_G(double b) const {
    require(tau_ < s_, "Green's function requires tau < s");
    SignedLog h = log_H(b);
    if (h.sign == 0) return h;
    h.log_abs += log_level_density(b, s_ - tau_) - log_phi_a_;
    return h;
}

double KernelSlice::direct(double b) const {
    check_b(b);
    const double u = b - a_ - int_fp_;
    return std::exp(log_front(b) - u * u / (2.0 * (tau_ - t_)));
}

double KernelSlice::image(double b) const {
    check_b(b);
    const double v = b + a_ - int_fp_;
    return std::exp(log_front(b) - v * v / (2.0 * (tau_ - t_)));
}

SignedLog log_kernel_H(const EvalPoint& p, const Boundary& bd) {
    return KernelSlice(bd, p.t, p.a, p.tau).log_H(p.b);
}

double kernel_H(const EvalPoint& p, const Boundary& bd) { return log_kernel_H(p, bd).value(); }

SignedLog log_green_G(const EvalPoint& p, const Boundary& bd) {
    return KernelSlice(bd, p.t, p.a, p.tau, p.s).log_G(p.b);
}

double green_G(const EvalPoint& p, const Boundary& bd) { return log_green_G(p, bd).value(); }

double girsanov_prefactor(const Boundary& bd, double s) {
    require(s > 0.0, "Girsanov prefactor requires s > 0");
    const double j = bd.integrals().int_fp2(0.0, s);
    return std::exp(-0.5 * j - bd.df(0.0) * bd.initial_level());
}

double schrodinger_direct_term(const EvalPoint& p, const Boundary& bd) {
    return KernelSlice(bd, p.t, p.a, p.tau).direct(p.b);
}

double schrodinger_image_term(const EvalPoint& p, const Boundary& bd) {
    return KernelSlice(bd, p.t, p.a, p.tau).image(p.b);
}

double forward_fundamental_solution(double tau, double b, const Boundary& bd) {
    require(tau > 0.0, "forward solution requires tau > 0");
    const double z = b - bd.f(tau);
    const double j = bd.integrals().int_fp2(0.0, tau);
    return std::exp(-z * z / (2.0 * tau) + 0.5 * j - bd.df(tau) * b - 0.5 * (kLog2Pi + std::log(tau)));
}

}  // namespace fpt
