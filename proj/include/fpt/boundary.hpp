#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fpt {

/// Immutable expression tree over the differentiable grammar
/// {constant, t, + - * /, ^constant, unary -, exp, cosh, sinh}.
///
/// Copies share the underlying nodes; evaluation is thread-safe.
class BoundaryExpr {
public:
    enum class Op { constant, variable, add, sub, mul, div, pow, neg, exp, cosh, sinh };

    struct Node;

    static BoundaryExpr constant(double c);
    static BoundaryExpr variable();

    BoundaryExpr operator+(const BoundaryExpr& rhs) const;
    BoundaryExpr operator-(const BoundaryExpr& rhs) const;
    BoundaryExpr operator*(const BoundaryExpr& rhs) const;
    BoundaryExpr operator/(const BoundaryExpr& rhs) const;
    BoundaryExpr operator-() const;
    BoundaryExpr pow(double exponent) const;
    static BoundaryExpr apply(Op fn, const BoundaryExpr& arg);

    double eval(double t) const;

    Op op() const;
    /// Number of nodes in the tree.
    std::size_t size() const;
    /// True when the tree contains no `t`.
    bool is_constant() const;
    /// Value of a constant leaf; meaningless for other nodes.
    double constant_value() const;

    /// Canonical fully parenthesized form; re-parses to the same function.
    std::string to_string() const;

private:
    explicit BoundaryExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;

    friend BoundaryExpr differentiate(const BoundaryExpr& e);
};

/// Parse an expression in `t`. Precedence, tightest first: `^`, unary minus,
/// `* /`, `+ -`; binary operators are left-associative.
/// Throws ParseError.
BoundaryExpr parse_boundary(std::string_view text);

/// Symbolic derivative with respect to t.
BoundaryExpr differentiate(const BoundaryExpr& e);

class BoundaryIntegrals;

/// Absolute slack allowed on f'' >= 0 during grid certification.
inline constexpr double kConvexityTolerance = 1e-12;

/// A validated moving boundary f together with f', f''.
class Boundary {
public:
    const BoundaryExpr& expr() const { return f_; }
    const BoundaryExpr& d1() const { return d1_; }
    const BoundaryExpr& d2() const { return d2_; }

    double f(double t) const { return f_.eval(t); }
    double df(double t) const { return d1_.eval(t); }
    double d2f(double t) const { return d2_.eval(t); }

    /// a = f(0) > 0.
    double initial_level() const { return initial_level_; }

    /// Grid on which convexity was certified.
    std::span<const double> convexity_grid() const { return grid_; }
    double min_second_derivative() const { return min_d2_; }
    /// f'' vanished (within kConvexityTolerance) at every certification point.
    bool second_derivative_vanishes() const { return d2_vanishes_; }
    /// f'' is symbolically the constant 0.
    bool is_linear() const { return d2_.is_constant() && d2_.eval(0.0) == 0.0; }

    /// Memoized ∫f' and ∫(f')² over time intervals.
    const BoundaryIntegrals& integrals() const { return *integrals_; }

private:
    Boundary() = default;

    BoundaryExpr f_ = BoundaryExpr::constant(0.0);
    BoundaryExpr d1_ = BoundaryExpr::constant(0.0);
    BoundaryExpr d2_ = BoundaryExpr::constant(0.0);
    double initial_level_ = 0.0;
    std::vector<double> grid_;
    double min_d2_ = 0.0;
    bool d2_vanishes_ = false;
    std::shared_ptr<const BoundaryIntegrals> integrals_;

    friend Boundary build_boundary(const BoundaryExpr& e, std::span<const double> grid);
};

/// `count` uniform points on [0, t_max] (1024 by default).
std::vector<double> default_convexity_grid(double t_max, std::size_t count = 1024);

/// Differentiate twice, check f(0) > 0 and f'' >= -kConvexityTolerance on
/// `grid`. Throws BoundaryValidationError naming the offending t.
/// f'' dipping negative between grid points is not detected.
Boundary build_boundary(const BoundaryExpr& e, std::span<const double> grid);

/// Convenience: parse then build on default_convexity_grid(t_max).
Boundary make_boundary(std::string_view text, double t_max = 10.0);

/// Killing rate k(u, x) = f''(u)·x of the Bessel-bridge Feynman–Kac problem.
inline double potential(const Boundary& bd, double u, double x) { return bd.d2f(u) * x; }

}  // namespace fpt
