#include "fpt/boundary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fpt/error.hpp"
#include "fpt/kernels.hpp"

namespace fpt {

struct BoundaryExpr::Node {
    Op op;
    double value = 0.0;  // constant value, or exponent for pow
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    bool has_var = false;
    std::size_t size = 1;
};

namespace {

using NodePtr = std::shared_ptr<const BoundaryExpr::Node>;
using Op = BoundaryExpr::Op;

NodePtr make_node(Op op, double value, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<BoundaryExpr::Node>();
    n->op = op;
    n->value = value;
    n->has_var = op == Op::variable || (lhs && lhs->has_var) || (rhs && rhs->has_var);
    n->size = 1 + (lhs ? lhs->size : 0) + (rhs ? rhs->size : 0);
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

double eval_node(const BoundaryExpr::Node& n, double t) {
    switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable: return t;
        case Op::add: return eval_node(*n.lhs, t) + eval_node(*n.rhs, t);
        case Op::sub: return eval_node(*n.lhs, t) - eval_node(*n.rhs, t);
        case Op::mul: return eval_node(*n.lhs, t) * eval_node(*n.rhs, t);
        case Op::div: return eval_node(*n.lhs, t) / eval_node(*n.rhs, t);
        case Op::pow: return std::pow(eval_node(*n.lhs, t), n.value);
        case Op::neg: return -eval_node(*n.lhs, t);
        case Op::exp: return std::exp(eval_node(*n.lhs, t));
        case Op::cosh: return std::cosh(eval_node(*n.lhs, t));
        case Op::sinh: return std::sinh(eval_node(*n.lhs, t));
    }
    return 0.0;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

std::string format_constant(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    return v < 0 ? "(" + s + ")" : s;
}

void print_node(const BoundaryExpr::Node& n, std::ostringstream& os) {
    auto binary = [&](const char* sym) {
        os << '(';
        print_node(*n.lhs, os);
        os << ' ' << sym << ' ';
        print_node(*n.rhs, os);
        os << ')';
    };
    auto call = [&](const char* name) {
        os << name << '(';
        print_node(*n.lhs, os);
        os << ')';
    };
    switch (n.op) {
        case Op::constant: os << format_constant(n.value); break;
        case Op::variable: os << 't'; break;
        case Op::add: binary("+"); break;
        case Op::sub: binary("-"); break;
        case Op::mul: binary("*"); break;
        case Op::div: binary("/"); break;
        case Op::pow:
            os << '(';
            print_node(*n.lhs, os);
            os << " ^ " << format_constant(n.value) << ')';
            break;
        case Op::neg:
            os << "(-";
            print_node(*n.lhs, os);
            os << ')';
            break;
        case Op::exp: call("exp"); break;
        case Op::cosh: call("cosh"); break;
        case Op::sinh: call("sinh"); break;
    }
}

}  // namespace

BoundaryExpr BoundaryExpr::constant(double c) { return BoundaryExpr(make_node(Op::constant, c)); }

BoundaryExpr BoundaryExpr::variable() { return BoundaryExpr(make_node(Op::variable, 0.0)); }

BoundaryExpr BoundaryExpr::operator+(const BoundaryExpr& rhs) const {
    const auto& l = node_;
    const auto& r = rhs.node_;
    if (!l->has_var && !r->has_var) return constant(eval(0.0) + rhs.eval(0.0));
    if (is_const(l, 0.0)) return rhs;
    if (is_const(r, 0.0)) return *this;
    return BoundaryExpr(make_node(Op::add, 0.0, l, r));
}

BoundaryExpr BoundaryExpr::operator-(const BoundaryExpr& rhs) const {
    const auto& l = node_;
    const auto& r = rhs.node_;
    if (!l->has_var && !r->has_var) return constant(eval(0.0) - rhs.eval(0.0));
    if (is_const(r, 0.0)) return *this;
    if (is_const(l, 0.0)) return -rhs;
    return BoundaryExpr(make_node(Op::sub, 0.0, l, r));
}

BoundaryExpr BoundaryExpr::operator*(const BoundaryExpr& rhs) const {
    const auto& l = node_;
    const auto& r = rhs.node_;
    if (!l->has_var && !r->has_var) return constant(eval(0.0) * rhs.eval(0.0));
    if (is_const(l, 0.0) || is_const(r, 0.0)) return constant(0.0);
    if (is_const(l, 1.0)) return rhs;
    if (is_const(r, 1.0)) return *this;
    return BoundaryExpr(make_node(Op::mul, 0.0, l, r));
}

BoundaryExpr BoundaryExpr::operator/(const BoundaryExpr& rhs) const {
    const auto& l = node_;
    const auto& r = rhs.node_;
    if (!l->has_var && !r->has_var) return constant(eval(0.0) / rhs.eval(0.0));
    if (is_const(r, 1.0)) return *this;
    if (is_const(l, 0.0)) return constant(0.0);
    return BoundaryExpr(make_node(Op::div, 0.0, l, r));
}

BoundaryExpr BoundaryExpr::operator-() const {
    if (!node_->has_var) return constant(-eval(0.0));
    if (node_->op == Op::neg) return BoundaryExpr(node_->lhs);
    return BoundaryExpr(make_node(Op::neg, 0.0, node_));
}

BoundaryExpr BoundaryExpr::pow(double exponent) const {
    if (exponent == 0.0) return constant(1.0);
    if (exponent == 1.0) return *this;
    if (!node_->has_var) return constant(std::pow(eval(0.0), exponent));
    return BoundaryExpr(make_node(Op::pow, exponent, node_));
}

BoundaryExpr BoundaryExpr::apply(Op fn, const BoundaryExpr& arg) {
    if (fn != Op::exp && fn != Op::cosh && fn != Op::sinh) {
        throw DomainError("BoundaryExpr::apply expects exp, cosh or sinh");
    }
    auto folded = make_node(fn, 0.0, arg.node_);
    if (!arg.node_->has_var) return constant(eval_node(*folded, 0.0));
    return BoundaryExpr(std::move(folded));
}

double BoundaryExpr::eval(double t) const { return eval_node(*node_, t); }

BoundaryExpr::Op BoundaryExpr::op() const { return node_->op; }

std::size_t BoundaryExpr::size() const { return node_->size; }

bool BoundaryExpr::is_constant() const { return !node_->has_var; }

double BoundaryExpr::constant_value() const { return node_->value; }

std::string BoundaryExpr::to_string() const {
    std::ostringstream os;
    print_node(*node_, os);
    return os.str();
}

BoundaryExpr differentiate(const BoundaryExpr& e) {
    using E = BoundaryExpr;
    const auto& n = *e.node_;
    if (!n.has_var) return E::constant(0.0);
    auto wrap = [](const NodePtr& p) { return E(p); };
    switch (n.op) {
        case Op::constant: return E::constant(0.0);
        case Op::variable: return E::constant(1.0);
        case Op::add: return differentiate(wrap(n.lhs)) + differentiate(wrap(n.rhs));
        case Op::sub: return differentiate(wrap(n.lhs)) - differentiate(wrap(n.rhs));
        case Op::mul: {
            const E u = wrap(n.lhs), v = wrap(n.rhs);
            return differentiate(u) * v + u * differentiate(v);
        }
        case Op::div: {
            const E u = wrap(n.lhs), v = wrap(n.rhs);
            return (differentiate(u) * v - u * differentiate(v)) / v.pow(2.0);
        }
        case Op::pow: {
            const E u = wrap(n.lhs);
            return E::constant(n.value) * u.pow(n.value - 1.0) * differentiate(u);
        }
        case Op::neg: return -differentiate(wrap(n.lhs));
        case Op::exp: return e * differentiate(wrap(n.lhs));
        case Op::cosh: {
            const E u = wrap(n.lhs);
            return E::apply(Op::sinh, u) * differentiate(u);
        }
        case Op::sinh: {
            const E u = wrap(n.lhs);
            return E::apply(Op::cosh, u) * differentiate(u);
        }
    }
    return E::constant(0.0);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind;
    std::size_t pos;
    double number = 0.0;
    std::string_view text;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
            while (i < src.size() && is_digit(src[i])) ++i;
            if (i < src.size() && src[i] == '.') {
                ++i;
                while (i < src.size() && is_digit(src[i])) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < src.size() && is_digit(src[j])) {
                    while (j < src.size() && is_digit(src[j])) ++j;
                    i = j;
                }
            }
            Token tok{Tok::number, start, 0.0, {}};
            const auto res = std::from_chars(src.data() + start, src.data() + i, tok.number);
            if (res.ec != std::errc() || res.ptr != src.data() + i) {
                throw ParseError(ParseError::Kind::lexical, start, "malformed number");
            }
            out.push_back(tok);
            continue;
        }
        if (is_alpha(c)) {
            while (i < src.size() && (is_alpha(src[i]) || is_digit(src[i]))) ++i;
            const auto word = src.substr(start, i - start);
            if (word != "t" && word != "exp" && word != "cosh" && word != "sinh") {
                throw ParseError(ParseError::Kind::lexical, start,
                                 "unknown identifier '" + std::string(word) + "'");
            }
            out.push_back(Token{Tok::ident, start, 0.0, word});
            continue;
        }
        Tok kind;
        switch (c) {
            case '+': kind = Tok::plus; break;
            case '-': kind = Tok::minus; break;
            case '*': kind = Tok::star; break;
            case '/': kind = Tok::slash; break;
            case '^': kind = Tok::caret; break;
            case '(': kind = Tok::lparen; break;
            case ')': kind = Tok::rparen; break;
            default:
                throw ParseError(ParseError::Kind::lexical, start,
                                 std::string("unexpected character '") + c + "'");
        }
        out.push_back(Token{kind, start, 0.0, {}});
        ++i;
    }
    out.push_back(Token{Tok::end, src.size(), 0.0, {}});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    BoundaryExpr parse() {
        if (peek().kind == Tok::end) {
            throw ParseError(ParseError::Kind::syntax, peek().pos, "empty expression");
        }
        BoundaryExpr e = expr();
        if (peek().kind == Tok::rparen) {
            throw ParseError(ParseError::Kind::syntax, peek().pos, "unmatched ')'");
        }
        if (peek().kind != Tok::end) {
            throw ParseError(ParseError::Kind::syntax, peek().pos, "unexpected token");
        }
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    BoundaryExpr expr() {
        BoundaryExpr lhs = term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const bool add = next().kind == Tok::plus;
            BoundaryExpr rhs = term();
            lhs = add ? lhs + rhs : lhs - rhs;
        }
        return lhs;
    }

    BoundaryExpr term() {
        BoundaryExpr lhs = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            const bool mul = next().kind == Tok::star;
            BoundaryExpr rhs = unary();
            lhs = mul ? lhs * rhs : lhs / rhs;
        }
        return lhs;
    }

    BoundaryExpr unary() {
        if (peek().kind == Tok::minus) {
            next();
            return -unary();
        }
        return power();
    }

    BoundaryExpr power() {
        BoundaryExpr base = primary();
        while (peek().kind == Tok::caret) {
            next();
            const std::size_t at = peek().pos;
            BoundaryExpr exponent = primary();
            if (!exponent.is_constant()) {
                throw ParseError(ParseError::Kind::non_constant_exponent, at,
                                 "exponent of '^' must be constant");
            }
            base = base.pow(exponent.eval(0.0));
        }
        return base;
    }

    BoundaryExpr primary() {
        const Token& tok = peek();
        switch (tok.kind) {
            case Tok::number:
                next();
                return BoundaryExpr::constant(tok.number);
            case Tok::ident: {
                next();
                if (tok.text == "t") return BoundaryExpr::variable();
                const Op fn = tok.text == "exp" ? Op::exp : tok.text == "cosh" ? Op::cosh : Op::sinh;
                if (peek().kind != Tok::lparen) {
                    throw ParseError(ParseError::Kind::syntax, peek().pos,
                                     "expected '(' after " + std::string(tok.text));
                }
                return BoundaryExpr::apply(fn, parenthesized());
            }
            case Tok::lparen: return parenthesized();
            case Tok::end:
                throw ParseError(ParseError::Kind::syntax, tok.pos, "unexpected end of expression");
            default: throw ParseError(ParseError::Kind::syntax, tok.pos, "expected operand");
        }
    }

    BoundaryExpr parenthesized() {
        const std::size_t open = next().pos;
        BoundaryExpr inner = expr();
        if (peek().kind != Tok::rparen) {
            throw ParseError(ParseError::Kind::syntax, peek().pos,
                             "expected ')' to close '(' at offset " + std::to_string(open));
        }
        next();
        return inner;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

BoundaryExpr parse_boundary(std::string_view text) { return Parser(tokenize(text)).parse(); }

// ---------------------------------------------------------------------------

std::vector<double> default_convexity_grid(double t_max, std::size_t count) {
    if (!(t_max > 0.0) || count < 2) throw DomainError("convexity grid needs t_max > 0 and count >= 2");
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = t_max * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return grid;
}

Boundary build_boundary(const BoundaryExpr& e, std::span<const double> grid) {
    if (grid.empty()) throw DomainError("convexity grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0 || (i > 0 && grid[i] <= grid[i - 1])) {
            throw DomainError("convexity grid must be finite, nonnegative and strictly increasing");
        }
    }

    Boundary bd;
    bd.f_ = e;
    bd.d1_ = differentiate(e);
    bd.d2_ = differentiate(bd.d1_);

    const double a = e.eval(0.0);
    if (!std::isfinite(a) || a <= 0.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "initial level f(0) = %.17g must be positive", a);
        throw BoundaryValidationError(buf);
    }
    bd.initial_level_ = a;

    std::size_t violations = 0;
    double first_t = 0.0, first_d2 = 0.0;
    double min_d2 = std::numeric_limits<double>::infinity();
    bool vanishes = true;
    for (const double t : grid) {
        const double f = bd.f_.eval(t), d1 = bd.d1_.eval(t), d2 = bd.d2_.eval(t);
        if (!std::isfinite(f) || !std::isfinite(d1) || !std::isfinite(d2)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "boundary or its derivatives are not finite at t = %.17g", t);
            throw BoundaryValidationError(buf);
        }
        min_d2 = std::min(min_d2, d2);
        if (std::abs(d2) > kConvexityTolerance) vanishes = false;
        if (d2 < -kConvexityTolerance) {
            if (violations == 0) {
                first_t = t;
                first_d2 = d2;
            }
            ++violations;
        }
    }
    if (violations > 0) {
        char buf[192];
        std::snprintf(buf, sizeof buf,
                      "boundary is not convex: f''(t) = %.17g < 0 at t = %.17g (%zu of %zu grid points violate)",
                      first_d2, first_t, violations, grid.size());
        throw BoundaryValidationError(buf);
    }

    bd.grid_.assign(grid.begin(), grid.end());
    bd.min_d2_ = min_d2;
    bd.d2_vanishes_ = vanishes;
    bd.integrals_ = std::make_shared<const BoundaryIntegrals>(bd.d1_);
    return bd;
}

Boundary make_boundary(std::string_view text, double t_max) {
    const auto grid = default_convexity_grid(t_max);
    return build_boundary(parse_boundary(text), grid);
}

}  // namespace fpt
