#include "eikonal/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace eikonal::expr {

namespace {

bool is_identifier(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

bool is_reserved(std::string_view s)
{
    static const std::set<std::string_view> reserved = {
        "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "atan", "pi", "e"};
    return reserved.contains(s);
}

bool subtree_variable_free(const NodePtr& n) { return !n || n->variable_free; }

NodePtr make(std::variant<Number, Constant, Variable, Negate, Binary, Call> data,
    std::size_t position, bool variable_free)
{
    auto n = std::make_shared<Node>();
    n->data = std::move(data);
    n->position = position;
    n->variable_free = variable_free;
    return n;
}

[[noreturn]] void domain_fail(const Node& n, const std::string& what)
{
    throw DomainError("domain error at position " + std::to_string(n.position) + ": " + what);
}

double named_value(NamedConstant c)
{
    return c == NamedConstant::Pi ? std::numbers::pi : std::numbers::e;
}

// Exponent usable for exact repeated multiplication, if any.
bool integer_exponent(const Node& rhs, double value, long& out)
{
    if (!rhs.variable_free || !std::isfinite(value) || std::trunc(value) != value
        || std::fabs(value) > 1024.0)
        return false;
    out = static_cast<long>(value);
    return true;
}

template <typename T>
T ipow(T base, unsigned long n, T one)
{
    T result = one;
    while (n > 0) {
        if (n & 1UL)
            result = result * base;
        n >>= 1;
        if (n > 0)
            base = base * base;
    }
    return result;
}

// Scalar and jet evaluation share this structure; Ops supplies the algebra.
struct ScalarOps {
    using T = double;
    std::size_t vars;
    std::span<const double> point;

    T num(double v) const { return v; }
    T var(std::size_t i) const { return point[i]; }
    static double val(const T& t) { return t; }
    static bool finite(const T& t) { return std::isfinite(t); }
    static T neg(const T& a) { return -a; }
    static T add(const T& a, const T& b) { return a + b; }
    static T sub(const T& a, const T& b) { return a - b; }
    static T mul(const T& a, const T& b) { return a * b; }
    static T div(const T& a, const T& b) { return a / b; }
    static T fn(const T& a, double f, double, double) { (void)a; return f; }
    T one() const { return 1.0; }
};

struct JetOps {
    using T = Jet2;
    std::size_t vars;
    std::span<const double> point;

    T num(double v) const { return Jet2::constant(vars, v); }
    T var(std::size_t i) const { return Jet2::variable(vars, i, point[i]); }
    static double val(const T& t) { return t.value(); }
    static bool finite(const T& t) { return t.is_finite(); }
    static T neg(const T& a) { return -a; }
    static T add(const T& a, const T& b) { return a + b; }
    static T sub(const T& a, const T& b) { return a - b; }
    static T mul(const T& a, const T& b) { return a * b; }
    static T div(const T& a, const T& b) { return a / b; }
    static T fn(const T& a, double f, double d1, double d2) { return a.apply(f, d1, d2); }
    T one() const { return Jet2::constant(vars, 1.0); }
};

template <typename Ops>
typename Ops::T eval(const Node& n, const Ops& ops)
{
    using T = typename Ops::T;
    T result = std::visit(
        [&](const auto& d) -> T {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Number>) {
                return ops.num(d.value);
            } else if constexpr (std::is_same_v<D, Constant>) {
                return ops.num(named_value(d.which));
            } else if constexpr (std::is_same_v<D, Variable>) {
                return ops.var(d.index);
            } else if constexpr (std::is_same_v<D, Negate>) {
                return Ops::neg(eval(*d.operand, ops));
            } else if constexpr (std::is_same_v<D, Binary>) {
                T a = eval(*d.lhs, ops);
                T b = eval(*d.rhs, ops);
                switch (d.op) {
                case BinaryOp::Add:
                    return Ops::add(a, b);
                case BinaryOp::Sub:
                    return Ops::sub(a, b);
                case BinaryOp::Mul:
                    return Ops::mul(a, b);
                case BinaryOp::Div:
                    if (Ops::val(b) == 0.0)
                        domain_fail(n, "division by zero");
                    return Ops::div(a, b);
                case BinaryOp::Pow: {
                    long k = 0;
                    if (integer_exponent(*d.rhs, Ops::val(b), k)) {
                        if (k >= 0)
                            return ipow(a, static_cast<unsigned long>(k), ops.one());
                        if (Ops::val(a) == 0.0)
                            domain_fail(n, "zero raised to a negative power");
                        return Ops::div(ops.one(), ipow(a, static_cast<unsigned long>(-k), ops.one()));
                    }
                    if (!(Ops::val(a) > 0.0))
                        domain_fail(n, "non-integer power of a nonpositive base");
                    // a^b = exp(b log a)
                    const double la = std::log(Ops::val(a));
                    T log_a = Ops::fn(a, la, 1.0 / Ops::val(a), -1.0 / (Ops::val(a) * Ops::val(a)));
                    T prod = Ops::mul(b, log_a);
                    const double ev = std::exp(Ops::val(prod));
                    return Ops::fn(prod, ev, ev, ev);
                }
                }
                return a;
            } else {
                T a = eval(*d.arg, ops);
                const double x = Ops::val(a);
                switch (d.fn) {
                case Function::Sin: {
                    const double s = std::sin(x), c = std::cos(x);
                    return Ops::fn(a, s, c, -s);
                }
                case Function::Cos: {
                    const double s = std::sin(x), c = std::cos(x);
                    return Ops::fn(a, c, -s, -c);
                }
                case Function::Tan: {
                    const double t = std::tan(x);
                    const double sec2 = 1.0 + t * t;
                    return Ops::fn(a, t, sec2, 2.0 * t * sec2);
                }
                case Function::Exp: {
                    const double e = std::exp(x);
                    return Ops::fn(a, e, e, e);
                }
                case Function::Log:
                    if (!(x > 0.0))
                        domain_fail(n, "log of nonpositive argument");
                    return Ops::fn(a, std::log(x), 1.0 / x, -1.0 / (x * x));
                case Function::Sqrt: {
                    if (x < 0.0)
                        domain_fail(n, "sqrt of negative argument");
                    const double r = std::sqrt(x);
                    return Ops::fn(a, r, 0.5 / r, -0.25 / (r * x));
                }
                case Function::Sinh: {
                    const double s = std::sinh(x), c = std::cosh(x);
                    return Ops::fn(a, s, c, s);
                }
                case Function::Cosh: {
                    const double s = std::sinh(x), c = std::cosh(x);
                    return Ops::fn(a, c, s, c);
                }
                case Function::Atan: {
                    const double q = 1.0 / (1.0 + x * x);
                    return Ops::fn(a, std::atan(x), q, -2.0 * x * q * q);
                }
                }
                return a;
            }
        },
        n.data);
    if (!Ops::finite(result))
        domain_fail(n, "non-finite result");
    return result;
}

void render_into(const Node& n, const std::vector<std::string>& vars, std::string& out)
{
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Number>) {
                char buf[64];
                auto res = std::to_chars(buf, buf + sizeof buf, d.value);
                if (std::signbit(d.value)) {
                    out += '(';
                    out.append(buf, res.ptr);
                    out += ')';
                } else {
                    out.append(buf, res.ptr);
                }
            } else if constexpr (std::is_same_v<D, Constant>) {
                out += d.which == NamedConstant::Pi ? "pi" : "e";
            } else if constexpr (std::is_same_v<D, Variable>) {
                out += vars[d.index];
            } else if constexpr (std::is_same_v<D, Negate>) {
                const bool literal = std::holds_alternative<Number>(d.operand->data);
                out += literal ? "(-(" : "(-";
                render_into(*d.operand, vars, out);
                out += literal ? "))" : ")";
            } else if constexpr (std::is_same_v<D, Binary>) {
                out += '(';
                render_into(*d.lhs, vars, out);
                out += ' ';
                out += operator_symbol(d.op);
                out += ' ';
                render_into(*d.rhs, vars, out);
                out += ')';
            } else {
                out += function_name(d.fn);
                out += '(';
                render_into(*d.arg, vars, out);
                out += ')';
            }
        },
        n.data);
}

void check_indices(const Node& n, std::size_t arity)
{
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Variable>) {
                if (d.index >= arity)
                    throw std::invalid_argument("variable index out of range");
            } else if constexpr (std::is_same_v<D, Negate>) {
                check_indices(*d.operand, arity);
            } else if constexpr (std::is_same_v<D, Binary>) {
                check_indices(*d.lhs, arity);
                check_indices(*d.rhs, arity);
            } else if constexpr (std::is_same_v<D, Call>) {
                check_indices(*d.arg, arity);
            }
        },
        n.data);
}

} // namespace

NodePtr number(double value, std::size_t position) { return make(Number{value}, position, true); }
NodePtr constant(NamedConstant which, std::size_t position)
{
    return make(Constant{which}, position, true);
}
NodePtr variable(std::size_t index, std::size_t position)
{
    return make(Variable{index}, position, false);
}
NodePtr negate(NodePtr operand, std::size_t position)
{
    const bool vf = subtree_variable_free(operand);
    return make(Negate{std::move(operand)}, position, vf);
}
NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs, std::size_t position)
{
    const bool vf = subtree_variable_free(lhs) && subtree_variable_free(rhs);
    return make(Binary{op, std::move(lhs), std::move(rhs)}, position, vf);
}
NodePtr call(Function fn, NodePtr arg, std::size_t position)
{
    const bool vf = subtree_variable_free(arg);
    return make(Call{fn, std::move(arg)}, position, vf);
}

std::string_view function_name(Function fn)
{
    switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Tan: return "tan";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Sinh: return "sinh";
    case Function::Cosh: return "cosh";
    case Function::Atan: return "atan";
    }
    return "?";
}

char operator_symbol(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
    }
    return '?';
}

ParseError::ParseError(Kind kind, std::size_t position, const std::string& message)
    : Error(message + " at position " + std::to_string(position)), kind_(kind), position_(position),
      detail_(message)
{
}

Expression::Expression(NodePtr root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables))
{
    if (!root_)
        throw std::invalid_argument("expression root is null");
    if (variables_.size() > Jet2::max_vars)
        throw std::invalid_argument("at most three variables are supported");
    std::set<std::string_view> seen;
    for (const auto& v : variables_) {
        if (!is_identifier(v) || is_reserved(v))
            throw std::invalid_argument("invalid variable name '" + v + "'");
        if (!seen.insert(v).second)
            throw std::invalid_argument("duplicate variable name '" + v + "'");
    }
    check_indices(*root_, variables_.size());
}

Jet2 Expression::jet(std::span<const double> point) const
{
    if (point.size() != variables_.size())
        throw PreconditionError("point has " + std::to_string(point.size())
            + " coordinates, expression has " + std::to_string(variables_.size()) + " variables");
    return eval(*root_, JetOps{variables_.size(), point});
}

double Expression::value(std::span<const double> point) const
{
    if (point.size() != variables_.size())
        throw PreconditionError("point has " + std::to_string(point.size())
            + " coordinates, expression has " + std::to_string(variables_.size()) + " variables");
    return eval(*root_, ScalarOps{variables_.size(), point});
}

std::string Expression::render() const
{
    std::string out;
    render_into(*root_, variables_, out);
    return out;
}

bool structurally_equal(const Node& a, const Node& b)
{
    if (a.data.index() != b.data.index())
        return false;
    return std::visit(
        [&](const auto& da) -> bool {
            using D = std::decay_t<decltype(da)>;
            const auto& db = std::get<D>(b.data);
            if constexpr (std::is_same_v<D, Number>) {
                return da.value == db.value;
            } else if constexpr (std::is_same_v<D, Constant>) {
                return da.which == db.which;
            } else if constexpr (std::is_same_v<D, Variable>) {
                return da.index == db.index;
            } else if constexpr (std::is_same_v<D, Negate>) {
                return structurally_equal(*da.operand, *db.operand);
            } else if constexpr (std::is_same_v<D, Binary>) {
                return da.op == db.op && structurally_equal(*da.lhs, *db.lhs)
                    && structurally_equal(*da.rhs, *db.rhs);
            } else {
                return da.fn == db.fn && structurally_equal(*da.arg, *db.arg);
            }
        },
        a.data);
}

FdDiscrepancy fd_check(const Expression& e, std::span<const double> point, double h)
{
    const std::size_t n = e.arity();
    const Jet2 j = e.jet(point);
    std::vector<double> x(point.begin(), point.end());
    auto shifted = [&](std::size_t i, double d) {
        std::vector<double> y = x;
        y[i] += d;
        return y;
    };
    auto rel = [](double fd, double exact) {
        return std::fabs(fd - exact) / std::max(1.0, std::fabs(exact));
    };
    FdDiscrepancy out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto xp = shifted(i, h), xm = shifted(i, -h);
        out.gradient = std::max(out.gradient, rel((e.value(xp) - e.value(xm)) / (2.0 * h), j.grad(i)));
        // hessian rows from differences of the exact gradient: roundoff ~ eps/h, not eps/h^2
        const Jet2 jp = e.jet(xp), jm = e.jet(xm);
        for (std::size_t k = 0; k < n; ++k)
            out.hessian = std::max(out.hessian, rel((jp.grad(k) - jm.grad(k)) / (2.0 * h), j.hess(i, k)));
    }
    return out;
}

} // namespace eikonal::expr
