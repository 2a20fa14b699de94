#include "eikonal/family2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace eikonal::family2d {

namespace {

Jet2 jet_at(const expr::Expression& e, double z)
{
    const std::array<double, 1> p{z};
    return e.jet(p);
}

double root_of_one_minus_sq(double z)
{
    const double q = 1.0 - z * z;
    if (!(q > 0.0))
        throw DomainError("z = " + std::to_string(z) + " is outside (-1, 1)");
    return std::sqrt(q);
}

double derivative(const expr::Expression& e, double z) { return jet_at(e, z).grad(0); }

double checked_gp(const expr::Expression& g, double z)
{
    const double gp = derivative(g, z);
    if (gp == 0.0)
        throw SingularFamilyError("g' vanishes at z = " + std::to_string(z));
    return gp;
}

} // namespace

Family2D::Family2D(expr::Expression g, expr::Expression k, expr::Expression h, Family2DOptions options)
    : g_(std::move(g)), k_(std::move(k)), h_(std::move(h)), options_(options)
{
    if (g_.arity() != 1 || k_.arity() != 1 || h_.arity() != 1)
        throw PreconditionError("g, k and h must be functions of z");
    constexpr int n = 41;
    for (int i = 0; i < n; ++i) {
        const double z = -0.9 + 1.8 * i / (n - 1);
        const double gp = derivative(g_, z);
        jet_at(k_, z);
        jet_at(h_, z);
        if (!(std::abs(gp) >= options_.gp_min))
            throw SingularFamilyError("|g'| = " + std::to_string(std::abs(gp)) + " < gp_min = "
                + std::to_string(options_.gp_min) + " at z = " + std::to_string(z));
    }
}

Family2D Family2D::from_text(std::string_view g, std::string_view k, std::string_view h,
    Family2DOptions options)
{
    return Family2D(expr::Expression::parse(g, {"z"}), expr::Expression::parse(k, {"z"}),
        expr::Expression::parse(h, {"z"}), options);
}

double Family2D::implicit2(const Vec3& x, double z) const
{
    const double c = root_of_one_minus_sq(z);
    const Jet2 g = jet_at(g_, z);
    const double gp = checked_gp(g_, z);
    const double kp = derivative(k_, z);
    const double hv = jet_at(h_, z).value();
    return x[0] - x[1] * z + x[2] * c + (g.value() / gp) * (x[1] + x[2] * z / c - kp) - hv;
}

double Family2D::u2_of(const Vec3& x, double z) const
{
    const double c = root_of_one_minus_sq(z);
    return (x[1] + x[2] * z / c - derivative(k_, z)) / checked_gp(g_, z);
}

double Family2D::p_of(double z) const
{
    const Jet2 g = jet_at(g_, z);
    const double gp = g.grad(0);
    const double b = g.value() - z * gp;
    return 0.5 * (-gp * gp + b * b);
}

double Family2D::r_prime(double z) const
{
    const Jet2 g = jet_at(g_, z);
    const double kpp = jet_at(k_, z).hess(0, 0);
    return -kpp * (z * g.value() + (1.0 - z * z) * g.grad(0));
}

Closure2 Family2D::closure2(double z) const
{
    root_of_one_minus_sq(z);
    const double r = options_.r_base + num::integrate([this](double t) { return r_prime(t); }, 0.0, z);
    return {p_of(z), r};
}

double Family2D::v2_of(const Vec3& x, double z, double u) const
{
    const double c = root_of_one_minus_sq(z);
    const Closure2 cl = closure2(z);
    return jet_at(g_, z).value() * x[2] / c + cl.p * u + cl.r;
}

namespace {

std::function<double(double)> implicit_at(const Family2D& f, const Vec3& x)
{
    return [&f, x](double z) {
        try {
            return f.implicit2(x, z);
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
}

// Stencil re-solves run to the bracket floor so FD quotients see no solver noise.
num::SolverConfig tight(num::SolverConfig c)
{
    c.tol_residual = 1e-300;
    c.tol_step = 1e-15;
    return c;
}

} // namespace

double track2(const Family2D& family, const Vec3& x, double z_center, const Eval2Options& options)
{
    const auto f = implicit_at(family, x);
    const double lo_limit = -1.0 + options.edge, hi_limit = 1.0 - options.edge;
    const num::SolverConfig cfg = tight(options.solver);
    for (double delta = 1e-4; delta <= 0.05; delta *= 4.0) {
        const double a = std::max(lo_limit, z_center - delta);
        const double b = std::min(hi_limit, z_center + delta);
        const double fa = f(a), fb = f(b);
        if (!std::isfinite(fa) || !std::isfinite(fb))
            return std::numeric_limits<double>::quiet_NaN();
        if (fa == 0.0)
            return a;
        if (fb == 0.0)
            return b;
        if (fa * fb < 0.0) {
            const num::ScalarOutcome o = num::brent1(f, a, b, cfg);
            return o.converged ? o.root : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

verify::Field3 u2_field(const Family2D& family, double z_center, const Eval2Options& options)
{
    return [&family, z_center, options](const Vec3& x) {
        const double z = track2(family, x, z_center, options);
        return std::isfinite(z) ? family.u2_of(x, z) : z;
    };
}

verify::Field3 v2_field(const Family2D& family, double z_center, const Eval2Options& options)
{
    return [&family, z_center, options](const Vec3& x) {
        const double z = track2(family, x, z_center, options);
        return std::isfinite(z) ? family.v2_of(x, z, family.u2_of(x, z)) : z;
    };
}

std::vector<EvalResult2> evaluate2(const Family2D& family, const Vec3& x, const Eval2Options& options)
{
    const auto f = implicit_at(family, x);
    const double a = -1.0 + options.edge, b = 1.0 - options.edge;
    std::vector<EvalResult2> out;
    const num::SolverConfig cfg = tight(options.solver);
    for (const num::Bracket& br : num::scan_brackets(f, a, b, options.scan_nodes)) {
        num::ScalarOutcome o;
        if (br.lo == br.hi) {
            o.root = br.lo;
            o.converged = true;
            o.reason = num::StopReason::ResidualTolerance;
        } else {
            o = num::brent1(f, br.lo, br.hi, cfg);
        }
        if (!o.converged)
            continue;
        o.final_residual = std::abs(f(o.root));
        if (!out.empty() && std::abs(out.back().z - o.root) < options.solver.dedupe_distance)
            continue;
        EvalResult2 r;
        r.x = x;
        r.z = o.root;
        r.u = family.u2_of(x, r.z);
        r.v = family.v2_of(x, r.z, r.u);
        r.solver = o;
        const auto uf = u2_field(family, r.z, options);
        const auto vf = v2_field(family, r.z, options);
        const Vec3 steps = num::default_fd_steps<3>(x, options.fd_step);
        try {
            r.grad_u = num::fd_gradient<3>(uf, x, steps);
            r.grad_v = num::fd_gradient<3>(vf, x, steps);
            r.residuals = {num::minkowski_dot(r.grad_u, r.grad_u), num::minkowski_dot(r.grad_v, r.grad_v),
                num::minkowski_dot(r.grad_u, r.grad_v) - 1.0, verify::ResidualMethod::FdBoth,
                options.fd_step, true};
        } catch (const Error&) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            r.grad_u = r.grad_v = Vec3::Constant(nan);
            r.residuals = {nan, nan, nan, verify::ResidualMethod::FdBoth, options.fd_step, false};
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace eikonal::family2d
