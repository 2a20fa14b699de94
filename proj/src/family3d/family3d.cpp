#include "eikonal/family3d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace eikonal::family3d {

std::string to_string(ConstraintVariant v)
{
    return v == ConstraintVariant::YDisplay ? "paper_y_display" : "paper_x_display";
}

std::string to_string(PVariant v) { return v == PVariant::Printed ? "P_printed" : "P_nocross"; }

std::string to_string(RVariant v)
{
    switch (v) {
    case RVariant::Printed: return "R_printed";
    case RVariant::Sym: return "R_sym";
    case RVariant::Diag: return "R_diag";
    case RVariant::Envelope: return "R_envelope";
    }
    return "?";
}

std::string to_string(BranchMode m)
{
    switch (m) {
    case BranchMode::Auto: return "auto";
    case BranchMode::Positive: return "positive";
    case BranchMode::Negative: return "negative";
    case BranchMode::Both: return "both";
    }
    return "?";
}

std::string to_string(const Variants& v)
{
    return to_string(v.constraint) + "/" + to_string(v.p) + "/" + to_string(v.r);
}

std::optional<ConstraintVariant> parse_constraint_variant(std::string_view s)
{
    for (auto v : kConstraintVariants)
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::optional<PVariant> parse_p_variant(std::string_view s)
{
    for (auto v : kPVariants)
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::optional<RVariant> parse_r_variant(std::string_view s)
{
    for (auto v : kRVariants)
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::optional<BranchMode> parse_branch_mode(std::string_view s)
{
    for (auto m : {BranchMode::Auto, BranchMode::Positive, BranchMode::Negative, BranchMode::Both})
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

double s_of(double z1, double z2, int branch)
{
    const double q = 1.0 - z1 * z1 - z2 * z2;
    if (!(q > 0.0))
        throw DomainError("parameter point (" + std::to_string(z1) + ", " + std::to_string(z2)
            + ") is not inside the open unit disk");
    return (branch < 0 ? -1.0 : 1.0) * std::sqrt(q);
}

ParamPoint make_point(double z1, double z2, int branch) { return {z1, z2, s_of(z1, z2, branch)}; }

namespace {

double sigma(ConstraintVariant v) { return v == ConstraintVariant::YDisplay ? 1.0 : -1.0; }

void require_g(double g, double z1, double z2)
{
    if (g == 0.0)
        throw SingularFamilyError("g vanishes at z = (" + std::to_string(z1) + ", " + std::to_string(z2) + ")");
}

// r-gradient for each variant; uses s^2 only, so it is branch independent.
Vec2 r_gradient(const Generators& G, double z1, double z2, RVariant variant)
{
    const double s2 = 1.0 - z1 * z1 - z2 * z2;
    const double a1 = z1 * G.g + s2 * G.g1;
    const double a2 = z2 * G.g + s2 * G.g2;
    switch (variant) {
    case RVariant::Printed:
        return {-G.k11 * a1, -G.k12 * a2};
    case RVariant::Sym:
        return {-G.k11 * a1 - G.k12 * a2, -G.k12 * a1 - G.k22 * a2};
    case RVariant::Diag:
        return {-G.k11 * a1, -G.k22 * a2};
    case RVariant::Envelope: {
        const double b = G.g - z1 * G.g1 - z2 * G.g2;
        const double q1 = G.g1 + z1 * b, q2 = G.g2 + z2 * b;
        return {G.k11 * q1 + G.k12 * q2, G.k12 * q1 + G.k22 * q2};
    }
    }
    return Vec2::Zero();
}

} // namespace

Family3D::Family3D(expr::Expression g, expr::Expression k, FamilyOptions options)
    : g_(std::move(g)), k_(std::move(k)), options_(options)
{
    if (g_.arity() != 2 || k_.arity() != 2)
        throw PreconditionError("g and k must be functions of (z1, z2)");
    constexpr int n = 21;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double z1 = -1.0 + 2.0 * i / (n - 1);
            const double z2 = -1.0 + 2.0 * j / (n - 1);
            if (z1 * z1 + z2 * z2 > 0.9)
                continue;
            const Generators G = generators(z1, z2);
            if (!(std::abs(G.g) >= options_.g_min))
                throw SingularFamilyError("|g| = " + std::to_string(std::abs(G.g)) + " < g_min = "
                    + std::to_string(options_.g_min) + " at z = (" + std::to_string(z1) + ", "
                    + std::to_string(z2) + ")");
        }
    }
}

Family3D Family3D::from_text(std::string_view g, std::string_view k, FamilyOptions options)
{
    return Family3D(expr::Expression::parse(g, {"z1", "z2"}), expr::Expression::parse(k, {"z1", "z2"}),
        options);
}

Family3D Family3D::with_variants(const Variants& v) const
{
    Family3D copy = *this;
    copy.options_.variants = v;
    return copy;
}

Generators Family3D::generators(double z1, double z2) const
{
    const std::array<double, 2> z{z1, z2};
    const Jet2 g = g_.jet(z);
    const Jet2 k = k_.jet(z);
    return {g.value(), g.grad(0), g.grad(1), g.hess(0, 0), g.hess(0, 1), g.hess(1, 1), k.value(),
        k.grad(0), k.grad(1), k.hess(0, 0), k.hess(0, 1), k.hess(1, 1)};
}

double Family3D::u_of(const Vec4& x, const ParamPoint& z) const
{
    const std::array<double, 2> zz{z.z1, z.z2};
    const double g = g_.value(zz);
    require_g(g, z.z1, z.z2);
    return (x[1] * z.z1 + x[2] * z.z2 - x[3] * z.s - x[0] + k_.value(zz)) / g;
}

Vec2 Family3D::envelope_constraints(const Vec4& x, const ParamPoint& z) const
{
    return constraints_with_jacobian(x, z).value;
}

num::Eval2 Family3D::constraints_with_jacobian(const Vec4& x, const ParamPoint& z) const
{
    const Generators G = generators(z.z1, z.z2);
    require_g(G.g, z.z1, z.z2);
    const double sg = sigma(options_.variants.constraint);
    const double s = z.s;
    const double zz[2] = {z.z1, z.z2};
    const double gi[2] = {G.g1, G.g2};
    const double ki[2] = {G.k1, G.k2};
    const double gij[2][2] = {{G.g11, G.g12}, {G.g12, G.g22}};
    const double kij[2][2] = {{G.k11, G.k12}, {G.k12, G.k22}};

    const double u = (x[1] * z.z1 + x[2] * z.z2 - x[3] * s - x[0] + G.k) / G.g;
    double du[2];
    for (int j = 0; j < 2; ++j)
        du[j] = (x[1 + j] + x[3] * zz[j] / s + ki[j] - u * gi[j]) / G.g;

    num::Eval2 out;
    for (int i = 0; i < 2; ++i) {
        out.value[i] = x[1 + i] + sg * x[3] * zz[i] / s - gi[i] * u + ki[i];
        for (int j = 0; j < 2; ++j) {
            const double dzs = (i == j ? 1.0 / s : 0.0) + zz[i] * zz[j] / (s * s * s);
            out.jacobian(i, j) = sg * x[3] * dzs - gij[i][j] * u - gi[i] * du[j] + kij[i][j];
        }
    }
    return out;
}

Eigen::Matrix<double, 2, 4> Family3D::parameter_gradient(const Vec4& x, const ParamPoint& z) const
{
    const num::Eval2 ev = constraints_with_jacobian(x, z);
    const Generators G = generators(z.z1, z.z2);
    const double sg = sigma(options_.variants.constraint);
    const Vec4 du = analytic_grad_u(z);
    const double zz[2] = {z.z1, z.z2};
    const double gi[2] = {G.g1, G.g2};
    Eigen::Matrix<double, 2, 4> dfdx;
    for (int i = 0; i < 2; ++i) {
        for (int mu = 0; mu < 4; ++mu) {
            double d = -gi[i] * du[mu];
            if (mu == 1 + i)
                d += 1.0;
            if (mu == 3)
                d += sg * zz[i] / z.s;
            dfdx(i, mu) = d;
        }
    }
    return -ev.jacobian.inverse() * dfdx;
}

double Family3D::closure_p(const ParamPoint& z, PVariant variant) const
{
    const Generators G = generators(z.z1, z.z2);
    const double b = G.g - z.z1 * G.g1 - z.z2 * G.g2;
    const double cross = variant == PVariant::Printed ? G.g1 * G.g2 : 0.0;
    return 0.5 * (-(G.g1 * G.g1 + G.g2 * G.g2 - cross) + b * b);
}

Vec2 Family3D::closure_r_gradient(const ParamPoint& z, RVariant variant) const
{
    return r_gradient(generators(z.z1, z.z2), z.z1, z.z2, variant);
}

double Family3D::closure_r(const ParamPoint& z, RVariant variant) const
{
    if (!(z.z1 * z.z1 + z.z2 * z.z2 < 1.0))
        throw DomainError("closure_r: path leaves the unit disk");
    const double z1 = z.z1;
    const double leg1 = num::integrate(
        [&](double t) { return r_gradient(generators(t, 0.0), t, 0.0, variant)[0]; }, 0.0, z1);
    const double leg2 = num::integrate(
        [&](double t) { return r_gradient(generators(z1, t), z1, t, variant)[1]; }, 0.0, z.z2);
    return options_.r_base + leg1 + leg2;
}

double Family3D::v_of(const Vec4& x, const ParamPoint& z, double u) const
{
    return v_of(x, z, u, options_.variants.p, options_.variants.r);
}

double Family3D::v_of(const Vec4& x, const ParamPoint& z, double u, PVariant p, RVariant r) const
{
    if (z.s == 0.0)
        throw DomainError("v_of: s vanishes");
    const std::array<double, 2> zz{z.z1, z.z2};
    return g_.value(zz) * x[3] / z.s + closure_p(z, p) * u + closure_r(z, r);
}

Vec4 Family3D::analytic_grad_u(const ParamPoint& z) const
{
    const std::array<double, 2> zz{z.z1, z.z2};
    const double g = g_.value(zz);
    require_g(g, z.z1, z.z2);
    return Vec4(-1.0, z.z1, z.z2, -z.s) / g;
}

double Family3D::mixed_partial_defect(RVariant variant, int n, double half_width, double h) const
{
    double worst = 0.0;
    auto grad = [&](double a, double b) { return r_gradient(generators(a, b), a, b, variant); };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = n == 1 ? 0.0 : -half_width + 2.0 * half_width * i / (n - 1);
            const double b = n == 1 ? 0.0 : -half_width + 2.0 * half_width * j / (n - 1);
            const double d2r1 = (grad(a, b + h)[0] - grad(a, b - h)[0]) / (2.0 * h);
            const double d1r2 = (grad(a + h, b)[1] - grad(a - h, b)[1]) / (2.0 * h);
            worst = std::max(worst, std::abs(d2r1 - d1r2));
        }
    }
    return worst;
}

namespace {

num::System2 constraint_system(const Family3D& f, const Vec4& x, int branch)
{
    return [&f, x, branch](const Vec2& z) -> std::optional<num::Eval2> {
        try {
            return f.constraints_with_jacobian(x, make_point(z[0], z[1], branch));
        } catch (const Error&) {
            return std::nullopt;
        }
    };
}

bool in_disk(const Vec2& z) { return z.squaredNorm() < 1.0; }

} // namespace

std::vector<num::SolveOutcome> Family3D::solve_branch(const Vec4& x, int branch,
    const num::SolverConfig& config) const
{
    return num::solve_all_2d(constraint_system(*this, x, branch), in_disk, config);
}

std::optional<ParamPoint> Family3D::track(const Vec4& x, const Vec4& x_center,
    const ParamPoint& z_center, const num::SolverConfig& config) const
{
    Vec2 predicted;
    try {
        predicted = z_center.z() + parameter_gradient(x_center, z_center) * (x - x_center);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (!predicted.allFinite() || !in_disk(predicted))
        predicted = z_center.z();
    const num::SolveOutcome o
        = num::newton2(constraint_system(*this, x, z_center.branch()), predicted, config, in_disk);
    if (!o.converged || (o.root - predicted).norm() > 10.0 * config.dedupe_distance)
        return std::nullopt;
    return make_point(o.root[0], o.root[1], z_center.branch());
}

verify::Field4 u_field(const Family3D& family, const Vec4& x_center, const ParamPoint& z_center,
    const num::SolverConfig& config)
{
    return [&family, x_center, z_center, config](const Vec4& x) {
        const auto z = family.track(x, x_center, z_center, config);
        if (!z)
            return std::numeric_limits<double>::quiet_NaN();
        return family.u_of(x, *z);
    };
}

verify::Field4 v_field(const Family3D& family, const Vec4& x_center, const ParamPoint& z_center,
    const num::SolverConfig& config)
{
    return [&family, x_center, z_center, config](const Vec4& x) {
        const auto z = family.track(x, x_center, z_center, config);
        if (!z)
            return std::numeric_limits<double>::quiet_NaN();
        return family.v_of(x, *z, family.u_of(x, *z));
    };
}

std::vector<BranchRoot> find_roots(const Family3D& family, const Vec4& x, const EvalOptions& options)
{
    if (!(std::abs(x[3]) >= options.x3_min))
        throw PreconditionError("|x3| = " + std::to_string(std::abs(x[3])) + " is below x3_min = "
            + std::to_string(options.x3_min) + "; the fiber geometry degenerates");

    const int primary = x[3] < 0.0 ? -1 : 1;
    std::vector<BranchRoot> roots;
    auto collect = [&](int branch) {
        for (const auto& o : family.solve_branch(x, branch, options.solver))
            roots.push_back({branch, o});
    };
    switch (options.branches) {
    case BranchMode::Auto:
        collect(primary);
        if (roots.empty())
            collect(-primary);
        break;
    case BranchMode::Positive:
        collect(1);
        break;
    case BranchMode::Negative:
        collect(-1);
        break;
    case BranchMode::Both:
        collect(1);
        collect(-1);
        break;
    }
    return roots;
}

EvalResult evaluate_root(const Family3D& family, const Vec4& x, const BranchRoot& root, const EvalOptions& options)
{
    EvalResult r;
    r.x = x;
    r.z = make_point(root.outcome.root[0], root.outcome.root[1], root.branch);
    r.u = family.u_of(x, r.z);
    r.v = family.v_of(x, r.z, r.u);
    r.grad_u = family.analytic_grad_u(r.z);
    r.solver = root.outcome;
    r.variants = family.variants();
    const auto uf = u_field(family, x, r.z, options.solver);
    const auto vf = v_field(family, x, r.z, options.solver);
    std::optional<Vec4> analytic;
    if (options.method == verify::ResidualMethod::AnalyticUFdV)
        analytic = r.grad_u;
    verify::Gradients4 grads;
    r.residuals = verify::residuals_with_gradients(uf, vf, x, options.fd_step, analytic, {}, grads);
    if (r.residuals.branch_flag)
        r.grad_v = grads.grad_v;
    else
        r.grad_v = Vec4::Constant(std::numeric_limits<double>::quiet_NaN());
    return r;
}

std::vector<EvalResult> evaluate(const Family3D& family, const Vec4& x, const EvalOptions& options)
{
    std::vector<EvalResult> results;
    for (const BranchRoot& root : find_roots(family, x, options))
        results.push_back(evaluate_root(family, x, root, options));
    std::stable_sort(results.begin(), results.end(), [](const EvalResult& a, const EvalResult& b) {
        const double ra = a.residuals.branch_flag ? std::abs(a.residuals.res_uu) : INFINITY;
        const double rb = b.residuals.branch_flag ? std::abs(b.residuals.res_uu) : INFINITY;
        return ra < rb;
    });
    return results;
}

} // namespace eikonal::family3d
