#include "eikonal/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace eikonal::cli {

using nlohmann::json;
using num::Vec2;
using num::Vec4;

namespace {

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g12(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

constexpr double kResidualGate = 1e-6;

Vec4 as_vec4(const std::vector<double>& p)
{
    if (p.size() != 4)
        throw ConfigError("point", "point must have 4 components x0,x1,x2,x3");
    return Vec4(p[0], p[1], p[2], p[3]);
}

num::Vec3 as_vec3(const std::vector<double>& p)
{
    if (p.size() != 3)
        throw ConfigError("point", "point must have 3 components x0,x1,x2");
    return num::Vec3(p[0], p[1], p[2]);
}

family3d::EvalOptions eval_options(const RunConfig& config)
{
    family3d::EvalOptions o;
    o.solver = config.solver;
    o.branches = config.branches;
    o.fd_step = config.fd_step;
    return o;
}

family2d::Eval2Options eval2_options(const RunConfig& config)
{
    family2d::Eval2Options o;
    o.solver = config.solver;
    o.fd_step = config.fd_step;
    return o;
}

void sort_by_z(std::vector<family3d::EvalResult>& results)
{
    std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
        if (a.z.z1 != b.z.z1)
            return a.z.z1 < b.z.z1;
        return a.z.z2 < b.z.z2;
    });
}

std::string residual_text(const verify::ResidualReport& r)
{
    return "res_uu=" + g12(r.res_uu) + " res_vv=" + g12(r.res_vv) + " res_uv=" + g12(r.res_uv_minus_1);
}

int eval2_at(const RunConfig& config, const num::Vec3& x, std::ostream& out)
{
    const family2d::Family2D family = build_family2d(config);
    const auto results = family2d::evaluate2(family, x, eval2_options(config));
    if (results.empty()) {
        out << "no branch at x = (" << g12(x[0]) << ", " << g12(x[1]) << ", " << g12(x[2]) << ")\n";
        return kNoBranch;
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out << "branch " << i << ": z=" << g12(r.z) << " u=" << g12(r.u) << " v=" << g12(r.v) << ' '
            << residual_text(r.residuals) << " iters=" << r.solver.iterations << '\n';
    }
    return kSuccess;
}

} // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err, int fallback)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const expr::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return fallback;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

int cmd_eval(const RunConfig& config, const std::vector<double>& point, std::ostream& out, std::ostream& err)
{
    if (config.kind == Kind::TwoD)
        return eval2_at(config, as_vec3(point), out);
    const Vec4 x = as_vec4(point);
    const family3d::Family3D family = resolved_family3d(config);
    std::vector<family3d::EvalResult> results;
    try {
        results = family3d::evaluate(family, x, eval_options(config));
    } catch (const PreconditionError& e) {
        err << "rejected: " << e.what() << '\n';
        return kNoBranch;
    }
    if (results.empty()) {
        out << "no branch converged\n";
        return kNoBranch;
    }
    sort_by_z(results);
    for (const auto& r : results) {
        out << "branch " << (r.z.branch() > 0 ? "+1" : "-1") << ": z=(" << g12(r.z.z1) << ", " << g12(r.z.z2)
            << ") s=" << g12(r.z.s) << " u=" << g12(r.u) << " v=" << g12(r.v) << ' ' << residual_text(r.residuals)
            << " iters=" << r.solver.iterations << " variants=" << family3d::to_string(r.variants) << '\n';
    }
    return kSuccess;
}

int cmd_family2d(const RunConfig& config, const std::vector<double>& point, std::ostream& out, std::ostream&)
{
    if (config.kind != Kind::TwoD)
        throw ConfigError("kind", "family2d needs kind 2d");
    return eval2_at(config, as_vec3(point), out);
}

int cmd_grid(const RunConfig& config, std::ostream& out, std::ostream&)
{
    if (config.grid.empty())
        throw ConfigError("grid", "grid is required for the grid command");
    const int dim = config.dimension();
    std::vector<int> index(dim, 0);
    auto advance = [&] {
        for (int a = dim - 1; a >= 0; --a) {
            if (++index[a] < config.grid[a].count)
                return true;
            index[a] = 0;
        }
        return false;
    };

    if (config.kind == Kind::TwoD) {
        const family2d::Family2D family = build_family2d(config);
        out << "x0,x1,x2,branch,z,u,v,res_uu,res_vv,res_uv,converged,iters\n";
        do {
            const num::Vec3 x(config.grid[0].at(index[0]), config.grid[1].at(index[1]), config.grid[2].at(index[2]));
            const std::string prefix = g17(x[0]) + ',' + g17(x[1]) + ',' + g17(x[2]) + ',';
            const auto results = family2d::evaluate2(family, x, eval2_options(config));
            if (results.empty())
                out << prefix << ",,,,,,,0,\n";
            for (std::size_t b = 0; b < results.size(); ++b) {
                const auto& r = results[b];
                out << prefix << b << ',' << g17(r.z) << ',' << g17(r.u) << ',' << g17(r.v) << ','
                    << g17(r.residuals.res_uu) << ',' << g17(r.residuals.res_vv) << ','
                    << g17(r.residuals.res_uv_minus_1) << ",1," << r.solver.iterations << '\n';
            }
        } while (advance());
        return kSuccess;
    }

    const family3d::Family3D family = resolved_family3d(config);
    const family3d::EvalOptions options = eval_options(config);
    out << "x0,x1,x2,x3,branch,z1,z2,s,u,v,res_uu,res_vv,res_uv,converged,iters\n";
    do {
        Vec4 x;
        for (int a = 0; a < 4; ++a)
            x[a] = config.grid[a].at(index[a]);
        const std::string prefix = g17(x[0]) + ',' + g17(x[1]) + ',' + g17(x[2]) + ',' + g17(x[3]) + ',';
        std::vector<family3d::EvalResult> results;
        if (std::abs(x[3]) >= options.x3_min)
            results = family3d::evaluate(family, x, options);
        if (results.empty()) {
            out << prefix << ",,,,,,,,,0,\n";
            continue;
        }
        sort_by_z(results);
        for (const auto& r : results) {
            out << prefix << r.z.branch() << ',' << g17(r.z.z1) << ',' << g17(r.z.z2) << ',' << g17(r.z.s) << ','
                << g17(r.u) << ',' << g17(r.v) << ',' << g17(r.residuals.res_uu) << ','
                << g17(r.residuals.res_vv) << ',' << g17(r.residuals.res_uv_minus_1) << ",1,"
                << r.solver.iterations << '\n';
        }
    } while (advance());
    return kSuccess;
}

std::string audit_json(const verify::AuditReport& report, const RunConfig& config)
{
    json doc;
    doc["family"] = {{"kind", "3d"}, {"g", config.g}, {"k", config.k}};
    json variants = json::array();
    for (const auto& v : report.variants) {
        variants.push_back({{"constraint", family3d::to_string(v.variants.constraint)},
            {"p", family3d::to_string(v.variants.p)}, {"r", family3d::to_string(v.variants.r)},
            {"max_res_uu", v.max_res_uu}, {"max_res_vv", v.max_res_vv}, {"max_res_uv", v.max_res_uv},
            {"mixed_defect", v.mixed_defect}, {"points", v.points}});
    }
    doc["variants"] = variants;
    const auto& best = report.best().variants;
    doc["selected"] = {{"constraint", family3d::to_string(best.constraint)}, {"p", family3d::to_string(best.p)},
        {"r", family3d::to_string(best.r)}};
    doc["passed"] = report.passed;
    doc["gate"] = kResidualGate;
    doc["seed"] = report.seed;
    doc["samples"] = report.samples;
    return doc.dump(2) + "\n";
}

int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    const family3d::Family3D family = build_family3d(config);
    const verify::AuditReport report = verify::closure_audit(family, audit_options(config));
    out << audit_json(report, config);
    if (!report.passed) {
        err << "audit: no variant combination passes the " << kResidualGate << " gate (best "
            << family3d::to_string(report.best().variants) << ", score " << report.best().score() << ")\n";
        return kAuditGateFailure;
    }
    return kSuccess;
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream&)
{
    if (config.kind == Kind::TwoD) {
        if (!config.point)
            throw ConfigError("point", "verify for kind 2d needs a point");
        const family2d::Family2D family = build_family2d(config);
        const auto results = family2d::evaluate2(family, as_vec3(*config.point), eval2_options(config));
        bool ok = !results.empty();
        for (const auto& r : results) {
            const bool pass = r.residuals.max_abs() <= kResidualGate;
            ok = ok && pass;
            out << (pass ? "PASS" : "FAIL") << " z=" << g12(r.z) << ' ' << residual_text(r.residuals) << '\n';
        }
        return results.empty() ? kNoBranch : (ok ? kSuccess : kAuditGateFailure);
    }

    const family3d::Family3D family = resolved_family3d(config);
    std::vector<Vec4> points;
    if (config.point)
        points.push_back(as_vec4(*config.point));
    else
        points = verify::audit_points(family, family.variants().constraint, audit_options(config));

    out << "variants " << family3d::to_string(family.variants()) << '\n';
    const family3d::EvalOptions options = eval_options(config);
    int evaluated = 0, failed = 0;
    for (const Vec4& x : points) {
        std::vector<family3d::EvalResult> results;
        try {
            results = family3d::evaluate(family, x, options);
        } catch (const PreconditionError& e) {
            out << "skip x=(" << g12(x[0]) << ", " << g12(x[1]) << ", " << g12(x[2]) << ", " << g12(x[3])
                << "): " << e.what() << '\n';
            continue;
        }
        for (const auto& r : results) {
            ++evaluated;
            const bool pass = r.residuals.max_abs() <= kResidualGate;
            failed += pass ? 0 : 1;
            out << (pass ? "PASS" : "FAIL") << " x=(" << g12(x[0]) << ", " << g12(x[1]) << ", " << g12(x[2])
                << ", " << g12(x[3]) << ") z=(" << g12(r.z.z1) << ", " << g12(r.z.z2) << ") "
                << residual_text(r.residuals);
            const Vec4 y(r.u, x[1], x[2], x[3]);
            const auto yc = verify::intermediate_ycheck(family, y, {config.solver, config.fd_step, 0.0});
            out << " eik4=" << g12(yc.eik4) << " eik4a=" << g12(yc.eik4a) << " eik4b=" << g12(yc.eik4b);
            try {
                const auto fc = verify::fiber_derive_closure(family, r.z, {12, config.seed, config.solver, config.fd_step});
                const Vec2 rg = family.closure_r_gradient(r.z, family.variants().r);
                out << " fiber_dp=" << g12(fc.p - family.closure_p(r.z)) << " fiber_dr=("
                    << g12(fc.r_z1 - rg[0]) << ", " << g12(fc.r_z2 - rg[1]) << ")";
            } catch (const Error& e) {
                out << " fiber=unavailable(" << e.what() << ")";
            }
            out << '\n';
        }
    }
    out << "summary: " << evaluated << " branches, " << failed << " above " << kResidualGate << '\n';
    if (evaluated == 0)
        return kNoBranch;
    return failed == 0 ? kSuccess : kAuditGateFailure;
}

int cmd_selfcheck(std::ostream& out, const SelfcheckHooks& hooks)
{
    int failures = 0, total = 0;
    auto item = [&](const std::string& name, const std::function<std::string()>& check) {
        ++total;
        std::string detail;
        bool ok = false;
        try {
            detail = check();
            ok = detail.empty();
        } catch (const std::exception& e) {
            detail = e.what();
        }
        failures += ok ? 0 : 1;
        out << (ok ? "[PASS] " : "[FAIL] ") << name << (ok ? "" : ": " + detail) << '\n';
    };
    auto within = [](double got, double want, double tol, const std::string& what) -> std::string {
        if (std::abs(got - want) <= tol)
            return {};
        return what + " = " + g17(got) + ", expected " + g17(want);
    };

    item("plane_wave_pair", [&]() -> std::string {
        const verify::Field4 u = [](const Vec4& x) { return x[0] + x[1]; };
        const verify::Field4 v = [](const Vec4& x) { return 0.5 * (x[0] - x[1]); };
        for (const Vec4& x : {Vec4(0.0, 0.0, 0.0, 0.0), Vec4(1.5, -2.0, 0.3, 4.0), Vec4(-7.0, 3.0, 9.0, -1.0)}) {
            const auto r = verify::residuals_at(u, v, x, 1e-2, std::nullopt, hooks.metric);
            if (!(r.max_abs() <= 1e-12))
                return "residual " + g17(r.max_abs()) + " at a plane-wave point";
        }
        return {};
    });
    item("minkowski_null_vector", [&]() -> std::string {
        const Vec4 n(1.0, 1.0, 0.0, 0.0), t(1.0, 0.0, 0.0, 0.0);
        if (hooks.metric.dot(n, n) != 0.0 || hooks.metric.dot(t, t) != 1.0)
            return "(1,1,0,0) must be null and (1,0,0,0) unit";
        return {};
    });

    const family3d::Family3D unit = family3d::Family3D::from_text("1", "0");
    const Vec4 x_ref(0.0, 0.6, 0.0, 0.8);
    item("closed_form_3d", [&]() -> std::string {
        const auto res = family3d::evaluate(unit, x_ref);
        if (res.size() != 1)
            return std::to_string(res.size()) + " branches, expected 1";
        for (const auto& s : {within(res[0].z.z1, -0.6, 1e-9, "z1"), within(res[0].u, -1.0, 1e-8, "u"),
                 within(res[0].v, 0.5, 1e-8, "v")})
            if (!s.empty())
                return s;
        return {};
    });
    item("residuals_3d", [&]() -> std::string {
        const auto res = family3d::evaluate(unit, x_ref);
        if (res.empty() || !(res[0].residuals.max_abs() <= 1e-6))
            return "residuals above 1e-6";
        return {};
    });
    item("constraint_discriminator", [&]() -> std::string {
        const auto x_display = unit.with_variants({family3d::ConstraintVariant::XDisplay});
        family3d::EvalOptions o;
        o.method = verify::ResidualMethod::FdBoth;
        const auto res = family3d::evaluate(x_display, x_ref, o);
        if (res.empty() || !(std::abs(res[0].residuals.res_uu) >= 1.0))
            return "x-display variant should violate u.u = 0 by at least 1";
        return {};
    });
    item("family2d_example", [&]() -> std::string {
        const auto f = family2d::Family2D::from_text("z", "0", "0");
        const auto res = family2d::evaluate2(f, {2.0, 0.0, -1.0});
        if (res.size() != 2)
            return std::to_string(res.size()) + " branches, expected 2";
        const double r3 = std::sqrt(3.0);
        for (const auto& s : {within(res[0].z, -r3 / 2, 1e-9, "z"), within(res[0].u, r3, 1e-8, "u"),
                 within(res[0].v, r3 / 2, 1e-8, "v"), within(res[1].z, r3 / 2, 1e-9, "z"),
                 within(res[1].u, -r3, 1e-8, "u"), within(res[1].v, -r3 / 2, 1e-8, "v")})
            if (!s.empty())
                return s;
        return {};
    });
    item("expression_fd", [&]() -> std::string {
        const auto e1 = expr::Expression::parse("exp(z1)", {"z1"});
        const auto e2 = expr::Expression::parse("sin(3*z1)", {"z1"});
        const double p1[] = {0.3}, p2[] = {0.5};
        if (!(expr::fd_check(e1, p1, 1e-4).max() < 1e-7) || !(expr::fd_check(e2, p2, 1e-4).max() < 1e-6))
            return "jet and finite differences disagree";
        return {};
    });
    item("parse_render_roundtrip", [&]() -> std::string {
        const auto e = expr::Expression::parse("1 + 0.2*z1 - sin(z2)^2/(3 + z1*z2)", {"z1", "z2"});
        const auto back = expr::Expression::parse(e.render(), {"z1", "z2"});
        if (!expr::structurally_equal(e.root(), back.root()))
            return "render does not parse back to the same tree";
        return {};
    });
    item("newton_affine", [&]() -> std::string {
        const num::System2 f = [](const Vec2& z) -> std::optional<num::Eval2> {
            return num::Eval2{Vec2(z[0] - 0.3, z[1] + 0.1), num::Mat2::Identity()};
        };
        const auto o = num::newton2(f, Vec2::Zero(), {});
        if (!o.converged || o.iterations != 1 || (o.root - Vec2(0.3, -0.1)).norm() > 1e-15)
            return "affine system not solved in one step";
        return {};
    });

    out << (total - failures) << '/' << total << " checks passed\n";
    return failures == 0 ? kSuccess : kSelfcheckFailure;
}

} // namespace eikonal::cli
