#include "eikonal/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace eikonal;
using namespace eikonal::verify;
using family3d::make_point;

namespace {

Family3D trivial() { return Family3D::from_text("1", "0"); }

} // namespace

TEST_CASE("residuals of the plane-wave pair")
{
    const Field4 u = [](const Vec4& x) { return x[0] + x[1]; };
    const Field4 v = [](const Vec4& x) { return (x[0] - x[1]) / 2; };
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-10, 10);
    for (int i = 0; i < 200; ++i) {
        const Vec4 x(d(rng), d(rng), d(rng), d(rng));
        // affine fields: a wide step keeps cancellation roundoff under the bound
        const auto r = residuals_at(u, v, x, 1e-2);
        CHECK(r.branch_flag);
        CHECK(r.max_abs() <= 1e-12);
    }
    const auto rep = residuals_at(u, v, Vec4::Zero(), 1e-5);
    CHECK(rep.method == ResidualMethod::FdBoth);
    CHECK(rep.fd_step == 1e-5);
}

TEST_CASE("residuals detect a timelike gradient")
{
    const Field4 t = [](const Vec4& x) { return x[0]; };
    const auto r = residuals_at(t, t, Vec4(0.1, 0.2, 0.3, 0.4), 1e-5);
    CHECK(r.res_uu == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.res_vv == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(r.res_uv_minus_1) < 1e-10);
}

TEST_CASE("residuals flag stencil failures")
{
    const Field4 u = [](const Vec4& x) { return x[3] > 0.5 ? NAN : x[0] + x[1]; };
    const Field4 v = [](const Vec4& x) { return x[0]; };
    const auto r = residuals_at(u, v, Vec4(0, 0, 0, 0.5), 1e-3);
    CHECK_FALSE(r.branch_flag);
    CHECK(std::isnan(r.res_uu));
}

TEST_CASE("analytic u gradient and the metric hook")
{
    const Field4 u = [](const Vec4& x) { return x[0] + x[1]; };
    const Field4 v = [](const Vec4& x) { return (x[0] - x[1]) / 2; };
    const auto a = residuals_at(u, v, Vec4::Zero(), 1e-5, Vec4(1, 1, 0, 0));
    CHECK(a.method == ResidualMethod::AnalyticUFdV);
    CHECK(a.max_abs() <= 1e-12);
    Metric euclid;
    euclid.diag = {1, 1, 1, 1};
    CHECK(residuals_at(u, v, Vec4::Zero(), 1e-5, std::nullopt, euclid).res_uu == doctest::Approx(2.0));
}

TEST_CASE("2+1 residuals")
{
    const Field3 u = [](const Vec3& x) { return x[0] + x[2]; };
    const Field3 v = [](const Vec3& x) { return (x[0] - x[2]) / 2; };
    CHECK(residuals_at(u, v, Vec3(0.3, 1, -2), 1e-2).max_abs() <= 1e-12);
}

TEST_CASE("residuals of the trivial family fields")
{
    const auto fam = trivial();
    const Vec4 x(0, 0.6, 0, 0.8);
    const auto z = make_point(-0.6, 0, 1);
    const num::SolverConfig cfg;
    const auto r = residuals_at(family3d::u_field(fam, x, z, cfg), family3d::v_field(fam, x, z, cfg), x, 1e-5);
    CHECK(r.branch_flag);
    CHECK(r.max_abs() <= 1e-6);
}

TEST_CASE("hodograph image check on the trivial family")
{
    const auto fam = trivial();
    const Vec4 y(0.2, 0.6, 0, 0.8);
    const auto z = solve_y(fam, y, {});
    REQUIRE(z);
    CHECK(z->z1 == doctest::Approx(-0.6 * z->s / 0.8));
    CHECK(std::abs(z->z2) < 1e-12);

    const auto rep = intermediate_ycheck(fam, y);
    CHECK(rep.branch_flag);
    CHECK(std::abs(rep.eik4) <= 1e-6);
    CHECK(std::abs(rep.eik4a) <= 1e-6);
    CHECK(std::abs(rep.eik4b) <= 1e-6);

    CHECK_THROWS_AS(intermediate_ycheck(fam, Vec4(0.2, 0.6, 0, 0)), PreconditionError);
}

TEST_CASE("the first hodograph residual is exact on the analytic w gradient")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    for (int i = 0; i < 50; ++i) {
        const auto z = make_point(d(rng), d(rng), i % 2 ? 1 : -1);
        // spatial gradient of w at fixed z is (z1, z2, -s)
        CHECK(std::abs(z.z1 * z.z1 + z.z2 * z.z2 + z.s * z.s - 1) < 1e-15);
    }
}

TEST_CASE("a corrupted w field breaks the first residual")
{
    const auto fam = Family3D::from_text("1 + 0.2*z1", "0.1*z2^2");
    for (const Vec4 y : {Vec4(0.2, 0.6, 0.1, 0.8), Vec4(-0.3, 0.2, -0.4, 0.5)}) {
        YCheckOptions o;
        o.w_s_offset = 0.1;
        const auto rep = intermediate_ycheck(fam, y, o);
        REQUIRE(rep.branch_flag);
        const double s = rep.z.s;
        CHECK(std::abs(rep.eik4) == doctest::Approx(std::abs(2 * 0.1 * s + 0.01)).epsilon(1e-4));
        CHECK(std::abs(rep.eik4) > 0.01);
        CHECK(std::abs(intermediate_ycheck(fam, y).eik4) <= 1e-6);
    }
}

TEST_CASE("audit on the trivial family")
{
    AuditOptions o;
    o.samples = 10;
    const auto rep = closure_audit(trivial(), o);
    CHECK(rep.passed);
    CHECK(rep.variants.size() == 16);
    CHECK(rep.best().variants.constraint == family3d::ConstraintVariant::YDisplay);
    // ties resolve to the printed closures
    CHECK(rep.best().variants.p == family3d::PVariant::Printed);
    CHECK(rep.best().variants.r == family3d::RVariant::Printed);
    for (const auto& v : rep.variants) {
        CHECK(v.points > 0);
        if (v.variants.constraint == family3d::ConstraintVariant::YDisplay)
            CHECK(v.score() <= 1e-6);
        else
            CHECK(v.max_res_uu > 1.0);
    }
    CHECK(rep.seed == o.seed);
    CHECK(rep.samples == 10);
}

TEST_CASE("audit is deterministic and selects the minimum")
{
    const auto fam = Family3D::from_text("1 + 0.2*z1", "0.1*z2^2");
    AuditOptions o;
    o.samples = 8;
    const auto a = closure_audit(fam, o);
    const auto b = closure_audit(fam, o);
    REQUIRE(a.variants.size() == b.variants.size());
    CHECK(a.selected == b.selected);
    for (std::size_t i = 0; i < a.variants.size(); ++i) {
        CHECK(a.variants[i].max_res_uu == b.variants[i].max_res_uu);
        CHECK(a.variants[i].score() >= a.best().score());
    }
    CHECK(a.passed == (a.best().score() <= o.gate));
}

TEST_CASE("audit with k = 0 varies only constraint and p")
{
    const auto fam = Family3D::from_text("1 + 0.2*z1 - 0.1*z2", "0");
    AuditOptions o;
    o.samples = 6;
    const auto rep = closure_audit(fam, o);
    for (const auto& a : rep.variants)
        for (const auto& b : rep.variants)
            if (a.variants.constraint == b.variants.constraint && a.variants.p == b.variants.p)
                CHECK(a.max_res_vv == b.max_res_vv);
}

TEST_CASE("audit sampling box")
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const Vec4 x = draw_audit_point(rng);
        CHECK(x.head<3>().cwiseAbs().maxCoeff() <= 1.0);
        CHECK(x[3] >= 0.2);
        CHECK(x[3] <= 1.2);
    }
}

TEST_CASE("fresh points keep passing after the audit")
{
    const auto fam = Family3D::from_text("1.2 - 0.2*z2", "0");
    AuditOptions o;
    o.samples = 10;
    const auto rep = closure_audit(fam, o);
    REQUIRE(rep.passed);
    const auto chosen = fam.with_variants(rep.best().variants);
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int i = 0; i < 30 && checked < 10; ++i) {
        family3d::EvalOptions eo;
        eo.method = ResidualMethod::FdBoth;
        for (const auto& r : family3d::evaluate(chosen, draw_audit_point(rng), eo)) {
            if (!r.residuals.branch_flag)
                continue;
            ++checked;
            CHECK(r.residuals.max_abs() <= 1e-6);
        }
    }
    CHECK(checked >= 5);
}

TEST_CASE("fiber oracle on the trivial family")
{
    for (const auto z : {make_point(0, 0, 1), make_point(0.3, -0.4, 1), make_point(-0.5, 0.1, 1)}) {
        const auto c = fiber_derive_closure(trivial(), z);
        CHECK(c.p == doctest::Approx(0.5).epsilon(1e-5));
        CHECK(std::abs(c.r_z1) < 1e-5);
        CHECK(std::abs(c.r_z2) < 1e-5);
        CHECK(c.fit_residual <= 1e-8);
        CHECK(c.conditioning > 0);
    }
}

TEST_CASE("fiber oracle on linear g")
{
    for (const auto& [a, b] : {std::pair{1.0, 0.3}, std::pair{1.5, -0.5}}) {
        const auto fam = Family3D::from_text(std::to_string(a) + " + " + std::to_string(b) + "*z1", "0");
        const auto c = fiber_derive_closure(fam, make_point(0, 0, 1));
        CHECK(std::abs(c.p - 0.5 * (a * a - b * b)) < 1e-4);
        CHECK(c.fit_residual <= 1e-8);
    }
    CHECK_THROWS_AS(fiber_derive_closure(trivial(), make_point(0, 0, 1), FiberOptions{4}), PreconditionError);
}

TEST_CASE("fiber points satisfy the constraints")
{
    const auto fam = Family3D::from_text("1 + 0.2*z1", "0.1*z2^2");
    const auto z = make_point(0.2, -0.3, 1);
    const Vec4 x = fiber_point(fam, z, 0.7, -0.4);
    CHECK(x[3] == 0.7);
    CHECK(fam.envelope_constraints(x, z).norm() < 1e-13);
    CHECK(fam.u_of(x, z) == doctest::Approx(-0.4).epsilon(1e-13));
}

TEST_CASE("fiber oracle agrees with the selected closure")
{
    const auto fam = Family3D::from_text("1.2 - 0.2*z2", "0");
    AuditOptions o;
    o.samples = 8;
    const auto rep = closure_audit(fam, o);
    REQUIRE(rep.passed);
    const auto chosen = fam.with_variants(rep.best().variants);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    for (int i = 0; i < 5; ++i) {
        const auto z = make_point(d(rng), d(rng), 1);
        const auto c = fiber_derive_closure(chosen, z);
        CHECK(std::abs(c.p - chosen.closure_p(z)) < 1e-4);
        const Vec2 rg = chosen.closure_r_gradient(z, chosen.variants().r);
        CHECK(std::abs(c.r_z1 - rg[0]) < 1e-4);
        CHECK(std::abs(c.r_z2 - rg[1]) < 1e-4);
    }
}
