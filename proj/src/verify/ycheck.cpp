#include "eikonal/verify.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace eikonal::verify {

namespace {

double sign_of(family3d::ConstraintVariant v) { return v == family3d::ConstraintVariant::YDisplay ? 1.0 : -1.0; }

num::System2 y_system(const Family3D& f, const Vec4& y, int branch)
{
    return [&f, y, branch](const Vec2& zz) -> std::optional<num::Eval2> {
        try {
            const ParamPoint z = family3d::make_point(zz[0], zz[1], branch);
            const family3d::Generators G = f.generators(z.z1, z.z2);
            const double sg = sign_of(f.variants().constraint);
            const double s = z.s;
            const double zi[2] = {z.z1, z.z2};
            const double gi[2] = {G.g1, G.g2};
            const double ki[2] = {G.k1, G.k2};
            const double gij[2][2] = {{G.g11, G.g12}, {G.g12, G.g22}};
            const double kij[2][2] = {{G.k11, G.k12}, {G.k12, G.k22}};
            num::Eval2 out;
            for (int i = 0; i < 2; ++i) {
                out.value[i] = y[1 + i] + sg * y[3] * zi[i] / s - gi[i] * y[0] + ki[i];
                for (int j = 0; j < 2; ++j) {
                    const double dzs = (i == j ? 1.0 / s : 0.0) + zi[i] * zi[j] / (s * s * s);
                    out.jacobian(i, j) = sg * y[3] * dzs - gij[i][j] * y[0] + kij[i][j];
                }
            }
            return out;
        } catch (const Error&) {
            return std::nullopt;
        }
    };
}

bool in_disk(const Vec2& z) { return z.squaredNorm() < 1.0; }

std::optional<ParamPoint> track_y(const Family3D& f, const Vec4& y, const ParamPoint& center,
    const num::SolverConfig& cfg)
{
    const num::SolveOutcome o = num::newton2(y_system(f, y, center.branch()), center.z(), cfg, in_disk);
    if (!o.converged || (o.root - center.z()).norm() > 1e-2)
        return std::nullopt;
    return family3d::make_point(o.root[0], o.root[1], center.branch());
}

} // namespace

std::optional<ParamPoint> solve_y(const Family3D& family, const Vec4& y, const num::SolverConfig& cfg)
{
    const int branch = y[3] < 0.0 ? -1 : 1;
    const auto roots = num::solve_all_2d(y_system(family, y, branch), in_disk, cfg);
    if (roots.empty())
        return std::nullopt;
    return family3d::make_point(roots.front().root[0], roots.front().root[1], branch);
}

double w_of(const Family3D& family, const Vec4& y, const ParamPoint& z, double w_s_offset)
{
    const family3d::Generators G = family.generators(z.z1, z.z2);
    return y[1] * z.z1 + y[2] * z.z2 - y[3] * (z.s + w_s_offset) - G.g * y[0] + G.k;
}

double v_of_y(const Family3D& family, const Vec4& y, const ParamPoint& z)
{
    const family3d::Generators G = family.generators(z.z1, z.z2);
    return G.g * y[3] / z.s + family.closure_p(z) * y[0] + family.closure_r(z);
}

YCheckReport intermediate_ycheck(const Family3D& family, const Vec4& y, const YCheckOptions& options)
{
    if (y[3] == 0.0)
        throw PreconditionError("intermediate_ycheck needs y3 != 0");
    YCheckReport report;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.eik4 = report.eik4a = report.eik4a_printed = report.eik4b = nan;
    const auto center = solve_y(family, y, options.solver);
    if (!center)
        return report;
    report.z = *center;

    auto field = [&](bool want_w) {
        return [&, want_w](const Vec4& yy) {
            const auto z = track_y(family, yy, *center, options.solver);
            if (!z)
                return nan;
            return want_w ? w_of(family, yy, *z, options.w_s_offset) : v_of_y(family, yy, *z);
        };
    };
    const Vec4 steps = num::default_fd_steps<4>(y, options.fd_step);
    Vec4 gw, gv;
    try {
        gw = num::fd_gradient<4>(field(true), y, steps);
        gv = num::fd_gradient<4>(field(false), y, steps);
    } catch (const Error&) {
        return report;
    }
    const auto sp = [](const Vec4& a, const Vec4& b) { return a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; };
    report.eik4 = sp(gw, gw) - 1.0;
    report.eik4a = sp(gv, gv) - 2.0 * gv[0];
    report.eik4a_printed = sp(gv, gv) - gv[0];
    report.eik4b = sp(gv, gw) - gw[0];
    report.branch_flag = true;
    return report;
}

} // namespace eikonal::verify
