#include "eikonal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace eikonal::verify {

double VariantAggregate::score() const
{
    if (points == 0)
        return std::numeric_limits<double>::infinity();
    return std::max({max_res_uu, max_res_vv, max_res_uv});
}

Vec4 draw_audit_point(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> depth(0.2, 1.2);
    Vec4 x;
    x[0] = unit(rng);
    x[1] = unit(rng);
    x[2] = unit(rng);
    x[3] = depth(rng);
    return x;
}

namespace {

struct AuditSample {
    Vec4 x;
    std::vector<family3d::BranchRoot> roots;
};

std::vector<AuditSample> audit_samples(const Family3D& family, family3d::ConstraintVariant constraint,
    const AuditOptions& options)
{
    Variants v = family.variants();
    v.constraint = constraint;
    const Family3D f = family.with_variants(v);
    family3d::EvalOptions eo;
    eo.solver = options.solver;
    std::mt19937_64 rng(options.seed);
    std::vector<AuditSample> samples;
    const long max_draws = static_cast<long>(options.samples) * options.max_draws_per_sample;
    for (long draw = 0; draw < max_draws && static_cast<int>(samples.size()) < options.samples; ++draw) {
        const Vec4 x = draw_audit_point(rng);
        auto roots = family3d::find_roots(f, x, eo);
        if (!roots.empty())
            samples.push_back({x, std::move(roots)});
    }
    return samples;
}

} // namespace

std::vector<Vec4> audit_points(const Family3D& family, family3d::ConstraintVariant constraint,
    const AuditOptions& options)
{
    std::vector<Vec4> points;
    for (const auto& s : audit_samples(family, constraint, options))
        points.push_back(s.x);
    return points;
}

AuditReport closure_audit(const Family3D& family, const AuditOptions& options)
{
    if (options.samples < 1)
        throw PreconditionError("samples must be >= 1");
    AuditReport report;
    report.family = "g = " + family.g().render() + ", k = " + family.k().render();
    report.seed = options.seed;
    report.samples = options.samples;

    std::map<family3d::RVariant, double> defects;
    for (auto r : family3d::kRVariants)
        defects[r] = family.mixed_partial_defect(r);

    family3d::EvalOptions eo;
    eo.solver = options.solver;
    eo.fd_step = options.fd_step;
    eo.method = ResidualMethod::FdBoth;

    for (auto c : family3d::kConstraintVariants) {
        const std::vector<AuditSample> samples = audit_samples(family, c, options);
        for (auto p : family3d::kPVariants) {
            for (auto r : family3d::kRVariants) {
                VariantAggregate agg;
                agg.variants = {c, p, r};
                agg.mixed_defect = defects[r];
                const Family3D f = family.with_variants(agg.variants);
                for (const AuditSample& sample : samples) {
                    bool counted = false;
                    for (const auto& root : sample.roots) {
                        const auto res = family3d::evaluate_root(f, sample.x, root, eo);
                        if (!res.residuals.branch_flag)
                            continue;
                        agg.max_res_uu = std::max(agg.max_res_uu, std::abs(res.residuals.res_uu));
                        agg.max_res_vv = std::max(agg.max_res_vv, std::abs(res.residuals.res_vv));
                        agg.max_res_uv = std::max(agg.max_res_uv, std::abs(res.residuals.res_uv_minus_1));
                        counted = true;
                    }
                    agg.points += counted ? 1 : 0;
                }
                report.variants.push_back(agg);
            }
        }
    }

    bool any = false;
    for (std::size_t i = 0; i < report.variants.size(); ++i) {
        const double sc = report.variants[i].score();
        if (!std::isfinite(sc))
            continue;
        if (!any) {
            report.selected = i;
            any = true;
            continue;
        }
        const double best = report.variants[report.selected].score();
        const bool tie = sc <= options.tie_floor && best <= options.tie_floor;
        if (!tie && sc < best)
            report.selected = i;
    }
    if (!any)
        throw NumericalError("closure audit: no variant combination converged at any sample point ("
            + report.family + ")");
    report.passed = report.best().score() <= options.gate;
    return report;
}

} // namespace eikonal::verify
