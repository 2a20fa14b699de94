#pragma once

#include "eikonal/family3d.hpp"
#include "eikonal/residuals.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace eikonal::verify {

using family3d::Family3D;
using family3d::ParamPoint;
using family3d::Variants;

// ---------------------------------------------------------------------------
// Hodograph image: fields w(y), v(y) with y0 playing the role of u.

struct YCheckOptions {
    num::SolverConfig solver;
    double fd_step = 1e-5;
    /// Test hook: adds a constant to s inside w only.
    double w_s_offset = 0.0;
};

struct YCheckReport {
    double eik4 = 0.0;          ///< |grad w|^2 - 1 (spatial, Euclidean)
    double eik4a = 0.0;         ///< |grad v|^2 - 2 v_y0
    double eik4a_printed = 0.0; ///< |grad v|^2 - v_y0
    double eik4b = 0.0;         ///< grad v . grad w - w_y0
    bool branch_flag = false;   ///< false when z could not be solved on the stencil
    ParamPoint z;
};

/// z solving the y-space constraints at y on the s-branch of sign(y3).
std::optional<ParamPoint> solve_y(const Family3D& family, const Vec4& y, const num::SolverConfig& cfg);

double w_of(const Family3D& family, const Vec4& y, const ParamPoint& z, double w_s_offset = 0.0);
double v_of_y(const Family3D& family, const Vec4& y, const ParamPoint& z);

/// Throws PreconditionError when y3 = 0.
YCheckReport intermediate_ycheck(const Family3D& family, const Vec4& y, const YCheckOptions& options = {});

// ---------------------------------------------------------------------------
// Closure audit.

struct AuditOptions {
    int samples = 40;
    std::uint64_t seed = 12345;
    num::SolverConfig solver;
    double fd_step = 1e-5;
    double gate = 1e-6;
    /// Scores that both sit below this floor count as a tie.
    double tie_floor = 1e-9;
    int max_draws_per_sample = 25;
};

struct VariantAggregate {
    Variants variants;
    double max_res_uu = 0.0;
    double max_res_vv = 0.0;
    double max_res_uv = 0.0;
    double mixed_defect = 0.0;
    int points = 0;

    /// max of the three residual aggregates (infinite without points).
    double score() const;
};

struct AuditReport {
    std::string family;
    std::vector<VariantAggregate> variants;
    std::size_t selected = 0;
    std::uint64_t seed = 0;
    int samples = 0;
    bool passed = false;

    const VariantAggregate& best() const { return variants.at(selected); }
};

/// Uniform draw from the audit box [-1,1]^3 x [0.2,1.2].
Vec4 draw_audit_point(std::mt19937_64& rng);

/// The sample points, shared by every variant combination using one constraint form.
std::vector<Vec4> audit_points(const Family3D& family, family3d::ConstraintVariant constraint,
    const AuditOptions& options);

/// Throws NumericalError when no combination converges anywhere.
AuditReport closure_audit(const Family3D& family, const AuditOptions& options = {});

// ---------------------------------------------------------------------------
// Fiber oracle for the closure values at one parameter point.

struct FiberClosure {
    double p = 0.0;
    double p_z1 = 0.0;
    double p_z2 = 0.0;
    double r_z1 = 0.0;
    double r_z2 = 0.0;
    double conditioning = 0.0; ///< 2-norm condition number of the stacked gradient design
    double fit_residual = 0.0; ///< max |v.v| over the samples at the solution
    int points = 0;
};

struct FiberOptions {
    int n_points = 12;
    std::uint64_t seed = 7;
    num::SolverConfig solver;
    double fd_step = 1e-5;
    double max_condition = 1e12;
};

/// Samples the fiber of z_star and fits (p, p_z1, p_z2, r_z1, r_z2) so that
/// v_mu v_mu = 0 there. Throws PreconditionError for n_points < 5 and
/// NumericalError when the sampling is rank deficient.
FiberClosure fiber_derive_closure(const Family3D& family, const ParamPoint& z_star,
    const FiberOptions& options = {});

/// A point x on the fiber of z_star with the given x3 and u.
Vec4 fiber_point(const Family3D& family, const ParamPoint& z_star, double x3, double u);

/// v built from a fiber closure, Taylor-expanded around z_star.
Field4 fiber_v_field(const Family3D& family, const ParamPoint& z_star, const FiberClosure& c,
    const Vec4& x_center, const num::SolverConfig& cfg);

} // namespace eikonal::verify
