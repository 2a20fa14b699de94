#pragma once

#include "eikonal/expr.hpp"
#include "eikonal/numkernel.hpp"
#include "eikonal/residuals.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Rank-2 parametric solutions of the coupled eikonal system in 3+1
/// dimensions, generated by two functions g(z1,z2), k(z1,z2) on the open
/// unit disk:
///
///   u = (x1 z1 + x2 z2 - x3 s - x0 + k) / g,      s = +-sqrt(1 - z1^2 - z2^2)
///   v = g x3 / s + p u + r
///
/// with (z1,z2) selected at each spacetime point by two envelope
/// constraints. The closure functions p, r and the constraint form come in
/// several variants so that the audit in verify can arbitrate between them.
namespace eikonal::family3d {

using num::Vec2;
using num::Vec4;

enum class ConstraintVariant { YDisplay, XDisplay };
enum class PVariant { Printed, NoCross };
/// Printed: r_z1 = -k11 a1, r_z2 = -k12 a2 with a_i = z_i g + s^2 g_zi.
/// Sym: the symmetric completion -K a. Diag: -diag(K) a.
/// Envelope: K q with q = grad g + z (g - z.grad g).
enum class RVariant { Printed, Sym, Diag, Envelope };
enum class BranchMode { Auto, Positive, Negative, Both };

std::string to_string(ConstraintVariant v);
std::string to_string(PVariant v);
std::string to_string(RVariant v);
std::string to_string(BranchMode m);
std::optional<ConstraintVariant> parse_constraint_variant(std::string_view s);
std::optional<PVariant> parse_p_variant(std::string_view s);
std::optional<RVariant> parse_r_variant(std::string_view s);
std::optional<BranchMode> parse_branch_mode(std::string_view s);

inline constexpr ConstraintVariant kConstraintVariants[] = {ConstraintVariant::YDisplay,
    ConstraintVariant::XDisplay};
inline constexpr PVariant kPVariants[] = {PVariant::Printed, PVariant::NoCross};
inline constexpr RVariant kRVariants[] = {RVariant::Printed, RVariant::Sym, RVariant::Diag,
    RVariant::Envelope};

struct Variants {
    ConstraintVariant constraint = ConstraintVariant::YDisplay;
    PVariant p = PVariant::Printed;
    RVariant r = RVariant::Printed;

    bool operator==(const Variants&) const = default;
};

std::string to_string(const Variants& v);

struct FamilyOptions {
    Variants variants;
    double r_base = 0.0;
    double g_min = 0.25;
};

/// A point of the parameter disk together with its branch of s.
struct ParamPoint {
    double z1 = 0.0;
    double z2 = 0.0;
    double s = 1.0;

    Vec2 z() const { return {z1, z2}; }
    int branch() const { return s > 0.0 ? 1 : -1; }
};

/// s = branch * sqrt(1 - z1^2 - z2^2); DomainError unless z is strictly inside the disk.
double s_of(double z1, double z2, int branch);
ParamPoint make_point(double z1, double z2, int branch);

/// g, k and their derivatives up to second order at one z.
struct Generators {
    double g, g1, g2, g11, g12, g22;
    double k, k1, k2, k11, k12, k22;
};

class Family3D {
public:
    /// Validates |g| >= g_min on the subdisk z1^2+z2^2 <= 0.9 (21x21 grid) and
    /// that g, k are twice differentiable there. Throws SingularFamilyError or
    /// DomainError.
    Family3D(expr::Expression g, expr::Expression k, FamilyOptions options = {});

    static Family3D from_text(std::string_view g, std::string_view k, FamilyOptions options = {});

    const expr::Expression& g() const { return g_; }
    const expr::Expression& k() const { return k_; }
    const FamilyOptions& options() const { return options_; }
    const Variants& variants() const { return options_.variants; }

    /// Same generating functions, other variants. No re-validation.
    Family3D with_variants(const Variants& v) const;

    Generators generators(double z1, double z2) const;

    double u_of(const Vec4& x, const ParamPoint& z) const;
    Vec2 envelope_constraints(const Vec4& x, const ParamPoint& z) const;
    /// Constraints and their z-Jacobian, with u eliminated.
    num::Eval2 constraints_with_jacobian(const Vec4& x, const ParamPoint& z) const;
    /// d z / d x along the branch through (x, z), by the implicit function theorem.
    Eigen::Matrix<double, 2, 4> parameter_gradient(const Vec4& x, const ParamPoint& z) const;

    double closure_p(const ParamPoint& z) const { return closure_p(z, options_.variants.p); }
    double closure_p(const ParamPoint& z, PVariant variant) const;
    Vec2 closure_r_gradient(const ParamPoint& z, RVariant variant) const;
    double closure_r(const ParamPoint& z) const { return closure_r(z, options_.variants.r); }
    /// r_base plus the line integral of the gradient along (0,0)->(z1,0)->(z1,z2).
    double closure_r(const ParamPoint& z, RVariant variant) const;

    double v_of(const Vec4& x, const ParamPoint& z, double u) const;
    double v_of(const Vec4& x, const ParamPoint& z, double u, PVariant p, RVariant r) const;

    /// (-1, z1, z2, -s) / g, the gradient of u on the fiber of z.
    Vec4 analytic_grad_u(const ParamPoint& z) const;

    /// Max |d r_z1/d z2 - d r_z2/d z1| by central differences on an n x n
    /// grid over [-half_width, half_width]^2.
    double mixed_partial_defect(RVariant variant, int n = 5, double half_width = 0.6,
        double h = 1e-4) const;

    /// All roots of the constraints at x on one s-branch.
    std::vector<num::SolveOutcome> solve_branch(const Vec4& x, int branch,
        const num::SolverConfig& config) const;

    /// Re-solves z at x starting from a known root (x_center, z_center). Seeds
    /// Newton with the first-order prediction and rejects roots further than
    /// 10 dedupe distances from it (branch jump).
    std::optional<ParamPoint> track(const Vec4& x, const Vec4& x_center, const ParamPoint& z_center,
        const num::SolverConfig& config) const;

private:
    expr::Expression g_;
    expr::Expression k_;
    FamilyOptions options_;
};

struct EvalOptions {
    num::SolverConfig solver;
    BranchMode branches = BranchMode::Auto;
    double fd_step = 1e-5;
    verify::ResidualMethod method = verify::ResidualMethod::AnalyticUFdV;
    double x3_min = 1e-6;
};

struct EvalResult {
    Vec4 x = Vec4::Zero();
    ParamPoint z;
    double u = 0.0;
    double v = 0.0;
    Vec4 grad_u = Vec4::Zero();
    Vec4 grad_v = Vec4::Zero();
    verify::ResidualReport residuals;
    num::SolveOutcome solver;
    Variants variants;
};

/// A converged root of the constraints together with its s-branch.
struct BranchRoot {
    int branch = 1;
    num::SolveOutcome outcome;
};

/// The roots `evaluate` would use at x, honouring the branch mode.
/// Throws PreconditionError when |x3| < x3_min.
std::vector<BranchRoot> find_roots(const Family3D& family, const Vec4& x, const EvalOptions& options = {});

/// u, v, gradients and residuals on one known root.
EvalResult evaluate_root(const Family3D& family, const Vec4& x, const BranchRoot& root,
    const EvalOptions& options = {});

/// u, v and their fields at x for every converged branch, sorted by |res_uu|.
/// Throws PreconditionError when |x3| < x3_min.
std::vector<EvalResult> evaluate(const Family3D& family, const Vec4& x, const EvalOptions& options = {});

/// Spacetime fields of one branch, re-solving z around (x_center, z_center).
/// They return NaN where tracking fails.
verify::Field4 u_field(const Family3D& family, const Vec4& x_center, const ParamPoint& z_center,
    const num::SolverConfig& config);
verify::Field4 v_field(const Family3D& family, const Vec4& x_center, const ParamPoint& z_center,
    const num::SolverConfig& config);

} // namespace eikonal::family3d
