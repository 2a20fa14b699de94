#pragma once

#include "eikonal/expr.hpp"
#include "eikonal/numkernel.hpp"
#include "eikonal/residuals.hpp"

#include <string_view>
#include <vector>

/// Rank-1 solutions of the coupled system in 2+1 dimensions, generated by
/// g(z), k(z), h(z) on (-1, 1). The parameter z is selected at each point
/// (x0, x1, x2) by a scalar implicit equation.
namespace eikonal::family2d {

using num::Vec3;

struct Family2DOptions {
    double r_base = 0.0;
    double gp_min = 0.25;
};

struct Closure2 {
    double p = 0.0;
    double r = 0.0;
};

class Family2D {
public:
    /// Validates |g'| >= gp_min on 41 nodes of [-0.9, 0.9]. Throws
    /// SingularFamilyError or DomainError.
    Family2D(expr::Expression g, expr::Expression k, expr::Expression h, Family2DOptions options = {});

    static Family2D from_text(std::string_view g, std::string_view k, std::string_view h,
        Family2DOptions options = {});

    const expr::Expression& g() const { return g_; }
    const expr::Expression& k() const { return k_; }
    const expr::Expression& h() const { return h_; }
    const Family2DOptions& options() const { return options_; }

    double implicit2(const Vec3& x, double z) const;
    double u2_of(const Vec3& x, double z) const;
    double p_of(double z) const;
    double r_prime(double z) const;
    /// p directly, r = r_base + integral of r' from 0 to z.
    Closure2 closure2(double z) const;
    double v2_of(const Vec3& x, double z, double u) const;

private:
    expr::Expression g_;
    expr::Expression k_;
    expr::Expression h_;
    Family2DOptions options_;
};

struct Eval2Options {
    num::SolverConfig solver;
    int scan_nodes = 400;
    double edge = 1e-6;
    double fd_step = 1e-5;
};

struct EvalResult2 {
    Vec3 x = Vec3::Zero();
    double z = 0.0;
    double u = 0.0;
    double v = 0.0;
    Vec3 grad_u = Vec3::Zero();
    Vec3 grad_v = Vec3::Zero();
    verify::ResidualReport residuals;
    num::ScalarOutcome solver;
};

/// Every branch at x, in increasing z. Empty when implicit2 has no root.
std::vector<EvalResult2> evaluate2(const Family2D& family, const Vec3& x, const Eval2Options& options = {});

/// z re-solved near z_center at x, by a local bracket and Brent. NaN on failure.
double track2(const Family2D& family, const Vec3& x, double z_center, const Eval2Options& options);

verify::Field3 u2_field(const Family2D& family, double z_center, const Eval2Options& options);
verify::Field3 v2_field(const Family2D& family, double z_center, const Eval2Options& options);

} // namespace eikonal::family2d
