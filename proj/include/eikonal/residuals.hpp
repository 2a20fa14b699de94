#pragma once

#include "eikonal/numkernel.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace eikonal::verify {

using num::Vec3;
using num::Vec2;
using num::Vec4;

enum class ResidualMethod { AnalyticUFdV, FdBoth };

std::string to_string(ResidualMethod m);

/// Residuals of u_mu u_mu = 0, v_mu v_mu = 0 and u_mu v_mu = 1 at one point.
struct ResidualReport {
    double res_uu = 0.0;
    double res_vv = 0.0;
    double res_uv_minus_1 = 0.0;
    ResidualMethod method = ResidualMethod::FdBoth;
    double fd_step = 0.0;
    /// False when a stencil evaluation failed or jumped branch; the
    /// residual fields are then NaN.
    bool branch_flag = true;

    double max_abs() const;
};

/// Diagonal metric used for index contractions. The default is Minkowski
/// (+,-,-,-); other signatures exist only for fault-injection checks.
struct Metric {
    std::array<double, 4> diag{1.0, -1.0, -1.0, -1.0};

    double dot(const Vec4& a, const Vec4& b) const
    {
        return diag[0] * a[0] * b[0] + diag[1] * a[1] * b[1] + diag[2] * a[2] * b[2]
            + diag[3] * a[3] * b[3];
    }
};

/// A scalar field over spacetime. Returning NaN (or throwing eikonal::Error)
/// marks the point as not evaluable on the current branch.
using Field4 = std::function<double(const Vec4&)>;
using Field3 = std::function<double(const Vec3&)>;

/// Residuals from central-difference gradients with per-component steps
/// h_mu = h (1 + |x_mu|). When `analytic_grad_u` is given it replaces the
/// FD gradient of u.
ResidualReport residuals_at(const Field4& u, const Field4& v, const Vec4& x, double h,
    const std::optional<Vec4>& analytic_grad_u = std::nullopt, const Metric& metric = {});

/// The 2+1D analogue, signature (+,-,-).
ResidualReport residuals_at(const Field3& u, const Field3& v, const Vec3& x, double h);

struct Gradients4 {
    Vec4 grad_u;
    Vec4 grad_v;
};

/// Same as residuals_at but also returns the gradients used.
ResidualReport residuals_with_gradients(const Field4& u, const Field4& v, const Vec4& x, double h,
    const std::optional<Vec4>& analytic_grad_u, const Metric& metric, Gradients4& out);

} // namespace eikonal::verify
