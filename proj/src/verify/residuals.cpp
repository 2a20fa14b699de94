#include "eikonal/residuals.hpp"

#include <algorithm>
#include <limits>

namespace eikonal::verify {

std::string to_string(ResidualMethod m)
{
    return m == ResidualMethod::AnalyticUFdV ? "analytic_u_fd_v" : "fd_both";
}

double ResidualReport::max_abs() const
{
    if (!branch_flag)
        return std::numeric_limits<double>::infinity();
    return std::max({std::abs(res_uu), std::abs(res_vv), std::abs(res_uv_minus_1)});
}

namespace {

template <int N>
std::optional<Eigen::Matrix<double, N, 1>> safe_gradient(
    const std::function<double(const Eigen::Matrix<double, N, 1>&)>& f,
    const Eigen::Matrix<double, N, 1>& x, const Eigen::Matrix<double, N, 1>& steps)
{
    try {
        return num::fd_gradient<N>(f, x, steps);
    } catch (const Error&) {
        return std::nullopt;
    }
}

ResidualReport flagged(ResidualMethod method, double h)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return ResidualReport{nan, nan, nan, method, h, false};
}

} // namespace

ResidualReport residuals_with_gradients(const Field4& u, const Field4& v, const Vec4& x, double h,
    const std::optional<Vec4>& analytic_grad_u, const Metric& metric, Gradients4& out)
{
    const ResidualMethod method = analytic_grad_u ? ResidualMethod::AnalyticUFdV : ResidualMethod::FdBoth;
    const Vec4 steps = num::default_fd_steps<4>(x, h);
    std::optional<Vec4> gu = analytic_grad_u;
    if (!gu)
        gu = safe_gradient<4>(u, x, steps);
    std::optional<Vec4> gv = safe_gradient<4>(v, x, steps);
    if (!gu || !gv)
        return flagged(method, h);
    out.grad_u = *gu;
    out.grad_v = *gv;
    return ResidualReport{metric.dot(*gu, *gu), metric.dot(*gv, *gv), metric.dot(*gu, *gv) - 1.0, method,
        h, true};
}

ResidualReport residuals_at(const Field4& u, const Field4& v, const Vec4& x, double h,
    const std::optional<Vec4>& analytic_grad_u, const Metric& metric)
{
    Gradients4 g;
    return residuals_with_gradients(u, v, x, h, analytic_grad_u, metric, g);
}

ResidualReport residuals_at(const Field3& u, const Field3& v, const Vec3& x, double h)
{
    const Vec3 steps = num::default_fd_steps<3>(x, h);
    auto gu = safe_gradient<3>(u, x, steps);
    auto gv = safe_gradient<3>(v, x, steps);
    if (!gu || !gv)
        return flagged(ResidualMethod::FdBoth, h);
    return ResidualReport{num::minkowski_dot(*gu, *gu), num::minkowski_dot(*gv, *gv),
        num::minkowski_dot(*gu, *gv) - 1.0, ResidualMethod::FdBoth, h, true};
}

} // namespace eikonal::verify
