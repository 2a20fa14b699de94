#include "eikonal/numkernel.hpp"

#include <array>

namespace eikonal::num {

namespace {

// 8-point Gauss-Legendre nodes and weights on [-1,1] (positive half).
constexpr std::array<double, 4> kNodes = {0.1834346424956498, 0.5255324099163290,
    0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kWeights = {0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double panel(const std::function<double(double)>& f, double a, double b)
{
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < kNodes.size(); ++i)
        sum += kWeights[i] * (f(mid - half * kNodes[i]) + f(mid + half * kNodes[i]));
    return sum * half;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, double tol,
    int depth)
{
    const double mid = 0.5 * (a + b);
    const double left = panel(f, a, mid), right = panel(f, mid, b);
    const double split = left + right;
    if (!std::isfinite(split))
        throw NumericalError("quadrature: non-finite integrand on [" + std::to_string(a) + ", "
            + std::to_string(b) + "]");
    if (std::abs(split - whole) <= tol)
        return split;
    if (depth == 0)
        throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", "
            + std::to_string(b) + "]");
    return adapt(f, a, mid, left, 0.5 * tol, depth - 1) + adapt(f, mid, b, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol)
{
    if (a == b)
        return 0.0;
    return adapt(f, a, b, panel(f, a, b), abs_tol, 40);
}

} // namespace eikonal::num
