#include "eikonal/numkernel.hpp"

#include <algorithm>
#include <limits>

namespace eikonal::num {

// Brent's method (the classic zeroin): inverse quadratic interpolation or
// secant steps, falling back to bisection, with b the best iterate and
// [b, c] always bracketing the root.
ScalarOutcome brent1(const std::function<double(double)>& f, double a, double b,
    const SolverConfig& config, const BracketObserver& observe)
{
    ScalarOutcome out;
    double fa = f(a), fb = f(b);
    if (fa == 0.0 || fb == 0.0) {
        out.root = fa == 0.0 ? a : b;
        out.converged = true;
        out.reason = StopReason::ResidualTolerance;
        return out;
    }
    if (!(fa * fb < 0.0) || !std::isfinite(fa) || !std::isfinite(fb)) {
        out.root = a;
        out.final_residual = std::numeric_limits<double>::infinity();
        out.reason = StopReason::InvalidBracket;
        return out;
    }

    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < std::max(config.max_iterations, 200); ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        if (observe)
            observe(std::min(b, c), std::max(b, c));
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * config.tol_step;
        const double xm = 0.5 * (c - b);
        if (std::abs(fb) <= config.tol_residual || std::abs(c - b) <= config.tol_step || fb == 0.0) {
            out.root = b;
            out.final_residual = std::abs(fb);
            out.converged = true;
            out.iterations = it;
            out.reason = std::abs(fb) <= config.tol_residual ? StopReason::ResidualTolerance
                                                             : StopReason::StepTolerance;
            return out;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0)
                q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if (!std::isfinite(fb)) {
            out.root = b;
            out.final_residual = std::numeric_limits<double>::infinity();
            out.iterations = it + 1;
            out.reason = StopReason::EvaluationFailure;
            return out;
        }
    }
    out.root = b;
    out.final_residual = std::abs(fb);
    out.reason = StopReason::MaxIterations;
    return out;
}

std::vector<Bracket> scan_brackets(const std::function<double(double)>& f, double a, double b, int n)
{
    if (n < 2)
        throw PreconditionError("scan_brackets needs n >= 2");
    std::vector<double> xs(n + 1), fs(n + 1);
    for (int i = 0; i <= n; ++i) {
        xs[i] = i == n ? b : a + (b - a) * i / n;
        fs[i] = f(xs[i]);
    }
    std::vector<Bracket> out;
    for (int i = 0; i <= n; ++i) {
        if (!std::isfinite(fs[i]))
            continue;
        if (fs[i] == 0.0) {
            out.push_back({xs[i], xs[i]});
            continue;
        }
        if (i < n && std::isfinite(fs[i + 1]) && fs[i] * fs[i + 1] < 0.0)
            out.push_back({xs[i], xs[i + 1]});
    }
    return out;
}

Vec4 fd_gradient4(const std::function<double(const Vec4&)>& f, const Vec4& x, double h)
{
    return fd_gradient<4>(f, x, Vec4::Constant(h));
}

} // namespace eikonal::num
