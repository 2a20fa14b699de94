#pragma once

#include "eikonal/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace eikonal::num {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

struct SolverConfig {
    double tol_residual = 1e-11;  ///< absolute, on constraint values
    double tol_step = 1e-14;      ///< on the parameter update norm
    int max_iterations = 60;
    double damping = 0.5;         ///< backtracking factor in (0,1)
    int max_backtracks = 20;
    double seed_grid_radius = 0.95;
    int seed_grid_count = 7;      ///< seeds per axis
    double dedupe_distance = 1e-6;
    double rcond_min = 1e-12;     ///< reciprocal condition below which a seed is abandoned
    double boundary_margin = 1e-9;

    /// Throws PreconditionError naming the first invalid field.
    void validate() const;
};

enum class StopReason {
    ResidualTolerance,
    StepTolerance,
    MaxIterations,
    SingularJacobian,
    DomainExit,
    EvaluationFailure,
    NoDecrease,
    InvalidBracket,
};

std::string to_string(StopReason r);

struct SolveOutcome {
    Vec2 root = Vec2::Zero();
    bool converged = false;
    int iterations = 0;
    double final_residual_norm = 0.0;
    Vec2 seed = Vec2::Zero();
    StopReason reason = StopReason::MaxIterations;
};

struct ScalarOutcome {
    double root = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
    StopReason reason = StopReason::MaxIterations;
};

struct Eval2 {
    Vec2 value;
    Mat2 jacobian;
};

/// A 2x2 system with Jacobian. Returns nullopt where it cannot be evaluated.
using System2 = std::function<std::optional<Eval2>(const Vec2&)>;
/// Open admissible region for the unknowns.
using Domain2 = std::function<bool(const Vec2&)>;

/// 1-norm reciprocal condition number of a 2x2 matrix (0 when singular).
double rcond(const Mat2& m);

/// Damped Newton with backtracking on ||F||. Never returns a point for which
/// `domain` is false; a trial step leaving the domain is cut back to the
/// boundary (minus the configured margin).
SolveOutcome newton2(const System2& f, const Vec2& seed, const SolverConfig& config,
    const Domain2& domain = {});

/// Uniform seed grid of seed_grid_count^2 points inside the disk of radius
/// seed_grid_radius, filtered by `domain`.
std::vector<Vec2> seed_grid(const Domain2& domain, const SolverConfig& config);

/// Multistart Newton over seed_grid(). Converged roots closer than
/// dedupe_distance are merged; the result is sorted by residual norm.
std::vector<SolveOutcome> solve_all_2d(const System2& f, const Domain2& domain,
    const SolverConfig& config);

using BracketObserver = std::function<void(double lo, double hi)>;

/// Brent's method on a sign-changing bracket. `observe` (if set) sees the
/// bracket at every iteration.
ScalarOutcome brent1(const std::function<double(double)>& f, double a, double b,
    const SolverConfig& config, const BracketObserver& observe = {});

struct Bracket {
    double lo;
    double hi;
};

/// Sign-change brackets of f over n uniform cells of [a,b]. A node where f
/// is exactly zero yields the degenerate bracket {x, x}.
std::vector<Bracket> scan_brackets(const std::function<double(double)>& f, double a, double b,
    int n);

class FdStencilError : public NumericalError {
public:
    FdStencilError(int component, const std::string& what)
        : NumericalError(what), component_(component)
    {
    }
    int component() const { return component_; }

private:
    int component_;
};

/// Central-difference gradient, one step per component.
template <int N>
Eigen::Matrix<double, N, 1> fd_gradient(const std::function<double(const Eigen::Matrix<double, N, 1>&)>& f,
    const Eigen::Matrix<double, N, 1>& x, const Eigen::Matrix<double, N, 1>& steps)
{
    Eigen::Matrix<double, N, 1> g;
    for (int mu = 0; mu < N; ++mu) {
        Eigen::Matrix<double, N, 1> xp = x, xm = x;
        xp[mu] += steps[mu];
        xm[mu] -= steps[mu];
        const double fp = f(xp), fm = f(xm);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw FdStencilError(mu, "non-finite stencil value in component " + std::to_string(mu));
        // divide by the representable step actually taken
        g[mu] = (fp - fm) / (xp[mu] - xm[mu]);
    }
    return g;
}

/// Central differences with the same step h in every component.
Vec4 fd_gradient4(const std::function<double(const Vec4&)>& f, const Vec4& x, double h);

/// The default per-component step h_mu = base * (1 + |x_mu|).
template <int N>
Eigen::Matrix<double, N, 1> default_fd_steps(const Eigen::Matrix<double, N, 1>& x, double base = 1e-5)
{
    return (base * (1.0 + x.array().abs())).matrix();
}

/// Signature (+,-,-,-).
inline double minkowski_dot(const Vec4& a, const Vec4& b)
{
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

/// Signature (+,-,-) for two space dimensions.
inline double minkowski_dot(const Vec3& a, const Vec3& b)
{
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2];
}

/// Adaptive Gauss-Legendre quadrature of f over [a,b] to absolute tolerance.
/// Throws NumericalError when the subdivision depth is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10);

} // namespace eikonal::num
