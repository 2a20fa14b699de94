#include "eikonal/numkernel.hpp"

#include <algorithm>

namespace eikonal::num {

void SolverConfig::validate() const
{
    auto fail = [](const std::string& field, const std::string& rule) {
        throw PreconditionError("solver." + field + " " + rule);
    };
    if (!(tol_residual > 0.0))
        fail("tol_residual", "must be > 0");
    if (!(tol_step > 0.0))
        fail("tol_step", "must be > 0");
    if (max_iterations < 1)
        fail("max_iterations", "must be >= 1");
    if (!(damping > 0.0 && damping < 1.0))
        fail("damping", "must lie in (0,1)");
    if (max_backtracks < 0)
        fail("max_backtracks", "must be >= 0");
    if (!(seed_grid_radius > 0.0 && seed_grid_radius < 1.0))
        fail("seed_grid_radius", "must lie in (0,1)");
    if (seed_grid_count < 1)
        fail("seed_grid_count", "must be >= 1");
    if (!(dedupe_distance > 0.0))
        fail("dedupe_distance", "must be > 0");
}

std::string to_string(StopReason r)
{
    switch (r) {
    case StopReason::ResidualTolerance: return "residual_tolerance";
    case StopReason::StepTolerance: return "step_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::SingularJacobian: return "singular_jacobian";
    case StopReason::DomainExit: return "domain_exit";
    case StopReason::EvaluationFailure: return "evaluation_failure";
    case StopReason::NoDecrease: return "no_decrease";
    case StopReason::InvalidBracket: return "invalid_bracket";
    }
    return "unknown";
}

double rcond(const Mat2& m)
{
    const double det = m.determinant();
    if (det == 0.0 || !std::isfinite(det))
        return 0.0;
    const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
    // inverse = adj / det; its 1-norm from the adjugate's columns
    const double inv_norm = std::max(std::abs(m(1, 1)) + std::abs(m(1, 0)),
                                std::abs(m(0, 1)) + std::abs(m(0, 0)))
        / std::abs(det);
    return 1.0 / (norm * inv_norm);
}

namespace {

// Largest t in [0,1] with from + t*step inside the domain (from is inside).
double boundary_fraction(const Domain2& domain, const Vec2& from, const Vec2& step)
{
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (domain(from + mid * step))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace

SolveOutcome newton2(const System2& f, const Vec2& seed, const SolverConfig& config,
    const Domain2& domain)
{
    SolveOutcome out;
    out.seed = seed;
    out.root = seed;
    auto inside = [&](const Vec2& z) { return !domain || domain(z); };

    if (!inside(seed)) {
        out.reason = StopReason::DomainExit;
        out.final_residual_norm = std::numeric_limits<double>::infinity();
        return out;
    }
    std::optional<Eval2> ev = f(seed);
    if (!ev || !ev->value.allFinite()) {
        out.reason = StopReason::EvaluationFailure;
        out.final_residual_norm = std::numeric_limits<double>::infinity();
        return out;
    }

    Vec2 z = seed;
    double norm = ev->value.norm();
    int stuck = 0;
    auto finish = [&](StopReason reason) {
        out.root = z;
        out.final_residual_norm = norm;
        out.converged = norm <= config.tol_residual;
        out.reason = out.converged && reason != StopReason::StepTolerance ? StopReason::ResidualTolerance
                                                                          : reason;
        return out;
    };

    for (;;) {
        if (norm <= config.tol_residual)
            return finish(StopReason::ResidualTolerance);
        if (out.iterations >= config.max_iterations)
            return finish(StopReason::MaxIterations);

        if (!ev->jacobian.allFinite() || rcond(ev->jacobian) < config.rcond_min)
            return finish(StopReason::SingularJacobian);
        const Vec2 step = -ev->jacobian.inverse() * ev->value;

        double t = 1.0;
        bool projected = false;
        if (!inside(z + step)) {
            const double tb = boundary_fraction(domain, z, step);
            t = tb - config.boundary_margin / step.norm();
            projected = true;
        }

        bool accepted = false;
        for (int k = 0; k <= config.max_backtracks && t > 0.0; ++k, t *= config.damping) {
            const Vec2 trial = z + t * step;
            if (!inside(trial))
                continue;
            std::optional<Eval2> tev = f(trial);
            if (!tev || !tev->value.allFinite())
                continue;
            const double tnorm = tev->value.norm();
            if (tnorm < norm) {
                const double moved = (trial - z).norm();
                z = trial;
                ev = std::move(tev);
                norm = tnorm;
                accepted = true;
                ++out.iterations;
                if (moved <= config.tol_step)
                    return finish(StopReason::StepTolerance);
                break;
            }
        }

        if (!accepted) {
            if (projected) {
                if (++stuck >= 2)
                    return finish(StopReason::DomainExit);
                continue;
            }
            return finish(StopReason::NoDecrease);
        }
    }
}

std::vector<Vec2> seed_grid(const Domain2& domain, const SolverConfig& config)
{
    std::vector<Vec2> seeds;
    const int n = config.seed_grid_count;
    const double r = config.seed_grid_radius;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = n == 1 ? 0.0 : -r + 2.0 * r * i / (n - 1);
            const double b = n == 1 ? 0.0 : -r + 2.0 * r * j / (n - 1);
            const Vec2 s(a, b);
            if (s.norm() > r)
                continue;
            if (domain && !domain(s))
                continue;
            seeds.push_back(s);
        }
    }
    return seeds;
}

std::vector<SolveOutcome> solve_all_2d(const System2& f, const Domain2& domain,
    const SolverConfig& config)
{
    std::vector<SolveOutcome> found;
    for (const Vec2& s : seed_grid(domain, config)) {
        SolveOutcome o = newton2(f, s, config, domain);
        if (o.converged)
            found.push_back(o);
    }
    std::sort(found.begin(), found.end(), [](const SolveOutcome& a, const SolveOutcome& b) {
        if (a.final_residual_norm != b.final_residual_norm)
            return a.final_residual_norm < b.final_residual_norm;
        if (a.root[0] != b.root[0])
            return a.root[0] < b.root[0];
        return a.root[1] < b.root[1];
    });
    std::vector<SolveOutcome> unique;
    for (const auto& o : found) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const SolveOutcome& u) {
            return (u.root - o.root).norm() < config.dedupe_distance;
        });
        if (!dup)
            unique.push_back(o);
    }
    return unique;
}

} // namespace eikonal::num
