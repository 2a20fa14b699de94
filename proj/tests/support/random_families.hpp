#pragma once

#include "eikonal/expr.hpp"
#include "eikonal/family2d.hpp"
#include "eikonal/family3d.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline std::string num17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Polynomial in (z1, z2) of total degree <= degree, coefficients uniform in
/// [-amp, amp], plus `offset`.
inline std::string random_poly2(std::mt19937_64& rng, int degree, double amp, double offset = 0.0)
{
    std::string out = num17(offset);
    for (int total = 0; total <= degree; ++total) {
        for (int a = total; a >= 0; --a) {
            const int b = total - a;
            out += " + " + num17(uniform(rng, -amp, amp));
            if (a > 0)
                out += "*z1^" + std::to_string(a);
            if (b > 0)
                out += "*z2^" + std::to_string(b);
        }
    }
    return out;
}

inline std::string random_poly1(std::mt19937_64& rng, int degree, double amp, double offset = 0.0)
{
    std::string out = num17(offset);
    for (int d = 0; d <= degree; ++d) {
        out += " + " + num17(uniform(rng, -amp, amp));
        if (d > 0)
            out += "*z^" + std::to_string(d);
    }
    return out;
}

struct Family3DDraw {
    std::string g, k;
    eikonal::family3d::Family3D family;
    int rejected;
};

/// g = 1 + cubic (coefficients in [-0.2, 0.2]), k = cubic (in [-0.3, 0.3]);
/// draws violating |g| >= g_min are redrawn and counted.
inline Family3DDraw random_family3d(std::mt19937_64& rng)
{
    for (int rejected = 0;; ++rejected) {
        std::string g = random_poly2(rng, 3, 0.2, 1.0);
        std::string k = random_poly2(rng, 3, 0.3);
        try {
            auto f = eikonal::family3d::Family3D::from_text(g, k);
            return {g, k, f, rejected};
        } catch (const eikonal::SingularFamilyError&) {
        }
    }
}

struct Family2DDraw {
    std::string g, k, h;
    eikonal::family2d::Family2D family;
    int rejected;
};

/// Quartic g with |g'| >= 0.25 on [-0.9, 0.9], quartic k; h independent
/// quartic, or h = c - k when tie_h is set.
inline Family2DDraw random_family2d(std::mt19937_64& rng, bool tie_h)
{
    for (int rejected = 0;; ++rejected) {
        const double slope = uniform(rng, 0.6, 1.5) * (uniform(rng, -1.0, 1.0) < 0 ? -1.0 : 1.0);
        std::string g = random_poly1(rng, 4, 0.1, uniform(rng, -0.5, 0.5)) + " + " + num17(slope) + "*z";
        std::string k = random_poly1(rng, 4, 0.3);
        std::string h = tie_h ? num17(uniform(rng, -0.5, 0.5)) + " - (" + k + ")" : random_poly1(rng, 4, 0.3);
        try {
            auto f = eikonal::family2d::Family2D::from_text(g, k, h);
            return {g, k, h, f, rejected};
        } catch (const eikonal::SingularFamilyError&) {
        }
    }
}

// ---------------------------------------------------------------------------
// Random expression trees.

class TreeGenerator {
public:
    TreeGenerator(std::mt19937_64& rng, std::size_t vars) : rng_(rng), vars_(vars) {}

    eikonal::expr::NodePtr tree(int depth)
    {
        namespace ex = eikonal::expr;
        if (depth <= 1 || pick(10) < 3)
            return leaf();
        switch (pick(10)) {
        case 0:
            return ex::negate(tree(depth - 1));
        case 1:
        case 2: {
            const auto fn = static_cast<ex::Function>(pick(9));
            return ex::call(fn, tree(depth - 1));
        }
        case 3: {
            // small integer power, or a real power of a positive base
            if (pick(2) == 0)
                return ex::binary(ex::BinaryOp::Pow, tree(depth - 1), ex::number(static_cast<double>(pick(5))));
            auto base = ex::binary(ex::BinaryOp::Add, ex::number(2.0),
                ex::call(ex::Function::Sin, tree(depth - 2)));
            return ex::binary(ex::BinaryOp::Pow, base, ex::number(uniform(rng_, -1.5, 1.5)));
        }
        default: {
            const auto op = static_cast<ex::BinaryOp>(pick(4));
            return ex::binary(op, tree(depth - 1), tree(depth - 1));
        }
        }
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    eikonal::expr::NodePtr leaf()
    {
        namespace ex = eikonal::expr;
        const int r = pick(10);
        if (r < 5)
            return ex::variable(static_cast<std::size_t>(pick(static_cast<int>(vars_))));
        if (r == 5)
            return ex::constant(pick(2) == 0 ? ex::NamedConstant::Pi : ex::NamedConstant::E);
        return ex::number(uniform(rng_, -3.0, 3.0));
    }

    std::mt19937_64& rng_;
    std::size_t vars_;
};

// ---------------------------------------------------------------------------
// Jet oracle with step chosen from the data: Richardson-extrapolated central
// differences over a ladder of steps, keeping the step where successive
// extrapolants agree best.

struct TunedDiscrepancy {
    double discrepancy = 0.0;  ///< max relative jet-vs-FD error
    double conditioning = 0.0; ///< relative disagreement of the FD estimates themselves
    double step = 0.0;
};

namespace detail {

struct Derivs {
    std::vector<double> d; // gradient then upper-triangular Hessian
};

inline std::optional<Derivs> central(const eikonal::expr::Expression& e, const std::vector<double>& x, double h)
{
    const std::size_t n = x.size();
    auto f = [&](std::vector<double> p) { return e.value(p); };
    try {
        Derivs out;
        const double f0 = f(x);
        for (std::size_t i = 0; i < n; ++i) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            out.d.push_back((f(xp) - f(xm)) / (2 * h));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                if (i == j) {
                    auto xp = x, xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    out.d.push_back((f(xp) - 2 * f0 + f(xm)) / (h * h));
                } else {
                    auto pp = x, pm = x, mp = x, mm = x;
                    pp[i] += h, pp[j] += h;
                    pm[i] += h, pm[j] -= h;
                    mp[i] -= h, mp[j] += h;
                    mm[i] -= h, mm[j] -= h;
                    out.d.push_back((f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h));
                }
            }
        }
        for (double v : out.d)
            if (!std::isfinite(v))
                return std::nullopt;
        return out;
    } catch (const eikonal::Error&) {
        return std::nullopt;
    }
}

inline std::optional<Derivs> richardson(const eikonal::expr::Expression& e, const std::vector<double>& x, double h)
{
    const auto a = central(e, x, h), b = central(e, x, h / 2);
    if (!a || !b)
        return std::nullopt;
    Derivs out;
    for (std::size_t i = 0; i < a->d.size(); ++i)
        out.d.push_back((4 * b->d[i] - a->d[i]) / 3);
    return out;
}

inline double rel_gap(const std::vector<double>& a, const std::vector<double>& b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    return worst;
}

} // namespace detail

inline std::optional<TunedDiscrepancy> tuned_fd_check(const eikonal::expr::Expression& e,
    const std::vector<double>& x)
{
    const eikonal::Jet2 jet = e.jet(x);
    std::vector<double> exact;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i)
        exact.push_back(jet.grad(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            exact.push_back(jet.hess(i, j));

    const double ladder[] = {4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3};
    std::optional<detail::Derivs> prev;
    std::optional<TunedDiscrepancy> best;
    for (double h : ladder) {
        auto cur = detail::richardson(e, x, h);
        if (cur && prev) {
            const double cond = detail::rel_gap(prev->d, cur->d);
            if (!best || cond < best->conditioning)
                best = TunedDiscrepancy{detail::rel_gap(exact, cur->d), cond, h};
        }
        prev = cur;
    }
    return best;
}

} // namespace testsupport
