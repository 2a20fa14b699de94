#include "eikonal/jet.hpp"

#include <cassert>
#include <cmath>

namespace eikonal {

Jet2::Jet2(std::size_t vars, double value) : vars_(vars), value_(value)
{
    assert(vars <= max_vars);
}

Jet2 Jet2::variable(std::size_t vars, std::size_t index, double value)
{
    assert(index < vars);
    Jet2 j(vars, value);
    j.grad_[index] = 1.0;
    return j;
}

bool Jet2::is_finite() const
{
    if (!std::isfinite(value_))
        return false;
    for (std::size_t i = 0; i < vars_; ++i) {
        if (!std::isfinite(grad_[i]))
            return false;
        for (std::size_t j = i; j < vars_; ++j)
            if (!std::isfinite(hess(i, j)))
                return false;
    }
    return true;
}

Jet2 Jet2::apply(double f, double d1, double d2) const
{
    Jet2 r(vars_, f);
    for (std::size_t i = 0; i < vars_; ++i) {
        r.grad_[i] = d1 * grad_[i];
        for (std::size_t j = i; j < vars_; ++j)
            r.hess_[slot(i, j)] = d1 * hess_[slot(i, j)] + d2 * grad_[i] * grad_[j];
    }
    return r;
}

Jet2 Jet2::operator-() const
{
    Jet2 r = *this;
    r.value_ = -r.value_;
    for (auto& g : r.grad_)
        g = -g;
    for (auto& h : r.hess_)
        h = -h;
    return r;
}

Jet2& Jet2::operator+=(const Jet2& o)
{
    assert(vars_ == o.vars_);
    value_ += o.value_;
    for (std::size_t i = 0; i < max_vars; ++i)
        grad_[i] += o.grad_[i];
    for (std::size_t i = 0; i < hess_.size(); ++i)
        hess_[i] += o.hess_[i];
    return *this;
}

Jet2& Jet2::operator-=(const Jet2& o)
{
    assert(vars_ == o.vars_);
    value_ -= o.value_;
    for (std::size_t i = 0; i < max_vars; ++i)
        grad_[i] -= o.grad_[i];
    for (std::size_t i = 0; i < hess_.size(); ++i)
        hess_[i] -= o.hess_[i];
    return *this;
}

Jet2& Jet2::operator*=(double c)
{
    value_ *= c;
    for (auto& g : grad_)
        g *= c;
    for (auto& h : hess_)
        h *= c;
    return *this;
}

Jet2 operator*(const Jet2& a, const Jet2& b)
{
    assert(a.vars_ == b.vars_);
    Jet2 r(a.vars_, a.value_ * b.value_);
    for (std::size_t i = 0; i < a.vars_; ++i) {
        r.grad_[i] = a.grad_[i] * b.value_ + a.value_ * b.grad_[i];
        for (std::size_t j = i; j < a.vars_; ++j) {
            const std::size_t s = Jet2::slot(i, j);
            r.hess_[s] = a.hess_[s] * b.value_ + a.value_ * b.hess_[s]
                + a.grad_[i] * b.grad_[j] + a.grad_[j] * b.grad_[i];
        }
    }
    return r;
}

Jet2 operator/(const Jet2& a, const Jet2& b)
{
    // q = a/b  =>  q' = (a' - q b')/b,  q'' = (a'' - q b'' - b' q'^T - q' b'^T)/b
    const double inv = 1.0 / b.value_;
    Jet2 r(a.vars_, a.value_ / b.value_);
    const double q = r.value_;
    for (std::size_t i = 0; i < a.vars_; ++i)
        r.grad_[i] = (a.grad_[i] - q * b.grad_[i]) * inv;
    for (std::size_t i = 0; i < a.vars_; ++i) {
        for (std::size_t j = i; j < a.vars_; ++j) {
            const std::size_t s = Jet2::slot(i, j);
            r.hess_[s] = (a.hess_[s] - q * b.hess_[s] - b.grad_[i] * r.grad_[j]
                             - r.grad_[i] * b.grad_[j])
                * inv;
        }
    }
    return r;
}

} // namespace eikonal
