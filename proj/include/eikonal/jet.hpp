#pragma once

#include <array>
#include <cstddef>

namespace eikonal {

/// Second-order forward-mode jet in up to three variables: value,
/// gradient and the upper triangle of the Hessian.
///
/// Arithmetic propagates exact first and second derivatives. The Hessian
/// is symmetric by construction because only one triangle is stored.
class Jet2 {
public:
    static constexpr std::size_t max_vars = 3;

    Jet2() = default;
    explicit Jet2(std::size_t vars, double value = 0.0);

    static Jet2 constant(std::size_t vars, double value) { return Jet2(vars, value); }
    /// The jet of the coordinate function x_index.
    static Jet2 variable(std::size_t vars, std::size_t index, double value);

    std::size_t vars() const { return vars_; }
    double value() const { return value_; }
    double grad(std::size_t i) const { return grad_[i]; }
    double hess(std::size_t i, std::size_t j) const { return hess_[slot(i, j)]; }

    void set_value(double v) { value_ = v; }
    void set_grad(std::size_t i, double v) { grad_[i] = v; }
    void set_hess(std::size_t i, std::size_t j, double v) { hess_[slot(i, j)] = v; }

    bool is_finite() const;

    /// Chain rule for a scalar function with derivatives d1, d2 at value().
    Jet2 apply(double f, double d1, double d2) const;

    Jet2 operator-() const;
    Jet2& operator+=(const Jet2& o);
    Jet2& operator-=(const Jet2& o);
    Jet2& operator*=(double c);

    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator*(Jet2 a, double c) { return a *= c; }
    friend Jet2 operator*(double c, Jet2 a) { return a *= c; }
    friend Jet2 operator*(const Jet2& a, const Jet2& b);
    /// Quotient; the caller guarantees b.value() != 0.
    friend Jet2 operator/(const Jet2& a, const Jet2& b);

private:
    static constexpr std::size_t slot(std::size_t i, std::size_t j)
    {
        if (i > j) {
            const std::size_t t = i;
            i = j;
            j = t;
        }
        // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
        return i == 0 ? j : (i == 1 ? 2 + j : 5);
    }

    std::size_t vars_ = 0;
    double value_ = 0.0;
    std::array<double, max_vars> grad_{};
    std::array<double, 6> hess_{};
};

} // namespace eikonal
