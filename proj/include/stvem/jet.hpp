#pragma once

#include <Eigen/Core>

#include <cmath>

namespace stvem {

/// Second-order forward-mode number in two variables: value, gradient, Hessian.
template <typename Scalar>
struct Jet2 {
    using Grad = Eigen::Matrix<Scalar, 2, 1>;
    using Hess = Eigen::Matrix<Scalar, 2, 2>;

    Scalar v{0};
    Grad g = Grad::Zero();
    Hess H = Hess::Zero();

    Jet2() = default;
    Jet2(Scalar value) : v(value) {}
    Jet2(Scalar value, const Grad& grad, const Hess& hess) : v(value), g(grad), H(hess) {}

    static Jet2 variable(Scalar value, int dir)
    {
        Jet2 j(value);
        j.g(dir) = 1;
        return j;
    }

    /// f(this) given f, f', f''.
    Jet2 chain(Scalar f, Scalar df, Scalar d2f) const { return {f, df * g, d2f * g * g.transpose() + df * H}; }

    Jet2& operator+=(const Jet2& o)
    {
        v += o.v;
        g += o.g;
        H += o.H;
        return *this;
    }
    Jet2& operator-=(const Jet2& o)
    {
        v -= o.v;
        g -= o.g;
        H -= o.H;
        return *this;
    }
    Jet2& operator*=(const Jet2& o) { return *this = *this * o; }

    friend Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.H}; }
    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator*(const Jet2& a, const Jet2& b)
    {
        return {a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.H + b.v * a.H + a.g * b.g.transpose() + b.g * a.g.transpose()};
    }
    friend Jet2 operator/(const Jet2& a, const Jet2& b)
    {
        const Scalar inv = 1 / b.v;
        return a * b.chain(inv, -inv * inv, 2 * inv * inv * inv);
    }
};

template <typename S> Jet2<S> sin(const Jet2<S>& a) { return a.chain(std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
template <typename S> Jet2<S> cos(const Jet2<S>& a) { return a.chain(std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
template <typename S> Jet2<S> exp(const Jet2<S>& a)
{
    const S e = std::exp(a.v);
    return a.chain(e, e, e);
}

}  // namespace stvem
