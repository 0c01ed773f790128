#pragma once

// Second-order forward differentiation in two variables: value, gradient and Hessian carried exactly.

#include <cmath>

namespace oracle {

struct HD {
    double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;

    HD() = default;
    HD(double c) : v(c) {}
    HD(double v_, double x_, double y_, double xx_, double xy_, double yy_) : v(v_), x(x_), y(y_), xx(xx_), xy(xy_), yy(yy_) {}
    static HD var_x(double a) { HD r(a); r.x = 1; return r; }
    static HD var_y(double a) { HD r(a); r.y = 1; return r; }
};

// Chain rule for a scalar function with f, f', f'' evaluated at a.v.
inline HD chain(const HD& a, double f, double d1, double d2)
{
    HD r;
    r.v = f;
    r.x = d1 * a.x;
    r.y = d1 * a.y;
    r.xx = d1 * a.xx + d2 * a.x * a.x;
    r.xy = d1 * a.xy + d2 * a.x * a.y;
    r.yy = d1 * a.yy + d2 * a.y * a.y;
    return r;
}

inline HD operator+(const HD& a, const HD& b) { return {a.v + b.v, a.x + b.x, a.y + b.y, a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
inline HD operator-(const HD& a, const HD& b) { return {a.v - b.v, a.x - b.x, a.y - b.y, a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
inline HD operator-(const HD& a) { return HD(0) - a; }
inline HD operator*(const HD& a, const HD& b)
{
    return {a.v * b.v,
            a.x * b.v + a.v * b.x,
            a.y * b.v + a.v * b.y,
            a.xx * b.v + 2 * a.x * b.x + a.v * b.xx,
            a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
            a.yy * b.v + 2 * a.y * b.y + a.v * b.yy};
}
inline HD inv(const HD& a) { return chain(a, 1 / a.v, -1 / (a.v * a.v), 2 / (a.v * a.v * a.v)); }
inline HD operator/(const HD& a, const HD& b) { return a * inv(b); }
inline HD operator+(double c, const HD& a) { return HD(c) + a; }
inline HD operator+(const HD& a, double c) { return a + HD(c); }
inline HD operator-(double c, const HD& a) { return HD(c) - a; }
inline HD operator-(const HD& a, double c) { return a - HD(c); }
inline HD operator*(double c, const HD& a) { return HD(c) * a; }
inline HD operator*(const HD& a, double c) { return a * HD(c); }
inline HD operator/(const HD& a, double c) { return a * (1 / c); }

inline HD exp(const HD& a)
{
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}
inline HD sin(const HD& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline HD cos(const HD& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }

}  // namespace oracle
