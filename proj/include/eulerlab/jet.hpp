#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace eulerlab {

/// Truncated bivariate Taylor polynomial of total degree <= Order about a
/// point: sum c_{ab} dx^a dy^b. Arithmetic propagates all partial
/// derivatives up to Order exactly (up to rounding), which is how every
/// closed-form field of the construction is differentiated.
template <int Order>
class Jet2 {
 public:
  static constexpr int order = Order;
  static constexpr int size = (Order + 1) * (Order + 2) / 2;

  static constexpr int index(int a, int b) {
    const int d = a + b;
    return d * (d + 1) / 2 + b;
  }

  constexpr Jet2() = default;
  constexpr Jet2(double value) { c_[0] = value; }  // NOLINT: implicit from constants

  static Jet2 variable_x(double x0) {
    Jet2 j(x0);
    if constexpr (Order >= 1) j.c_[index(1, 0)] = 1.0;
    return j;
  }
  static Jet2 variable_y(double y0) {
    Jet2 j(y0);
    if constexpr (Order >= 1) j.c_[index(0, 1)] = 1.0;
    return j;
  }

  double value() const { return c_[0]; }
  double coeff(int a, int b) const { return c_[index(a, b)]; }
  double& coeff(int a, int b) { return c_[index(a, b)]; }

  /// d^{a+b} / dx^a dy^b at the expansion point.
  double partial(int a, int b) const {
    if (a < 0 || b < 0 || a + b > Order) throw std::out_of_range("partial derivative beyond jet order");
    return c_[index(a, b)] * factorial(a) * factorial(b);
  }

  Jet2& operator+=(const Jet2& o) {
    for (int k = 0; k < size; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    for (int k = 0; k < size; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet2& operator*=(double s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator-(Jet2 a) { return a *= -1.0; }
  friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
  friend Jet2 operator*(double s, Jet2 a) { return a *= s; }

  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    for (int d1 = 0; d1 <= Order; ++d1)
      for (int b1 = 0; b1 <= d1; ++b1) {
        const double ca = a.c_[d1 * (d1 + 1) / 2 + b1];
        if (ca == 0.0) continue;
        for (int d2 = 0; d2 + d1 <= Order; ++d2) {
          const int base = (d1 + d2) * (d1 + d2 + 1) / 2 + b1;
          const int off = d2 * (d2 + 1) / 2;
          for (int b2 = 0; b2 <= d2; ++b2) r.c_[base + b2] += ca * b.c_[off + b2];
        }
      }
    return r;
  }

  friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
  friend Jet2 operator/(double s, const Jet2& b) { return s * reciprocal(b); }

  /// f(g) from the derivatives f^(m)(g0), m = 0..Order (Horner in g - g0).
  static Jet2 compose(const Jet2& g, const std::array<double, Order + 1>& derivs) {
    Jet2 h = g;
    h.c_[0] = 0.0;
    Jet2 r(derivs[Order] / factorial(Order));
    for (int m = Order - 1; m >= 0; --m) {
      r = r * h;
      r.c_[0] += derivs[m] / factorial(m);
    }
    return r;
  }

  friend Jet2 reciprocal(const Jet2& g) {
    const double g0 = g.value();
    if (g0 == 0.0) throw std::domain_error("jet reciprocal at zero");
    std::array<double, Order + 1> d{};
    double p = 1.0 / g0;
    for (int m = 0; m <= Order; ++m) {
      d[m] = (m % 2 ? -1.0 : 1.0) * factorial(m) * p;
      p /= g0;
    }
    return compose(g, d);
  }

  friend Jet2 log(const Jet2& g) {
    const double g0 = g.value();
    if (!(g0 > 0.0)) throw std::domain_error("jet log of non-positive value");
    std::array<double, Order + 1> d{};
    d[0] = std::log(g0);
    double p = 1.0 / g0;
    for (int m = 1; m <= Order; ++m) {
      d[m] = (m % 2 ? 1.0 : -1.0) * factorial(m - 1) * p;
      p /= g0;
    }
    return compose(g, d);
  }

  friend Jet2 exp(const Jet2& g) {
    std::array<double, Order + 1> d{};
    d.fill(std::exp(g.value()));
    return compose(g, d);
  }

  friend Jet2 sqrt(const Jet2& g) {
    const double g0 = g.value();
    if (!(g0 > 0.0)) throw std::domain_error("jet sqrt of non-positive value");
    std::array<double, Order + 1> d{};
    double coef = 1.0;  // falling factorial of 1/2
    for (int m = 0; m <= Order; ++m) {
      d[m] = coef * std::pow(g0, 0.5 - m);
      coef *= 0.5 - m;
    }
    return compose(g, d);
  }

 private:
  static constexpr double factorial(int m) {
    double f = 1.0;
    for (int k = 2; k <= m; ++k) f *= k;
    return f;
  }

  std::array<double, size> c_{};
};

}  // namespace eulerlab
