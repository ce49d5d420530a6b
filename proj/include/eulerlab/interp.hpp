#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "eulerlab/field.hpp"
#include "eulerlab/spectral.hpp"

namespace eulerlab {

/// Band-limited interpolant of a grid field. The Nyquist modes use the
/// symmetric cos form, so the interpolant is real and its derivatives agree
/// with the spectral derivatives at the nodes.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const ScalarField& f) : grid_(f.grid()), modes_(f.spectral_modes()) {}

  const Grid2D& grid() const { return grid_; }

  /// d^a/dx^a d^b/dy^b of the interpolant at (x, y).
  double eval(double x, double y, int a = 0, int b = 0) const {
    const int n = grid_.n;
    const int half = n / 2 + 1;
    const auto ex = factors(x, a);
    const auto ey = factors(y, b);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx row = 0.0;
      const cplx* c = modes_.data() + static_cast<std::size_t>(i) * half;
      for (int j = 0; j < half; ++j) {
        const double w = (j == 0 || j == n / 2) ? 1.0 : 2.0;
        row += w * c[j] * ey[j];
      }
      s += (row * ex[i]).real();
    }
    return s;
  }

  double operator()(double x, double y) const { return eval(x, y); }

  std::array<double, 2> gradient(double x, double y) const { return {eval(x, y, 1, 0), eval(x, y, 0, 1)}; }

 private:
  // Per-axis phase factors, indexed like the FFT storage along that axis.
  std::vector<cplx> factors(double x, int order) const {
    const int n = grid_.n;
    const int nyq = n / 2;
    const double s = x - grid_.coord(0);
    std::vector<cplx> e(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int k = mode_number(i, n);
      const double kw = wavenumber(k, grid_);
      if (std::abs(k) == nyq) {
        e[i] = std::pow(std::abs(kw), order) * std::cos(std::abs(kw) * s + order * std::numbers::pi / 2);
      } else {
        cplx d = 1.0;
        for (int q = 0; q < order; ++q) d *= cplx(0.0, kw);
        e[i] = d * std::polar(1.0, kw * s);
      }
    }
    return e;
  }

  Grid2D grid_;
  std::vector<cplx> modes_;
};

struct SupLocation {
  double value = 0.0;  // signed value of f at the maximiser of |f|
  Point2 at;
};

/// sup |f| of the trigonometric interpolant: the largest node values are
/// refined by damped Newton ascent, with steps capped at one cell.
inline SupLocation interpolated_sup(const ScalarField& f, int candidates = 4, int iterations = 12) {
  const auto& g = f.grid();
  const auto v = f.physical_values();
  std::vector<std::size_t> order(v.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(candidates, 1)), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
  const TrigInterpolant F(f);
  const double h = g.spacing();
  SupLocation best{v[order[0]], {g.coord(static_cast<int>(order[0]) / g.n), g.coord(static_cast<int>(order[0]) % g.n)}};
  for (std::size_t c = 0; c < take; ++c) {
    double x = g.coord(static_cast<int>(order[c]) / g.n), y = g.coord(static_cast<int>(order[c]) % g.n);
    double fv = F(x, y);
    const double sign = fv < 0 ? -1.0 : 1.0;
    for (int it = 0; it < iterations; ++it) {
      const double gx = sign * F.eval(x, y, 1, 0), gy = sign * F.eval(x, y, 0, 1);
      const double hxx = sign * F.eval(x, y, 2, 0), hxy = sign * F.eval(x, y, 1, 1), hyy = sign * F.eval(x, y, 0, 2);
      double dx, dy;
      const double det = hxx * hyy - hxy * hxy;
      if (hxx < 0 && det > 0) {
        dx = -(hyy * gx - hxy * gy) / det;
        dy = -(hxx * gy - hxy * gx) / det;
      } else {
        dx = gx * h * h;
        dy = gy * h * h;
      }
      const double len = std::hypot(dx, dy);
      if (len > h) {
        dx *= h / len;
        dy *= h / len;
      }
      double t = 1.0;
      bool moved = false;
      for (int k = 0; k < 20; ++k, t *= 0.5) {
        const double trial = F(x + t * dx, y + t * dy);
        if (sign * trial >= sign * fv) {
          x += t * dx;
          y += t * dy;
          fv = trial;
          moved = true;
          break;
        }
      }
      if (!moved || std::hypot(dx, dy) * t < 1e-13 * g.length) break;
    }
    if (std::abs(fv) > std::abs(best.value)) best = {fv, {x, y}};
  }
  return best;
}

namespace detail {

// Periodic Dirichlet kernel of the symmetric interpolant, one axis.
inline double dirichlet(const Grid2D& g, double d) {
  const double theta = 2.0 * std::numbers::pi / g.length * d;
  const double s = std::sin(0.5 * theta);
  if (std::abs(s) < 1e-12) return 1.0;
  return std::sin(0.5 * g.n * theta) * std::cos(0.5 * theta) / s / g.n;
}

inline std::vector<double> dirichlet_row(const Grid2D& g, double x) {
  std::vector<double> d(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) d[i] = dirichlet(g, x - g.coord(i));
  return d;
}

}  // namespace detail

/// Values of the interpolant of f at arbitrary points, O(n^2) per point.
inline std::vector<double> interpolate_at(const ScalarField& f, std::span<const Point2> points) {
  const auto& g = f.grid();
  const auto v = f.physical_values();
  std::vector<double> out(points.size());
  for (std::size_t m = 0; m < points.size(); ++m) {
    const auto dx = detail::dirichlet_row(g, points[m].x);
    const auto dy = detail::dirichlet_row(g, points[m].y);
    double s = 0.0;
    for (int i = 0; i < g.n; ++i) {
      if (dx[i] == 0.0) continue;
      double r = 0.0;
      for (int j = 0; j < g.n; ++j) r += v[g.index(i, j)] * dy[j];
      s += dx[i] * r;
    }
    out[m] = s;
  }
  return out;
}

/// Transpose of f -> interpolate_at(f, points) with respect to the plain
/// sum over nodes.
inline ScalarField interpolate_adjoint(const Grid2D& g, std::span<const double> values, std::span<const Point2> points) {
  if (values.size() != points.size()) throw std::invalid_argument("one value per point required");
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t m = 0; m < points.size(); ++m) {
    const auto dx = detail::dirichlet_row(g, points[m].x);
    const auto dy = detail::dirichlet_row(g, points[m].y);
    for (int i = 0; i < g.n; ++i) {
      const double w = values[m] * dx[i];
      for (int j = 0; j < g.n; ++j) out[g.index(i, j)] += w * dy[j];
    }
  }
  return ScalarField::from_values(g, std::move(out));
}

/// g(x_i, y_j) = f(x_i + shift[j], y_j), exact for the interpolant. The
/// transpose is the same map with the shifts negated.
inline ScalarField shift_rows(const ScalarField& f, std::span<const double> shift) {
  const auto& g = f.grid();
  const int n = g.n;
  if (shift.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("one shift per row required");
  auto v = f.physical_values();
  std::vector<double> line(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) line[i] = v[g.index(i, j)];
    auto c = fft::forward_1d(n, line);
    for (int k = 0; k <= n / 2; ++k) {
      const double kw = wavenumber(k, g);
      c[k] *= (k == n / 2) ? cplx(std::cos(kw * shift[j])) : std::polar(1.0, kw * shift[j]);
    }
    const auto out = fft::inverse_1d(n, c);
    for (int i = 0; i < n; ++i) v[g.index(i, j)] = out[i];
  }
  return ScalarField::from_values(g, std::move(v));
}

}  // namespace eulerlab
