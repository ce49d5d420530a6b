#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "eulerlab/field.hpp"
#include "eulerlab/jet.hpp"
#include "eulerlab/parallel.hpp"
#include "eulerlab/spectral.hpp"

namespace eulerlab {

// ---- closed forms -------------------------------------------------------

inline double eval_Q(double x, double y) {
  const double x2 = x * x, y2 = y * y;
  return x2 * x2 + y2 * y2 - 6.0 * x2 * y2;
}

/// G_eps = Q log(x^2 + y^2 + eps^2).
inline double eval_G(double x, double y, double eps) {
  const double s = x * x + y * y + eps * eps;
  if (s == 0.0) throw std::domain_error("G is undefined at the origin when eps = 0");
  return eval_Q(x, y) * std::log(s);
}

inline double laplacian_G_closed(double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 == 0.0) throw std::domain_error("Laplacian of G is undefined at the origin");
  return 16.0 * eval_Q(x, y) / r2;
}

/// Delta G_eps = 4 Q (5 eps^2 + 4 r^2) / (r^2 + eps^2)^2; generic so it can be
/// fed jets as well as doubles.
template <class T>
T laplacian_G_eps(const T& x, const T& y, double eps) {
  const T x2 = x * x, y2 = y * y;
  const T r2 = x2 + y2;
  const T q = x2 * x2 + y2 * y2 - 6.0 * x2 * y2;
  const T s = r2 + eps * eps;
  return 4.0 * q * (5.0 * eps * eps + 4.0 * r2) / (s * s);
}

/// d_xxyy [Q log r^2] = -24 log r^2 + H with H a bounded function of angle.
inline double dxxyy_G_closed(double x, double y) {
  const double x2 = x * x, y2 = y * y;
  const double r2 = x2 + y2;
  if (r2 == 0.0) throw std::domain_error("d_xxyy G is undefined at the origin");
  const double r8 = r2 * r2 * r2 * r2;
  const double x4 = x2 * x2, y4 = y2 * y2;
  const double poly = -17.0 * x4 * x4 - 68.0 * x4 * x2 * y2 + 90.0 * x4 * y4 - 68.0 * x2 * y4 * y2 - 17.0 * y4 * y4;
  return -24.0 * std::log(r2) + 4.0 * poly / r8;
}

/// d_xx Delta G_eps; bounded on B_1 for every eps >= 0.
inline double dxx_laplacian_G_closed(double x, double y, double eps) {
  const double x2 = x * x, y2 = y * y;
  const double e2 = eps * eps;
  const double s = x2 + y2 + e2;
  if (s == 0.0) throw std::domain_error("d_xx Delta G is undefined at the origin when eps = 0");
  const double e4 = e2 * e2, e6 = e4 * e2;
  const double x4 = x2 * x2, y4 = y2 * y2;
  const double num = 15.0 * e6 * (x2 - y2) + e4 * (15.0 * x4 + 90.0 * x2 * y2 - 45.0 * y4) +
                     e2 * (8.0 * x4 * x2 + 60.0 * x4 * y2 + 120.0 * x2 * y4 - 44.0 * y4 * y2) +
                     2.0 * x4 * x4 + 8.0 * x4 * x2 * y2 + 60.0 * x4 * y4 + 40.0 * x2 * y4 * y2 - 14.0 * y4 * y4;
  const double s2 = s * s;
  return 16.0 * num / (s2 * s2);
}

// ---- cutoff -------------------------------------------------------------

struct CutoffSpec {
  double r_inner = 1.0;
  double r_outer = 2.0;

  void validate() const {
    if (!(r_inner > 0.0) || !(r_outer > r_inner)) throw std::invalid_argument("cutoff radii must satisfy 0 < r_inner < r_outer");
  }
  bool operator==(const CutoffSpec&) const = default;
};

namespace detail {

// below this exp(-1/t) is zero in double precision
inline constexpr double sigma_floor = 1.0 / 740.0;

inline double value_of(double v) { return v; }
template <int O>
double value_of(const Jet2<O>& j) { return j.value(); }

inline double exp(double v) { return std::exp(v); }
inline double sqrt(double v) { return std::sqrt(v); }
inline double log(double v) { return std::log(v); }

template <class T>
T sigma(const T& t) {
  if (value_of(t) <= sigma_floor) return T(0.0);
  return exp(-(1.0 / t));
}

}  // namespace detail

/// Smooth step s(t) = sigma(t) / (sigma(t) + sigma(1 - t)), sigma(t) = exp(-1/t).
template <class T>
T cutoff_profile(const T& t) {
  using detail::sigma;
  const T a = sigma(t);
  const T b = sigma(1.0 - t);
  return a / (a + b);
}

/// chi(x, y): 1 on B_{r_inner}, 0 outside B_{r_outer}.
template <class T>
T cutoff(const T& x, const T& y, const CutoffSpec& spec) {
  using detail::value_of;
  const double r = std::hypot(value_of(x), value_of(y));
  if (r <= spec.r_inner) return T(1.0);
  if (r >= spec.r_outer) return T(0.0);
  using detail::sqrt;
  const T rr = sqrt(x * x + y * y);
  return cutoff_profile((spec.r_outer - rr) * (1.0 / (spec.r_outer - spec.r_inner)));
}

inline double eval_cutoff(double r, const CutoffSpec& spec = {}) {
  if (!(r >= 0.0)) throw std::invalid_argument("cutoff radius must be non-negative");
  return cutoff(r, 0.0, spec);
}

// ---- parameters ---------------------------------------------------------

struct ConstructionParams {
  double delta = 0.01;
  double eta = 0.2;
  double eps = 1e-3;
  CutoffSpec cutoff;

  void validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (!(delta < eta)) throw std::invalid_argument("delta must be < eta");
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
    cutoff.validate();
  }
  bool operator==(const ConstructionParams&) const = default;
};

/// Same delta/eta ratio as the defaults, scaled so that |grad u0| <= 1 on the
/// whole torus (the default pair is dominated by the cutoff annulus).
inline ConstructionParams unit_lipschitz_params() { return {3e-5, 6e-4, 1e-3, {}}; }

enum class ResolutionPolicy { strict, allow_subgrid };

// ---- pointwise evaluation -----------------------------------------------

/// Jet of chi * G_eps about (x, y).
template <int Order>
Jet2<Order> chi_G_jet(double x, double y, double eps, const CutoffSpec& spec) {
  using J = Jet2<Order>;
  if (std::hypot(x, y) >= spec.r_outer) return J(0.0);
  const J X = J::variable_x(x), Y = J::variable_y(y);
  const J x2 = X * X, y2 = Y * Y;
  const J q = x2 * x2 + y2 * y2 - 6.0 * x2 * y2;
  const J g = q * log(x2 + y2 + eps * eps);
  return g * cutoff(X, Y, spec);
}

/// Jet of the shear stream function y^2 chi / 2 about (x, y).
template <int Order>
Jet2<Order> shear_stream_jet(double x, double y, const CutoffSpec& spec) {
  using J = Jet2<Order>;
  const J X = J::variable_x(x), Y = J::variable_y(y);
  return 0.5 * (Y * Y) * cutoff(X, Y, spec);
}

/// Stream function Theta = delta Delta(chi G_eps) + eta y^2 chi / 2; the
/// velocity is its clockwise perpendicular gradient (d_y, -d_x).
inline double stream_u0(const ConstructionParams& p, double x, double y) {
  if (std::hypot(x, y) >= p.cutoff.r_outer) return 0.0;
  const auto a = chi_G_jet<2>(x, y, p.eps, p.cutoff);
  const auto s = shear_stream_jet<0>(x, y, p.cutoff);
  return p.delta * (a.partial(2, 0) + a.partial(0, 2)) + p.eta * s.value();
}

struct U0Point {
  double u = 0.0, v = 0.0;
  double ux = 0.0, uy = 0.0, vx = 0.0, vy = 0.0;
};

/// Closed-form velocity and gradient of u0 at one point.
inline U0Point sample_u0(const ConstructionParams& p, double x, double y) {
  U0Point out;
  if (std::hypot(x, y) >= p.cutoff.r_outer) return out;
  const auto a = chi_G_jet<4>(x, y, p.eps, p.cutoff);
  const auto s = shear_stream_jet<2>(x, y, p.cutoff);
  // Theta derivatives, (a, b) = orders in (x, y)
  auto theta = [&](int i, int j) {
    return p.delta * (a.partial(i + 2, j) + a.partial(i, j + 2)) + p.eta * s.partial(i, j);
  };
  const double tx = theta(1, 0), ty = theta(0, 1);
  const double txx = theta(2, 0), txy = theta(1, 1), tyy = theta(0, 2);
  out.u = ty;
  out.v = -tx;
  out.ux = txy;
  out.uy = tyy;
  out.vx = -txx;
  out.vy = -txy;
  return out;
}

/// Velocity source for tracer integration, frozen in time.
/// Closed-form velocity only (lower jet order than sample_u0).
inline std::array<double, 2> velocity_u0(const ConstructionParams& p, double x, double y) {
  if (std::hypot(x, y) >= p.cutoff.r_outer) return {0.0, 0.0};
  const auto a = chi_G_jet<3>(x, y, p.eps, p.cutoff);
  const auto s = shear_stream_jet<1>(x, y, p.cutoff);
  const double tx = p.delta * (a.partial(3, 0) + a.partial(1, 2)) + p.eta * s.partial(1, 0);
  const double ty = p.delta * (a.partial(2, 1) + a.partial(0, 3)) + p.eta * s.partial(0, 1);
  return {ty, -tx};
}

struct ClosedFormVelocity {
  ConstructionParams params;

  std::array<double, 2> operator()(double x, double y, double /*t*/) const { return velocity_u0(params, x, y); }
};

namespace detail {

template <class Fn>
std::vector<double> sample_rows(const Grid2D& g, Fn&& fn) {
  std::vector<double> v(g.size());
  parallel_for(static_cast<std::size_t>(g.n), 0, [&](std::size_t i) {
    const double x = g.coord(static_cast<int>(i));
    for (int j = 0; j < g.n; ++j) v[g.index(static_cast<int>(i), j)] = fn(x, g.coord(j));
  });
  return v;
}

inline void check_resolution(const ConstructionParams& p, const Grid2D& g, ResolutionPolicy policy) {
  if (policy == ResolutionPolicy::strict && p.eps > 0.0 && p.eps < 4.0 * g.spacing())
    throw std::invalid_argument("eps = " + std::to_string(p.eps) + " is under-resolved on n = " + std::to_string(g.n) +
                                " (needs eps >= 4h = " + std::to_string(4.0 * g.spacing()) + ")");
}

}  // namespace detail

/// Samples Theta on the grid and differentiates spectrally, so the result is
/// divergence-free to round-off.
inline VectorField2 build_u0(const ConstructionParams& p, const Grid2D& g,
                             ResolutionPolicy policy = ResolutionPolicy::strict) {
  p.validate();
  detail::check_resolution(p, g, policy);
  const auto theta =
      ScalarField::from_values(g, detail::sample_rows(g, [&](double x, double y) { return stream_u0(p, x, y); }))
          .to_spectral();
  return {derivative(theta, Axis::y), -1.0 * derivative(theta, Axis::x)};
}

/// Closed-form gradient sampled at the nodes; valid for any eps >= 0.
inline VelocityGradient exact_gradient(const ConstructionParams& p, const Grid2D& g) {
  p.validate();
  std::vector<double> ux(g.size()), uy(g.size()), vx(g.size()), vy(g.size());
  parallel_for(static_cast<std::size_t>(g.n), 0, [&](std::size_t i) {
    const double x = g.coord(static_cast<int>(i));
    for (int j = 0; j < g.n; ++j) {
      const auto s = sample_u0(p, x, g.coord(j));
      const auto k = g.index(static_cast<int>(i), j);
      ux[k] = s.ux;
      uy[k] = s.uy;
      vx[k] = s.vx;
      vy[k] = s.vy;
    }
  });
  return {ScalarField::from_values(g, std::move(ux)), ScalarField::from_values(g, std::move(uy)),
          ScalarField::from_values(g, std::move(vx)), ScalarField::from_values(g, std::move(vy))};
}

/// omega0 = d_x v - d_y u = -Delta Theta, from the closed form.
inline ScalarField vorticity_u0(const ConstructionParams& p, const Grid2D& g) {
  p.validate();
  return ScalarField::from_values(g, detail::sample_rows(g, [&](double x, double y) {
                                    const auto s = sample_u0(p, x, y);
                                    return s.vx - s.uy;
                                  }));
}

/// Spectral gradient of a sampled velocity.
inline VelocityGradient spectral_gradient(const VectorField2& u) {
  const auto us = u.u.to_spectral();
  const auto vs = u.v.to_spectral();
  return {derivative(us, Axis::x), derivative(us, Axis::y), derivative(vs, Axis::x), derivative(vs, Axis::y)};
}

/// Pointwise determinant of a given gradient (no filtering).
inline ScalarField det_grad(const VelocityGradient& d) {
  return pointwise(d.ux, d.vy) - pointwise(d.uy, d.vx);
}

/// det(grad u) from the spectral gradient; factors and product are 2/3-rule
/// dealiased.
inline ScalarField det_grad(const VectorField2& u) {
  auto d = spectral_gradient(u);
  d = {dealias(d.ux), dealias(d.uy), dealias(d.vx), dealias(d.vy)};
  return dealias(det_grad(d));
}

/// Largest pointwise operator 2-norm of the gradient, i.e. |u|_Lip.
inline double gradient_sup_norm(const VelocityGradient& d) {
  const auto a = d.ux.physical_values(), b = d.uy.physical_values();
  const auto c = d.vx.physical_values(), e = d.vy.physical_values();
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double s = a[k] * a[k] + b[k] * b[k] + c[k] * c[k] + e[k] * e[k];
    const double det = a[k] * e[k] - b[k] * c[k];
    const double disc = std::max(0.0, s * s - 4.0 * det * det);
    m = std::max(m, std::sqrt(0.5 * (s + std::sqrt(disc))));
  }
  return m;
}

// ---- remainders ---------------------------------------------------------

enum class RemainderField { H, J };

inline std::string to_string(RemainderField f) { return f == RemainderField::H ? "H" : "J"; }

struct RemainderBound {
  RemainderField field = RemainderField::H;
  double sup_estimate = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
};

/// sup |d_xxyy G + 24 log r^2| over a polar sample of r_min <= r <= r_max.
inline RemainderBound remainder_H(double r_min, double r_max, int radial = 64, int angular = 256) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw std::invalid_argument("remainder_H needs 0 < r_min <= r_max");
  double m = 0.0;
  for (int a = 0; a < radial; ++a) {
    const double r = r_min * std::pow(r_max / r_min, radial == 1 ? 0.0 : a / double(radial - 1));
    for (int b = 0; b < angular; ++b) {
      const double th = 2.0 * std::numbers::pi * b / angular;
      const double x = r * std::cos(th), y = r * std::sin(th);
      m = std::max(m, std::abs(dxxyy_G_closed(x, y) + 24.0 * std::log(r * r)));
    }
  }
  return {RemainderField::H, m, r_min, r_max};
}

/// sup over nodes with |x| < radius of |det - eta delta d_xx Delta G_eps| / delta^2.
inline RemainderBound remainder_J(const ScalarField& det, const ConstructionParams& p, double radius = 0.5) {
  const auto& g = det.grid();
  const auto v = det.physical_values();
  double m = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = g.coord(i), y = g.coord(j);
      if (std::hypot(x, y) >= radius) continue;
      const double lead = p.eta * p.delta * dxx_laplacian_G_closed(x, y, p.eps);
      m = std::max(m, std::abs(v[g.index(i, j)] - lead));
    }
  return {RemainderField::J, m / (p.delta * p.delta), 0.0, radius};
}

}  // namespace eulerlab
