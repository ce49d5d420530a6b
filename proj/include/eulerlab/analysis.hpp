#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eulerlab/parallel.hpp"
#include "eulerlab/spectral.hpp"

namespace eulerlab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double window_min = 0.0;  // r or p window the residual refers to
  double window_max = 0.0;
  std::size_t samples = 0;
};

namespace detail {

// Least squares by modified Gram-Schmidt on the column set; returns the
// coefficient vector.
inline std::vector<double> least_squares(std::vector<std::vector<double>> cols, std::vector<double> b) {
  const std::size_t m = b.size(), k = cols.size();
  if (m < k) throw std::invalid_argument("least squares: fewer samples than unknowns");
  std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double d = 0.0;
      for (std::size_t t = 0; t < m; ++t) d += cols[i][t] * cols[j][t];
      r[i][j] = d;
      for (std::size_t t = 0; t < m; ++t) cols[j][t] -= d * cols[i][t];
    }
    double nrm = 0.0;
    for (double v : cols[j]) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw std::invalid_argument("least squares: degenerate design");
    r[j][j] = nrm;
    for (double& v : cols[j]) v /= nrm;
  }
  std::vector<double> qtb(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double d = 0.0;
    for (std::size_t t = 0; t < m; ++t) d += cols[j][t] * b[t];
    qtb[j] = d;
    for (std::size_t t = 0; t < m; ++t) b[t] -= d * cols[j][t];
  }
  std::vector<double> c(k, 0.0);
  for (std::size_t j = k; j-- > 0;) {
    double s = qtb[j];
    for (std::size_t i = j + 1; i < k; ++i) s -= r[j][i] * c[i];
    c[j] = s / r[j][j];
  }
  return c;
}

// Fits values ~ slope * log(r^2) + intercept (+ optional solid harmonics
// r^m cos/sin m theta, m = 1..harmonics).
inline FitResult fit_log_samples(const std::vector<double>& r, const std::vector<double>& th,
                                 const std::vector<double>& f, int harmonics, double r_min, double r_max) {
  if (f.empty()) throw std::invalid_argument("fit window contains no samples");
  const std::size_t m = f.size();
  std::vector<std::vector<double>> cols;
  cols.emplace_back(m);
  cols.emplace_back(m, 1.0);
  for (std::size_t t = 0; t < m; ++t) cols[0][t] = std::log(r[t] * r[t]);
  for (int h = 1; h <= harmonics; ++h) {
    std::vector<double> c(m), s(m);
    for (std::size_t t = 0; t < m; ++t) {
      const double rh = std::pow(r[t] / r_max, h);
      c[t] = rh * std::cos(h * th[t]);
      s[t] = rh * std::sin(h * th[t]);
    }
    cols.push_back(std::move(c));
    cols.push_back(std::move(s));
  }
  const auto design = cols;
  const auto coef = least_squares(std::move(cols), f);
  double res = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    double model = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) model += coef[j] * design[j][t];
    res = std::max(res, std::abs(model - f[t]));
  }
  return {coef[0], coef[1], res, r_min, r_max, m};
}

}  // namespace detail

/// Least-squares fit of f against log|x - center|^2 over the grid nodes in
/// the annulus r_min <= r <= r_max.
inline FitResult fit_log_slope(const ScalarField& f, Point2 center, double r_min, double r_max, int harmonics = 0) {
  const auto& g = f.grid();
  if (!(r_min >= 2.0 * g.spacing()))
    throw std::invalid_argument("fit window starts below two grid spacings; sample a closed form instead");
  if (!(r_max > r_min)) throw std::invalid_argument("fit window must satisfy r_min < r_max");
  const auto v = f.physical_values();
  std::vector<double> rs, ths, fs;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double dx = g.coord(i) - center.x, dy = g.coord(j) - center.y;
      const double r = std::hypot(dx, dy);
      if (r < r_min || r > r_max) continue;
      rs.push_back(r);
      ths.push_back(std::atan2(dy, dx));
      fs.push_back(v[g.index(i, j)]);
    }
  return detail::fit_log_samples(rs, ths, fs, harmonics, r_min, r_max);
}

/// Same fit for a closed-form fn(x, y), sampled on a log-polar lattice, so
/// the window may sit far below any grid scale.
template <class Fn>
FitResult fit_log_slope(Fn&& fn, Point2 center, double r_min, double r_max, int radial = 64, int angular = 64,
                        int harmonics = 0) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw std::invalid_argument("fit window must satisfy 0 < r_min < r_max");
  if (radial < 2 || angular < 1) throw std::invalid_argument("fit window contains no samples");
  std::vector<double> rs, ths, fs;
  for (int a = 0; a < radial; ++a) {
    const double r = r_min * std::pow(r_max / r_min, a / double(radial - 1));
    for (int b = 0; b < angular; ++b) {
      const double th = 2.0 * std::numbers::pi * (b + 0.5) / angular;
      rs.push_back(r);
      ths.push_back(th);
      fs.push_back(fn(center.x + r * std::cos(th), center.y + r * std::sin(th)));
    }
  }
  return detail::fit_log_samples(rs, ths, fs, harmonics, r_min, r_max);
}

// ---- L^p sweeps ---------------------------------------------------------

struct NormEntry {
  double p = 0.0;
  double norm = 0.0;
};

struct NormSeries {
  std::string field_id;
  std::vector<NormEntry> entries;

  void validate() const {
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (!(entries[k].norm >= 0.0)) throw std::invalid_argument("norm series holds a negative or NaN norm");
      if (k > 0 && !(entries[k].p > entries[k - 1].p)) throw std::invalid_argument("norm series exponents must increase");
    }
  }
};

inline const std::vector<double>& default_exponents() {
  static const std::vector<double> ps{2, 4, 8, 16, 32, 64};
  return ps;
}

/// Exponents above this concentrate the rectangle rule on a handful of cells.
inline constexpr double trusted_exponent_limit = 64.0;

template <class NormFn>
NormSeries sweep_exponents(const std::vector<double>& ps, std::string field_id, int jobs, NormFn&& norm) {
  NormSeries s{std::move(field_id), std::vector<NormEntry>(ps.size())};
  parallel_for(ps.size(), jobs, [&](std::size_t k) { s.entries[k] = {ps[k], norm(ps[k])}; });
  s.validate();
  return s;
}

inline NormSeries p_sweep(const ScalarField& f, const std::vector<double>& ps, std::string field_id = "field",
                          int jobs = 1) {
  return sweep_exponents(ps, std::move(field_id), jobs, [&](double p) { return lp_norm(f, p); });
}

/// A model c log(|x - center|^2 + eps^2) of the singular part of a field.
struct LogSingularity {
  Point2 center;
  double coefficient = 0.0;
  double eps = 0.0;

  double operator()(double x, double y) const {
    const double dx = x - center.x, dy = y - center.y;
    return coefficient * std::log(dx * dx + dy * dy + eps * eps);
  }
};

namespace detail {

struct CellQuadrature {
  std::size_t node;
  double remainder;  // f - model at the node
  double x0, y0;     // cell centre
};

// Integral of F over the triangle (c, P, Q) in polar coordinates about c,
// radial variable s = log(R / r) so log singularities at c are integrated
// without loss. Signed by orientation.
template <class Fn>
double triangle_integral(Fn&& F, double cx, double cy, double px, double py, double qx, double qy, double s_max) {
  using boost::math::quadrature::gauss;
  const double ax = px - cx, ay = py - cy, bx = qx - cx, by = qy - cy;
  const double cross = ax * by - ay * bx;
  if (std::abs(cross) < 1e-300) return 0.0;
  const double t0 = std::atan2(ay, ax);
  double t1 = std::atan2(by, bx);
  double dt = t1 - t0;
  while (dt > std::numbers::pi) dt -= 2.0 * std::numbers::pi;
  while (dt < -std::numbers::pi) dt += 2.0 * std::numbers::pi;
  // distance to the line PQ along direction theta: cross / (e x (Q - P))
  const double ex = qx - px, ey = qy - py;
  auto radial = [&](double th) {
    const double ux = std::cos(th), uy = std::sin(th);
    const double R = cross / (ux * ey - uy * ex);
    double total = 0.0;
    const int panels = static_cast<int>(std::ceil(s_max / 2.0));
    for (int k = 0; k < panels; ++k) {
      const double a = 2.0 * k, b = std::min(s_max, a + 2.0);
      total += gauss<double, 15>::integrate(
          [&](double s) {
            const double r = R * std::exp(-s);
            return F(cx + r * ux, cy + r * uy) * r * r;
          },
          a, b);
    }
    return total;
  };
  return gauss<double, 20>::integrate(radial, t0, t0 + dt);
}

}  // namespace detail

/// L^p norm with the cells around a known log singularity integrated
/// semi-analytically: there the field is modelled as model(x) + (f - model)
/// at the node, and the model part is integrated exactly in log-polar
/// coordinates. All other cells use the rectangle rule.
inline double lp_norm_with_singularity(const ScalarField& f, double p, const LogSingularity& model,
                                       double cell_radius = 1.0) {
  if (!(p >= 1.0)) throw std::invalid_argument("L^p exponent must be >= 1");
  const auto& g = f.grid();
  const double h = g.spacing();
  const auto v = f.physical_values();
  std::vector<detail::CellQuadrature> near;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = g.coord(i), y = g.coord(j);
      if (std::hypot(x - model.center.x, y - model.center.y) <= cell_radius * std::sqrt(2.0) * h)
        near.push_back({g.index(i, j), v[g.index(i, j)] - model(x, y), x, y});
    }
  // generous radial range: s^p e^{-2s} peaks near s = p/2
  const double s_max = std::isinf(p) ? 0.0 : p / 2.0 + 10.0 * std::sqrt(p) + 40.0;
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  for (const auto& c : near) {
    const double rmin = h * std::exp(-s_max);
    m = std::max(m, std::abs(model.coefficient * std::log(rmin * rmin + model.eps * model.eps) + c.remainder));
  }
  if (std::isinf(p)) return m;
  if (m == 0.0) return 0.0;
  std::vector<bool> skip(v.size(), false);
  for (const auto& c : near) skip[c.node] = true;
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!skip[k]) s += std::pow(std::abs(v[k]) / m, p) * h * h;
  for (const auto& c : near) {
    auto F = [&](double x, double y) { return std::pow(std::abs(model(x, y) + c.remainder) / m, p); };
    const double xl = c.x0 - 0.5 * h, xr = c.x0 + 0.5 * h, yl = c.y0 - 0.5 * h, yr = c.y0 + 0.5 * h;
    const double cx = model.center.x, cy = model.center.y;
    const double corners[4][2] = {{xl, yl}, {xr, yl}, {xr, yr}, {xl, yr}};
    for (int e = 0; e < 4; ++e) {
      const auto& P = corners[e];
      const auto& Q = corners[(e + 1) % 4];
      s += detail::triangle_integral(F, cx, cy, P[0], P[1], Q[0], Q[1], s_max);
    }
  }
  return m * std::pow(s, 1.0 / p);
}

inline NormSeries p_sweep(const ScalarField& f, const std::vector<double>& ps, const LogSingularity& model,
                          std::string field_id = "field", int jobs = 1) {
  return sweep_exponents(ps, std::move(field_id), jobs,
                         [&](double p) { return lp_norm_with_singularity(f, p, model); });
}

/// Fits norm ~ c p + b over entries with p >= p_min.
inline FitResult linear_lower_fit(const NormSeries& series, double p_min) {
  std::vector<double> ps, ns;
  for (const auto& e : series.entries)
    if (e.p >= p_min && std::isfinite(e.p)) {
      ps.push_back(e.p);
      ns.push_back(e.norm);
    }
  if (ps.size() < 3) throw std::invalid_argument("linear_lower_fit needs at least 3 entries with p >= p_min");
  const auto coef = detail::least_squares({ps, std::vector<double>(ps.size(), 1.0)}, ns);
  double res = 0.0;
  for (std::size_t k = 0; k < ps.size(); ++k) res = std::max(res, std::abs(coef[0] * ps[k] + coef[1] - ns[k]));
  return {coef[0], coef[1], res, ps.front(), ps.back(), ps.size()};
}

/// Mean of |f - mean_B(f)| over the nodes of B_r(center), per radius; NaN
/// when a ball holds no node.
inline std::vector<double> local_oscillation(const ScalarField& f, Point2 center, const std::vector<double>& radii) {
  const auto& g = f.grid();
  const auto v = f.physical_values();
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    std::vector<double> vals;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (std::hypot(g.coord(i) - center.x, g.coord(j) - center.y) < r) vals.push_back(v[g.index(i, j)]);
    if (vals.empty()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double mean = 0.0;
    for (double x : vals) mean += x;
    mean /= static_cast<double>(vals.size());
    double osc = 0.0;
    for (double x : vals) osc += std::abs(x - mean);
    out.push_back(osc / static_cast<double>(vals.size()));
  }
  return out;
}

// ---- CSV ----------------------------------------------------------------

inline constexpr const char* norm_series_header = "field_id,p,norm";
inline constexpr const char* fit_header = "field_id,slope,intercept,residual,r_min,r_max";

inline void write_norm_series_csv(std::ostream& os, const std::vector<NormSeries>& series) {
  os << norm_series_header << '\n' << std::setprecision(17);
  for (const auto& s : series)
    for (const auto& e : s.entries) os << s.field_id << ',' << e.p << ',' << e.norm << '\n';
}

inline void write_fit_csv(std::ostream& os, const std::vector<std::pair<std::string, FitResult>>& fits) {
  os << fit_header << '\n' << std::setprecision(17);
  for (const auto& [id, f] : fits)
    os << id << ',' << f.slope << ',' << f.intercept << ',' << f.max_residual << ',' << f.window_min << ','
       << f.window_max << '\n';
}

}  // namespace eulerlab
