#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eulerlab/field.hpp"
#include "eulerlab/interp.hpp"
#include "eulerlab/parallel.hpp"
#include "eulerlab/spectral.hpp"

namespace eulerlab {

/// Tracer positions at x +- tau e_x and x +- tau e_y, for accurate
/// derivatives of the map. Order: +x, -x, +y, -y.
struct FlowStencil {
  double tau = 0.0;
  std::vector<VectorField2> sides;
};

/// Lagrangian map on the nodes of a label grid. Positions are not wrapped
/// into the fundamental box, so Phi - Id is periodic.
struct FlowMap {
  VectorField2 positions;
  double time = 0.0;
  std::shared_ptr<const FlowMap> inverse;
  std::shared_ptr<const FlowStencil> stencil;
  // non-empty: Phi(x, y_j) = (x + row_shift[j], y_j) exactly
  std::vector<double> row_shift;
  // some tracer left the fundamental box [-L/2, L/2]^2
  bool seam_crossed = false;

  const Grid2D& grid() const { return positions.grid(); }
};

namespace detail {

inline VectorField2 identity_positions(const Grid2D& g) {
  return {ScalarField::sample(g, [](double x, double) { return x; }),
          ScalarField::sample(g, [](double, double y) { return y; })};
}

inline FlowMap row_map(const Grid2D& g, std::vector<double> shift) {
  auto u = ScalarField::sample(g, [](double x, double) { return x; }).physical_values();
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) u[g.index(i, j)] += shift[j];
  FlowMap m{{ScalarField::from_values(g, std::move(u)), ScalarField::sample(g, [](double, double y) { return y; })}};
  m.row_shift = std::move(shift);
  return m;
}

}  // namespace detail

inline FlowMap identity_map(const Grid2D& g) { return detail::row_map(g, std::vector<double>(g.n, 0.0)); }

inline FlowMap translation_map(const Grid2D& g, double a, double b) {
  FlowMap m{{ScalarField::sample(g, [&](double x, double) { return x + a; }),
             ScalarField::sample(g, [&](double, double y) { return y + b; })}};
  m.inverse = std::make_shared<FlowMap>(FlowMap{{ScalarField::sample(g, [&](double x, double) { return x - a; }),
                                                 ScalarField::sample(g, [&](double, double y) { return y - b; })}});
  return m;
}

/// Measure-preserving shear Phi(x, y) = (x + a sin(2 pi y / L), y) and its
/// inverse (a -> -a).
inline FlowMap shear_map(const Grid2D& g, double a) {
  std::vector<double> s(g.n), minus(g.n);
  for (int j = 0; j < g.n; ++j) {
    s[j] = a * std::sin(2.0 * std::numbers::pi * g.coord(j) / g.length);
    minus[j] = -s[j];
  }
  auto m = detail::row_map(g, std::move(s));
  m.inverse = std::make_shared<FlowMap>(detail::row_map(g, std::move(minus)));
  return m;
}

/// Velocity of a sampled field frozen in time, evaluated off-grid through
/// the trigonometric interpolant.
class FrozenVelocity {
 public:
  explicit FrozenVelocity(const VectorField2& u) : u_(u.u), v_(u.v) {}
  std::array<double, 2> operator()(double x, double y, double) const { return {u_(x, y), v_(x, y)}; }

 private:
  TrigInterpolant u_, v_;
};

/// Recorded snapshots, linear in time between them and constant outside.
class SnapshotVelocity {
 public:
  void add(double t, const VectorField2& u) {
    if (!times_.empty() && t <= times_.back()) throw std::invalid_argument("snapshot times must increase");
    times_.push_back(t);
    fields_.emplace_back(u);
  }

  std::array<double, 2> operator()(double x, double y, double t) const {
    if (times_.empty()) throw std::logic_error("no velocity snapshots recorded");
    if (t <= times_.front()) return fields_.front()(x, y, t);
    if (t >= times_.back()) return fields_.back()(x, y, t);
    const auto k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
    const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
    const auto a = fields_[k - 1](x, y, t), b = fields_[k](x, y, t);
    return {(1 - w) * a[0] + w * b[0], (1 - w) * a[1] + w * b[1]};
  }

 private:
  std::vector<double> times_;
  std::vector<FrozenVelocity> fields_;
};

struct AdvectOptions {
  double t0 = 0.0;
  double stencil_tau = 0.0;  // > 0: also carry the four side tracers
  bool with_inverse = false;
  int jobs = 0;
};

namespace detail {

// RK4 for dX/ds = u(X, s), s from t0 to t1, one tracer.
template <class Velocity>
Point2 integrate_tracer(const Velocity& u, Point2 p, double t0, double t1, int steps) {
  const double dt = (t1 - t0) / steps;
  double s = t0;
  for (int k = 0; k < steps; ++k) {
    const auto k1 = u(p.x, p.y, s);
    const auto k2 = u(p.x + 0.5 * dt * k1[0], p.y + 0.5 * dt * k1[1], s + 0.5 * dt);
    const auto k3 = u(p.x + 0.5 * dt * k2[0], p.y + 0.5 * dt * k2[1], s + 0.5 * dt);
    const auto k4 = u(p.x + dt * k3[0], p.y + dt * k3[1], s + dt);
    p.x += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    p.y += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    s = t0 + (k + 1) * dt;
  }
  return p;
}

template <class Velocity>
VectorField2 advect_nodes(const Velocity& u, const Grid2D& g, Point2 offset, double t0, double t1, int steps, int jobs,
                          bool& seam) {
  std::vector<double> px(g.size()), py(g.size());
  parallel_for(g.size(), jobs, [&](std::size_t k) {
    const int i = static_cast<int>(k) / g.n, j = static_cast<int>(k) % g.n;
    const auto q = integrate_tracer(u, {g.coord(i) + offset.x, g.coord(j) + offset.y}, t0, t1, steps);
    if (!std::isfinite(q.x) || !std::isfinite(q.y)) throw std::runtime_error("tracer position became non-finite");
    px[k] = q.x;
    py[k] = q.y;
  });
  const double half = 0.5 * g.length;
  for (std::size_t k = 0; k < px.size(); ++k)
    if (std::abs(px[k]) > half || std::abs(py[k]) > half) seam = true;
  return {ScalarField::from_values(g, std::move(px)), ScalarField::from_values(g, std::move(py))};
}

template <class Velocity>
FlowMap advect_from(const Velocity& u, const Grid2D& g, double t0, double t1, int steps, const AdvectOptions& opt) {
  bool seam = false;
  FlowMap m{advect_nodes(u, g, {}, t0, t1, steps, opt.jobs, seam)};
  m.time = t1 - t0;
  if (opt.stencil_tau > 0) {
    auto st = std::make_shared<FlowStencil>();
    st->tau = opt.stencil_tau;
    const double s = opt.stencil_tau;
    for (Point2 off : {Point2{s, 0}, Point2{-s, 0}, Point2{0, s}, Point2{0, -s}})
      st->sides.push_back(advect_nodes(u, g, off, t0, t1, steps, opt.jobs, seam));
    m.stencil = std::move(st);
  }
  m.seam_crossed = seam;
  return m;
}

}  // namespace detail

/// Phi(., t): RK4 tracers started on the nodes of g at time opt.t0 and
/// carried to opt.t0 + t with steps of at most |dt|. With opt.with_inverse,
/// the inverse is obtained by integrating from opt.t0 + t back to opt.t0,
/// which for a frozen field is Phi(., -t).
template <class Velocity>
FlowMap advect_tracers(const Velocity& u, const Grid2D& g, double t, double dt, const AdvectOptions& opt = {}) {
  if (!(std::abs(dt) > 0)) throw std::invalid_argument("time step must be nonzero");
  if (opt.stencil_tau < 0) throw std::invalid_argument("stencil spacing must be >= 0");
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / std::abs(dt) - 1e-12)));
  auto m = detail::advect_from(u, g, opt.t0, opt.t0 + t, steps, opt);
  if (opt.with_inverse) {
    auto inv = detail::advect_from(u, g, opt.t0 + t, opt.t0, steps, opt);
    inv.time = -t;
    m.seam_crossed = m.seam_crossed || inv.seam_crossed;
    m.inverse = std::make_shared<FlowMap>(std::move(inv));
  }
  return m;
}

/// Lagrangian map of a velocity field frozen in time.
inline FlowMap advect_tracers(const VectorField2& u, double t, double dt, AdvectOptions opt = {}) {
  return advect_tracers(FrozenVelocity(u), u.grid(), t, dt, opt);
}

namespace detail {

// d(Phi)/dx and d(Phi)/dy at every node: the stencil when present, else
// periodic central differences of Phi - Id.
struct MapGradient {
  std::vector<double> xx, xy, yx, yy;  // d_j Phi_i
};

inline MapGradient map_gradient(const FlowMap& m) {
  const auto& g = m.grid();
  const auto px = m.positions.u.physical_values(), py = m.positions.v.physical_values();
  MapGradient d{std::vector<double>(g.size()), std::vector<double>(g.size()), std::vector<double>(g.size()),
                std::vector<double>(g.size())};
  if (m.stencil) {
    const auto& s = m.stencil->sides;
    const double w = 0.5 / m.stencil->tau;
    const auto a = s[0].u.physical_values(), b = s[1].u.physical_values(), c = s[2].u.physical_values(),
               e = s[3].u.physical_values();
    const auto A = s[0].v.physical_values(), B = s[1].v.physical_values(), C = s[2].v.physical_values(),
               E = s[3].v.physical_values();
    for (std::size_t k = 0; k < g.size(); ++k) {
      d.xx[k] = (a[k] - b[k]) * w;
      d.xy[k] = (c[k] - e[k]) * w;
      d.yx[k] = (A[k] - B[k]) * w;
      d.yy[k] = (C[k] - E[k]) * w;
    }
    return d;
  }
  const int n = g.n;
  const double w = 0.5 / g.spacing();
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1) % n, im = (i + n - 1) % n;
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      const auto k = g.index(i, j);
      // displacement differences; the identity part contributes exactly 1
      auto disp_x = [&](int a, int b) { return px[g.index(a, b)] - g.coord(a); };
      auto disp_y = [&](int a, int b) { return py[g.index(a, b)] - g.coord(b); };
      d.xx[k] = 1.0 + (disp_x(ip, j) - disp_x(im, j)) * w;
      d.xy[k] = (disp_x(i, jp) - disp_x(i, jm)) * w;
      d.yx[k] = (disp_y(ip, j) - disp_y(im, j)) * w;
      d.yy[k] = 1.0 + (disp_y(i, jp) - disp_y(i, jm)) * w;
    }
  }
  return d;
}

inline double operator_norm_2x2(double a, double b, double c, double d) {
  const double s = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  return std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4 * det * det))));
}

}  // namespace detail

/// |Phi - Id|_Lip estimated as the largest pointwise operator norm of the
/// discrete gradient of the displacement.
inline double displacement_lipschitz(const FlowMap& m) {
  const auto d = detail::map_gradient(m);
  double K = 0.0;
  for (std::size_t k = 0; k < d.xx.size(); ++k)
    K = std::max(K, detail::operator_norm_2x2(d.xx[k] - 1.0, d.xy[k], d.yx[k], d.yy[k] - 1.0));
  return K;
}

inline ScalarField jacobian_det(const FlowMap& m) {
  const auto d = detail::map_gradient(m);
  std::vector<double> v(d.xx.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = d.xx[k] * d.yy[k] - d.xy[k] * d.yx[k];
  return ScalarField::from_values(m.grid(), std::move(v));
}

struct LipschitzReport {
  double t = 0.0;
  double K_forward = 0.0;
  double K_inverse = std::numeric_limits<double>::quiet_NaN();  // NaN without an inverse map
  double K = 0.0;
  double bound_rhs = 0.0;

  bool holds(double slack = 0.05) const { return K <= bound_rhs * (1.0 + slack); }
};

inline LipschitzReport lipschitz_report(const FlowMap& m, double u_lip, double t) {
  LipschitzReport r;
  r.t = t;
  r.K_forward = displacement_lipschitz(m);
  r.K = r.K_forward;
  if (m.inverse) {
    r.K_inverse = displacement_lipschitz(*m.inverse);
    r.K = std::max(r.K, r.K_inverse);
  }
  const double a = std::abs(t) * u_lip;
  r.bound_rhs = a * std::exp(a);
  return r;
}

/// Largest |Phi(Phi^-1(x)) - x| over the nodes, composing through the
/// interpolant of the displacement.
inline double inverse_defect(const FlowMap& m) {
  if (!m.inverse) throw std::invalid_argument("flow map carries no inverse");
  const auto& g = m.grid();
  const auto ix = m.inverse->positions.u.physical_values(), iy = m.inverse->positions.v.physical_values();
  std::vector<Point2> pts(g.size());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = {ix[k], iy[k]};
  const auto dx = m.positions.u - detail::identity_positions(g).u;
  const auto dy = m.positions.v - detail::identity_positions(g).v;
  const auto ex = interpolate_at(dx, pts), ey = interpolate_at(dy, pts);
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const auto k = g.index(i, j);
      worst = std::max(worst, std::hypot(ix[k] + ex[k] - g.coord(i), iy[k] + ey[k] - g.coord(j)));
    }
  return worst;
}

/// omega o Phi on the label grid via the trigonometric interpolant.
inline ScalarField compose(const ScalarField& omega, const FlowMap& m) {
  if (!(omega.grid() == m.grid())) throw std::invalid_argument("field and flow map live on different grids");
  if (!m.row_shift.empty()) return shift_rows(omega, m.row_shift);
  const auto& g = m.grid();
  const auto px = m.positions.u.physical_values(), py = m.positions.v.physical_values();
  std::vector<Point2> pts(g.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!std::isfinite(px[k]) || !std::isfinite(py[k])) throw std::runtime_error("interpolation failure: non-finite tracer");
    pts[k] = {px[k], py[k]};
  }
  return ScalarField::from_values(g, interpolate_at(omega, pts));
}

/// Transpose of compose(., m) for the plain sum over nodes.
inline ScalarField compose_adjoint(const ScalarField& f, const FlowMap& m) {
  if (!m.row_shift.empty()) {
    std::vector<double> minus(m.row_shift.size());
    for (std::size_t j = 0; j < minus.size(); ++j) minus[j] = -m.row_shift[j];
    return shift_rows(f, minus);
  }
  const auto& g = m.grid();
  const auto px = m.positions.u.physical_values(), py = m.positions.v.physical_values();
  std::vector<Point2> pts(g.size());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = {px[k], py[k]};
  return interpolate_adjoint(g, f.physical_values(), pts);
}

inline MultiplierSpec adjoint_symbol(const MultiplierSpec& r) {
  return {[s = r.symbol](double kx, double ky) { return std::conj(s(kx, ky)); }, std::conj(r.zero_mode)};
}

/// [R, Phi] omega = R(omega o Phi) - (R omega) o Phi.
inline ScalarField apply_commutator(const MultiplierSpec& R, const FlowMap& m, const ScalarField& omega) {
  return apply(R, compose(omega, m)) - compose(apply(R, omega), m);
}

inline ScalarField apply_commutator_adjoint(const MultiplierSpec& R, const FlowMap& m, const ScalarField& f) {
  const auto Ra = adjoint_symbol(R);
  return compose_adjoint(apply(Ra, f), m) - apply(Ra, compose_adjoint(f, m));
}

/// K below this counts as a map without Lipschitz scale (identity, translations).
inline constexpr double zero_map_tolerance = 1e-12;

struct CommutatorEstimate {
  double p = 2.0;
  double K = 0.0;
  double opnorm_lower = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  bool zero_map = false;
};

struct OpnormOptions {
  int iterations = 40;
  int band = 0;  // test-function modes max(|k1|, |k2|) <= band; 0 means n/4
  int jobs = 0;
};

namespace detail {

inline ScalarField random_band_limited(const Grid2D& g, int band, std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> nd;
  std::vector<cplx> modes(g.spectral_size(), 0.0);
  for_each_mode(g, [&](std::size_t idx, int k1, int k2) {
    if (std::max(std::abs(k1), k2) <= band) modes[idx] = {nd(rng), nd(rng)};
  });
  return ScalarField::from_modes(g, std::move(modes)).to_physical();
}

// x -> sign(x) |x / max|x||^e
inline ScalarField signed_power(const ScalarField& f, double e) {
  auto v = f.physical_values();
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return f;
  for (double& x : v) x = std::copysign(std::pow(std::abs(x) / m, e), x);
  return ScalarField::from_values(f.grid(), std::move(v));
}

}  // namespace detail

/// Lower estimate of ||[R, Phi]||_{L^p -> L^p}: Boyd's nonlinear power
/// iteration from random band-limited starts, trial i seeded by (seed, i).
/// The result is the largest ||[R, Phi] x||_p / ||x||_p seen.
inline CommutatorEstimate estimate_opnorm(const MultiplierSpec& R, const FlowMap& m, double p, int trials,
                                          std::uint64_t seed, const OpnormOptions& opt = {}) {
  if (trials < 16) throw std::invalid_argument("estimate_opnorm needs at least 16 trials");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent must satisfy 1 < p < inf");
  const auto& g = m.grid();
  const int band = opt.band > 0 ? opt.band : g.n / 4;
  const double q = p / (p - 1.0);
  CommutatorEstimate est;
  est.p = p;
  est.trials = trials;
  est.seed = seed;
  est.K = displacement_lipschitz(m);
  if (m.inverse) est.K = std::max(est.K, displacement_lipschitz(*m.inverse));
  est.zero_map = est.K < zero_map_tolerance;
  std::vector<double> best(static_cast<std::size_t>(trials), 0.0);
  parallel_for(best.size(), opt.jobs, [&](std::size_t t) {
    auto x = detail::random_band_limited(g, band, seed, static_cast<int>(t));
    x = (1.0 / lp_norm(x, p)) * x;
    double b = 0.0;
    for (int it = 0; it <= opt.iterations; ++it) {
      const auto y = apply_commutator(R, m, x);
      b = std::max(b, lp_norm(y, p));
      if (it == opt.iterations) break;
      const auto z = apply_commutator_adjoint(R, m, detail::signed_power(y, p - 1.0));
      const auto nx = detail::signed_power(z, q - 1.0);
      const double nrm = lp_norm(nx, p);
      if (!(nrm > 0.0)) break;
      x = (1.0 / nrm) * nx;
    }
    best[t] = b;
  });
  est.opnorm_lower = *std::max_element(best.begin(), best.end());
  return est;
}

inline constexpr const char* commutator_header = "p,K,opnorm_lower,trials,seed";
inline constexpr const char* lipschitz_header = "t,K_forward,K_inverse,bound_rhs";

inline void write_commutator_csv(std::ostream& os, const std::vector<CommutatorEstimate>& rows) {
  os << commutator_header << '\n' << std::setprecision(17);
  for (const auto& r : rows) os << r.p << ',' << r.K << ',' << r.opnorm_lower << ',' << r.trials << ',' << r.seed << '\n';
}

inline void write_lipschitz_csv(std::ostream& os, const std::vector<LipschitzReport>& rows) {
  os << lipschitz_header << '\n' << std::setprecision(17);
  for (const auto& r : rows) os << r.t << ',' << r.K_forward << ',' << r.K_inverse << ',' << r.bound_rhs << '\n';
}

}  // namespace eulerlab
