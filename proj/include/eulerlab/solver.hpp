#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eulerlab/analysis.hpp"
#include "eulerlab/interp.hpp"
#include "eulerlab/spectral.hpp"

namespace eulerlab {

/// omega = d_x v - d_y u.
inline ScalarField curl(const VectorField2& u) {
  return derivative(u.v.to_spectral(), Axis::x) - derivative(u.u.to_spectral(), Axis::y);
}

/// u = (-psi_y, psi_x) with Delta psi = omega - mean(omega). The removed
/// mean is reported so callers can flag non-zero-mean input.
inline VectorField2 biot_savart(const ScalarField& omega, double* removed_mean = nullptr) {
  const auto psi = apply_spectral(inverse_laplacian_symbol(), omega.to_spectral());
  if (removed_mean) *removed_mean = omega.mean();
  return {-1.0 * derivative(psi, Axis::y), derivative(psi, Axis::x)};
}

/// Pseudospectral right-hand side -u.grad(omega) of the vorticity equation,
/// with cached wavenumber tables for one grid.
class EulerStepper {
 public:
  explicit EulerStepper(const Grid2D& g, bool dealias = true) : g_(g), dealias_(dealias) {
    const std::size_t m = g.spectral_size();
    ikx_.resize(m);
    iky_.resize(m);
    inv_k2_.resize(m);
    keep_.resize(m);
    weight_.resize(m);
    const int nyq = g.n / 2;
    for_each_mode(g, [&](std::size_t idx, int k1, int k2) {
      const double kx = wavenumber(k1, g), ky = wavenumber(k2, g);
      ikx_[idx] = std::abs(k1) == nyq ? 0.0 : kx;
      iky_[idx] = k2 == nyq ? 0.0 : ky;
      const double k2sum = kx * kx + ky * ky;
      inv_k2_[idx] = k2sum == 0.0 ? 0.0 : 1.0 / k2sum;
      keep_[idx] = !dealias || retained_by_two_thirds_rule(k1, k2, g.n);
      weight_[idx] = (k2 == 0 || k2 == nyq) ? 1.0 : 2.0;
    });
  }

  const Grid2D& grid() const { return g_; }
  bool dealiasing() const { return dealias_; }

  std::vector<cplx> filter(std::vector<cplx> w) const {
    for (std::size_t k = 0; k < w.size(); ++k)
      if (!keep_[k]) w[k] = 0.0;
    return w;
  }

  std::vector<cplx> rhs(const std::vector<cplx>& w) const {
    const std::size_t m = w.size();
    std::vector<cplx> a(m), b(m), c(m), d(m);
    for (std::size_t k = 0; k < m; ++k) {
      const cplx psi = -w[k] * inv_k2_[k];
      a[k] = cplx(0.0, -iky_[k]) * psi;  // u = -psi_y
      b[k] = cplx(0.0, ikx_[k]) * psi;   // v = psi_x
      c[k] = cplx(0.0, ikx_[k]) * w[k];
      d[k] = cplx(0.0, iky_[k]) * w[k];
    }
    const auto u = fft::inverse(g_.n, a), v = fft::inverse(g_.n, b);
    const auto wx = fft::inverse(g_.n, c), wy = fft::inverse(g_.n, d);
    std::vector<double> adv(u.size());
    for (std::size_t k = 0; k < adv.size(); ++k) adv[k] = u[k] * wx[k] + v[k] * wy[k];
    auto out = fft::forward(g_.n, adv);
    for (std::size_t k = 0; k < m; ++k) out[k] = keep_[k] ? -out[k] : cplx(0.0);
    return out;
  }

  std::vector<cplx> step(const std::vector<cplx>& w, double dt) const {
    const std::size_t m = w.size();
    auto axpy = [&](const std::vector<cplx>& k, double s) {
      std::vector<cplx> r(m);
      for (std::size_t i = 0; i < m; ++i) r[i] = w[i] + s * k[i];
      return r;
    };
    const auto k1 = rhs(w);
    const auto k2 = rhs(axpy(k1, 0.5 * dt));
    const auto k3 = rhs(axpy(k2, 0.5 * dt));
    const auto k4 = rhs(axpy(k3, dt));
    std::vector<cplx> out(m);
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = w[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag()))
        throw std::runtime_error("vorticity became non-finite during an RK4 step (dt = " + std::to_string(dt) + ")");
    }
    return out;
  }

  /// (1/2) int |u|^2 by Parseval.
  double energy(const std::vector<cplx>& w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += weight_[k] * std::norm(w[k]) * inv_k2_[k];
    return 0.5 * g_.area() * s;
  }

  /// (1/2) int omega^2 by Parseval.
  double enstrophy(const std::vector<cplx>& w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += weight_[k] * std::norm(w[k]);
    return 0.5 * g_.area() * s;
  }

  /// Share of the energy held in the outermost retained band n/4 < |k|_inf <= n/3.
  double tail_fraction(const std::vector<cplx>& w) const {
    double tail = 0.0, total = 0.0;
    for_each_mode(g_, [&](std::size_t idx, int k1, int k2) {
      const double e = weight_[idx] * std::norm(w[idx]) * inv_k2_[idx];
      total += e;
      const int kinf = std::max(std::abs(k1), k2);
      if (4 * kinf > g_.n && 3 * kinf <= g_.n) tail += e;
    });
    return total == 0.0 ? 0.0 : tail / total;
  }

  double max_speed(const std::vector<cplx>& w) const {
    const std::size_t m = w.size();
    std::vector<cplx> a(m), b(m);
    for (std::size_t k = 0; k < m; ++k) {
      const cplx psi = -w[k] * inv_k2_[k];
      a[k] = cplx(0.0, -iky_[k]) * psi;
      b[k] = cplx(0.0, ikx_[k]) * psi;
    }
    const auto u = fft::inverse(g_.n, a), v = fft::inverse(g_.n, b);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s = std::max(s, std::hypot(u[k], v[k]));
    return s;
  }

 private:
  Grid2D g_;
  bool dealias_;
  std::vector<double> ikx_, iky_, inv_k2_, weight_;
  std::vector<bool> keep_;
};

/// One classical RK4 step of the vorticity equation.
inline ScalarField step_rk4(const ScalarField& omega, double dt, bool dealias = true) {
  const EulerStepper s(omega.grid(), dealias);
  return ScalarField::from_modes(omega.grid(), s.step(omega.spectral_modes(), dt)).to_physical();
}

namespace detail {

// Components of D^k u as separate fields (ordered a = 0..k, u then v).
inline std::vector<std::vector<double>> derivative_components(const ScalarField& omega, int k) {
  const auto psi = apply_spectral(inverse_laplacian_symbol(), omega.to_spectral());
  std::vector<std::vector<double>> out;
  for (int a = 0; a <= k; ++a) {
    const int b = k - a;
    for (int comp = 0; comp < 2; ++comp) {
      const MultiplierSpec m{[a, b, comp](double kx, double ky) {
                               cplx s = comp == 0 ? -cplx(0.0, ky) : cplx(0.0, kx);
                               for (int i = 0; i < a; ++i) s *= cplx(0.0, kx);
                               for (int i = 0; i < b; ++i) s *= cplx(0.0, ky);
                               return s;
                             },
                             0.0};
      out.push_back(apply(m, psi).physical_values());
    }
  }
  return out;
}

}  // namespace detail

/// Pointwise Frobenius norm of D^k u for the velocity of omega (all k-th
/// partials of both components, counted with multiplicity).
inline ScalarField derivative_tensor_norm(const ScalarField& omega, int k) {
  if (k < 1) throw std::invalid_argument("derivative order k must be >= 1");
  const auto comps = detail::derivative_components(omega, k);
  std::vector<double> acc(omega.grid().size(), 0.0);
  double binom = 1.0;
  for (int a = 0; a <= k; ++a) {
    for (int c = 0; c < 2; ++c) {
      const auto& f = comps[2 * a + c];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += binom * f[i] * f[i];
    }
    binom = binom * (k - a) / (a + 1);
  }
  for (double& v : acc) v = std::sqrt(v);
  return ScalarField::from_values(omega.grid(), std::move(acc));
}

struct SolverConfig {
  int n = 512;
  double cfl = 0.5;
  double t_end = 0.05;
  int k = 1;
  bool dealias = true;
  int record_every = 1;
  double track_radius = 0.5;      // window for the localized diagnostics
  double fixed_dt = 0.0;          // > 0 overrides the CFL rule
  std::vector<double> snapshot_ps;  // L^p exponents of |D^k u| per record

  void validate() const {
    if (n < 8 || n % 2 != 0) throw std::invalid_argument("solver n must be even and >= 8");
    if (!(cfl > 0.0)) throw std::invalid_argument("cfl must be > 0");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    if (!(fixed_dt >= 0.0)) throw std::invalid_argument("fixed_dt must be >= 0");
  }
  bool operator==(const SolverConfig&) const = default;
};

struct GrowthRecord {
  std::vector<double> times;
  std::vector<double> sup_norms;                // sup |D^k u|
  std::vector<double> window_sup_norms;         // sup over B_{track_radius}
  std::vector<double> increment_sups;           // sup |D^k u(t) - D^k u(0)|
  std::vector<double> window_increment_sups;    // same, over B_{track_radius}
  std::vector<double> energy;
  std::vector<double> enstrophy;
  std::vector<double> omega_sup;
  std::vector<double> tail_fraction;
  std::vector<NormSeries> lp_snapshots;
  bool resolution_loss = false;
  std::optional<ScalarField> final_vorticity;
  int steps = 0;

  static double relative_drift(const std::vector<double>& s) {
    if (s.empty() || s.front() == 0.0) return 0.0;
    double d = 0.0;
    for (double v : s) d = std::max(d, std::abs(v - s.front()) / std::abs(s.front()));
    return d;
  }
  double energy_drift() const { return relative_drift(energy); }
  double enstrophy_drift() const { return relative_drift(enstrophy); }
  double omega_sup_drift() const { return relative_drift(omega_sup); }
};

/// Resolution-loss threshold on the retained-band energy fraction.
inline constexpr double tail_fraction_limit = 1e-4;


/// Integrates the vorticity equation from omega0 to cfg.t_end, recording
/// norms of D^k u and conservation diagnostics.
inline GrowthRecord evolve_and_track(const ScalarField& omega0, const SolverConfig& cfg) {
  cfg.validate();
  const auto& g = omega0.grid();
  if (g.n != cfg.n) throw std::invalid_argument("initial vorticity grid does not match solver n");
  const EulerStepper stepper(g, cfg.dealias);
  auto w = stepper.filter(omega0.spectral_modes());

  std::vector<double> binom(cfg.k + 1, 1.0);
  for (int a = 1; a <= cfg.k; ++a) binom[a] = binom[a - 1] * (cfg.k - a + 1) / a;
  std::vector<bool> in_window(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) in_window[g.index(i, j)] = std::hypot(g.coord(i), g.coord(j)) < cfg.track_radius;

  GrowthRecord rec;
  std::vector<std::vector<double>> initial;
  auto record = [&](double t) {
    const auto field = ScalarField::from_modes(g, w);
    const auto comps = detail::derivative_components(field, cfg.k);
    if (initial.empty()) initial = comps;
    std::vector<double> norm(g.size(), 0.0), inc(g.size(), 0.0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const double mult = binom[c / 2];
      for (std::size_t i = 0; i < norm.size(); ++i) {
        norm[i] += mult * comps[c][i] * comps[c][i];
        const double d = comps[c][i] - initial[c][i];
        inc[i] += mult * d * d;
      }
    }
    double s = 0, ws = 0, is = 0, wis = 0;
    for (std::size_t i = 0; i < norm.size(); ++i) {
      norm[i] = std::sqrt(norm[i]);
      inc[i] = std::sqrt(inc[i]);
      s = std::max(s, norm[i]);
      is = std::max(is, inc[i]);
      if (in_window[i]) {
        ws = std::max(ws, norm[i]);
        wis = std::max(wis, inc[i]);
      }
    }
    rec.times.push_back(t);
    rec.sup_norms.push_back(s);
    rec.window_sup_norms.push_back(ws);
    rec.increment_sups.push_back(is);
    rec.window_increment_sups.push_back(wis);
    rec.energy.push_back(stepper.energy(w));
    rec.enstrophy.push_back(stepper.enstrophy(w));
    rec.omega_sup.push_back(std::abs(interpolated_sup(field, 2, 8).value));
    const double tail = stepper.tail_fraction(w);
    rec.tail_fraction.push_back(tail);
    if (tail > tail_fraction_limit) rec.resolution_loss = true;
    if (!cfg.snapshot_ps.empty())
      rec.lp_snapshots.push_back(p_sweep(ScalarField::from_values(g, norm), cfg.snapshot_ps, "t=" + std::to_string(t)));
  };

  const double h = g.spacing();
  double t = 0.0;
  record(t);
  int step = 0;
  while (t < cfg.t_end * (1.0 - 1e-12)) {
    double dt = cfg.fixed_dt > 0.0 ? cfg.fixed_dt : cfg.cfl * h / std::max(1.0, stepper.max_speed(w));
    if (t + dt > cfg.t_end) dt = cfg.t_end - t;
    w = stepper.step(w, dt);
    t += dt;
    ++step;
    if (step % cfg.record_every == 0 || t >= cfg.t_end * (1.0 - 1e-12)) record(t);
  }
  rec.steps = step;
  rec.final_vorticity = ScalarField::from_modes(g, w).to_physical();
  return rec;
}

inline GrowthRecord evolve_and_track(const VectorField2& u0, const SolverConfig& cfg) {
  return evolve_and_track(curl(u0), cfg);
}

inline constexpr const char* growth_header = "t,sup_Dk,energy,enstrophy";
inline constexpr const char* growth_diagnostics_header =
    "t,window_sup_Dk,increment_sup_Dk,window_increment_sup_Dk,omega_sup,tail_fraction";

inline void write_growth_csv(std::ostream& os, const GrowthRecord& r) {
  os << growth_header << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < r.times.size(); ++i)
    os << r.times[i] << ',' << r.sup_norms[i] << ',' << r.energy[i] << ',' << r.enstrophy[i] << '\n';
}

inline void write_growth_diagnostics_csv(std::ostream& os, const GrowthRecord& r) {
  os << growth_diagnostics_header << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < r.times.size(); ++i)
    os << r.times[i] << ',' << r.window_sup_norms[i] << ',' << r.increment_sups[i] << ','
       << r.window_increment_sups[i] << ',' << r.omega_sup[i] << ',' << r.tail_fraction[i] << '\n';
}

}  // namespace eulerlab
