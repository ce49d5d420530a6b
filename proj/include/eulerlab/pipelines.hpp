#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "eulerlab/analysis.hpp"
#include "eulerlab/construction.hpp"
#include "eulerlab/lagrange.hpp"
#include "eulerlab/solver.hpp"

namespace eulerlab {

/// Pass/fail of one named property with a human-readable measurement.
struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace detail

inline double max_over_min(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

/// R2R2 det(grad u0) from the closed-form gradient sampled on g (any eps).
inline ScalarField pressure_hessian(const ConstructionParams& p, const Grid2D& g) {
  return apply(riesz_symbol(2, 2), det_grad(exact_gradient(p, g)));
}

/// The log-singularity the pressure Hessian is expected to carry at 0.
inline LogSingularity expected_singularity(const ConstructionParams& p) {
  return {{}, -24.0 * p.eta * p.delta, p.eps};
}

// ---- fit-log ---------------------------------------------------------------

struct LogFitResult {
  FitResult hessian;       // R2R2 det(grad u0) on the grid
  FitResult closed_dxxyy;  // closed-form d_xxyy G below grid scale
  double target = 0.0;     // -24 eta delta
  std::vector<std::array<double, 2>> samples;  // (log r^2, value) inside the window
};

inline LogFitResult run_fit_log(const ConstructionParams& p, const Grid2D& g, double r_min, double r_max, int harmonics) {
  const double lo = r_min > 0 ? r_min : 4.0 * g.spacing();
  const auto f = pressure_hessian(p, g);
  LogFitResult out;
  out.hessian = fit_log_slope(f, {}, lo, r_max, harmonics);
  out.closed_dxxyy = fit_log_slope([](double x, double y) { return dxxyy_G_closed(x, y); }, {}, 1e-4, 1e-2);
  out.target = -24.0 * p.eta * p.delta;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double r = std::hypot(g.coord(i), g.coord(j));
      if (r >= lo && r <= r_max) out.samples.push_back({std::log(r * r), f.at(i, j)});
    }
  return out;
}

inline Check check_fit_log(const LogFitResult& r, double tol = 0.10) {
  const double rel = r.hessian.slope / r.target - 1.0;
  return {"fit-log slope", std::abs(rel) <= tol,
          "slope " + detail::num(r.hessian.slope) + " vs -24*eta*delta " + detail::num(r.target) +
              " (rel " + detail::num(rel) + ", tol " + detail::num(tol) + ")"};
}

// ---- psweep ----------------------------------------------------------------

struct PSweepResult {
  NormSeries series;
  FitResult linear;  // norm against p over p >= p_min
  double p_min = 8;
};

inline PSweepResult run_psweep(const ConstructionParams& p, const Grid2D& g, const std::vector<double>& ps, double p_min,
                               int jobs = 0) {
  const auto f = pressure_hessian(p, g);
  PSweepResult out;
  out.series = p_sweep(f, ps, expected_singularity(p), "R22_det", jobs);
  out.linear = linear_lower_fit(out.series, p_min);
  out.p_min = p_min;
  return out;
}

inline std::vector<double> norm_over_p(const NormSeries& s, double p_min) {
  std::vector<double> v;
  for (const auto& e : s.entries)
    if (e.p >= p_min) v.push_back(e.norm / e.p);
  return v;
}

inline Check check_psweep(const PSweepResult& r, double max_ratio = 2.0) {
  const double ratio = max_over_min(norm_over_p(r.series, r.p_min));
  return {"psweep norm/p", ratio <= max_ratio && r.linear.slope > 0,
          "max/min of norm/p = " + detail::num(ratio) + " (limit " + detail::num(max_ratio) + "), slope " +
              detail::num(r.linear.slope)};
}

// ---- evolve ----------------------------------------------------------------

inline ScalarField steady_eigenfunction(const Grid2D& g) {
  const double w = 2.0 * std::numbers::pi / g.length;
  return ScalarField::sample(g, [&](double x, double y) { return std::cos(w * x) * std::cos(w * y); });
}

struct GrowthRun {
  double eps = 0.0;  // NaN for the eigenfunction
  GrowthRecord record;
};

/// Early-time increase of sup |D^k u| over the run.
inline double sup_increase(const GrowthRecord& r) { return r.sup_norms.back() - r.sup_norms.front(); }
inline double window_increment(const GrowthRecord& r) { return r.window_increment_sups.back(); }

inline std::vector<GrowthRun> run_growth_family(const ConstructionParams& base, const SolverConfig& cfg,
                                                const std::vector<double>& eps_values, double length) {
  std::vector<GrowthRun> out;
  const auto g = make_grid(cfg.n, length);
  for (double e : eps_values) {
    auto p = base;
    p.eps = e;
    out.push_back({e, evolve_and_track(vorticity_u0(p, g), cfg)});
  }
  return out;
}

/// True when f(run) strictly increases as eps decreases.
template <class Fn>
bool increasing_in_log_inverse_eps(std::vector<GrowthRun> runs, Fn&& f) {
  std::sort(runs.begin(), runs.end(), [](const GrowthRun& a, const GrowthRun& b) { return a.eps > b.eps; });
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (!(f(runs[i].record) > f(runs[i - 1].record))) return false;
  return true;
}

inline Check check_growth_family(const std::vector<GrowthRun>& runs) {
  std::string d = "sup|grad u| increase by eps:";
  for (const auto& r : runs) d += " " + detail::num(r.eps) + " -> " + detail::num(sup_increase(r.record));
  return {"norm growth monotone in log(1/eps)", increasing_in_log_inverse_eps(runs, sup_increase), d};
}

inline Check check_steady(const GrowthRecord& r, double tol = 1e-6) {
  double dev = 0.0;
  for (double s : r.sup_norms) dev = std::max(dev, std::abs(s - r.sup_norms.front()));
  return {"steady eigenfunction flat", dev <= tol, "max deviation of sup|D^k u| = " + detail::num(dev)};
}

// ---- flowmap ---------------------------------------------------------------

struct FlowmapRun {
  double u_lip = 0.0;
  std::vector<LipschitzReport> reports;
  std::vector<double> jacobian_dev;  // max |det - 1| per time
  bool seam_crossed = false;
};

inline FlowmapRun run_flowmap(const ConstructionParams& p, const Grid2D& g, const std::vector<double>& times, double dt,
                              int tracers, double stencil, int jobs = 0) {
  FlowmapRun out;
  out.u_lip = gradient_sup_norm(exact_gradient(p, g));
  const auto labels = make_grid(tracers, g.length);
  AdvectOptions opt;
  opt.with_inverse = true;
  opt.stencil_tau = stencil;
  opt.jobs = jobs;
  for (double t : times) {
    const auto m = advect_tracers(ClosedFormVelocity{p}, labels, t, dt, opt);
    out.reports.push_back(lipschitz_report(m, out.u_lip, t));
    const auto det = jacobian_det(m).physical_values();
    double dev = 0.0;
    for (double v : det) dev = std::max(dev, std::abs(v - 1.0));
    out.jacobian_dev.push_back(dev);
    out.seam_crossed = out.seam_crossed || m.seam_crossed;
  }
  return out;
}

/// K <= t e^t (1 + slack) when |u|_Lip <= 1 (else the bound with |u|_Lip),
/// and |det - 1| <= jac_tol.
inline Check check_flowmap(const FlowmapRun& r, double slack = 0.05, double jac_tol = 1e-4) {
  bool ok = true;
  std::string d = "|u|_Lip = " + detail::num(r.u_lip) + ";";
  const double lip = std::max(r.u_lip, 1.0);
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    const auto& rep = r.reports[i];
    const double bound = std::abs(rep.t) * lip * std::exp(std::abs(rep.t) * lip) * (1.0 + slack);
    ok = ok && rep.K <= bound && r.jacobian_dev[i] <= jac_tol;
    d += " t=" + detail::num(rep.t) + ": K=" + detail::num(rep.K) + " <= " + detail::num(bound) +
         ", |J-1|=" + detail::num(r.jacobian_dev[i]);
  }
  return {"flow-map bounds", ok, d};
}

// ---- commutator ------------------------------------------------------------

struct CommutatorRun {
  double a = 0.0;
  std::vector<CommutatorEstimate> estimates;
};

inline std::vector<CommutatorRun> run_commutator(const Grid2D& g, const std::vector<double>& amplitudes,
                                                 const std::vector<double>& ps, int trials, std::uint64_t seed,
                                                 const OpnormOptions& opt) {
  std::vector<CommutatorRun> out;
  const auto R = riesz_symbol(2, 2);
  for (double a : amplitudes) {
    CommutatorRun run{a, {}};
    const auto m = shear_map(g, a);
    for (double p : ps) run.estimates.push_back(estimate_opnorm(R, m, p, trials, seed, opt));
    out.push_back(std::move(run));
  }
  return out;
}

/// estimate/(p K) within a factor `p_ratio` across p for every a, and
/// estimate/K within `k_ratio` across a for every p.
inline Check check_commutator(const std::vector<CommutatorRun>& runs, double p_ratio = 4.0, double k_ratio = 2.0) {
  bool ok = !runs.empty();
  std::string d;
  double worst_p = 0.0, worst_k = 0.0;
  for (const auto& r : runs) {
    std::vector<double> v;
    for (const auto& e : r.estimates) v.push_back(e.opnorm_lower / (e.p * e.K));
    worst_p = std::max(worst_p, max_over_min(v));
  }
  for (std::size_t i = 0; ok && i < runs.front().estimates.size(); ++i) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.estimates[i].opnorm_lower / r.estimates[i].K);
    worst_k = std::max(worst_k, max_over_min(v));
  }
  ok = ok && worst_p <= p_ratio && worst_k <= k_ratio;
  d = "max/min of estimate/(pK) across p = " + detail::num(worst_p) + " (limit " + detail::num(p_ratio) +
      "); max/min of estimate/K across a = " + detail::num(worst_k) + " (limit " + detail::num(k_ratio) + ")";
  return {"commutator scaling", ok, d};
}

}  // namespace eulerlab
