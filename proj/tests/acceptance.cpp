#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "eulerlab/pipelines.hpp"

using namespace eulerlab;
using detail::num;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> diagnostics;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0: none
  std::function<Outcome()> run;
};

bool within(double value, double target, double rel) { return std::abs(value / target - 1.0) <= rel; }

ScalarField smooth_vorticity(const Grid2D& g) {
  const double w = 2.0 * std::numbers::pi / g.length;
  return ScalarField::sample(g, [&](double x, double y) {
    return std::cos(w * x + 0.3) * std::sin(2 * w * y) + 0.6 * std::sin(3 * w * x - w * y + 1.1) +
           0.4 * std::cos(2 * w * x + 4 * w * y);
  });
}

ScalarField run_fixed(ScalarField w, double T, double dt) {
  const int steps = static_cast<int>(std::lround(T / dt));
  for (int s = 0; s < steps; ++s) w = step_rk4(w, dt);
  return w;
}

// ||f 1_{B_r}||_p for the pressure Hessian of the eps = 0 construction
NormSeries local_sweep(int n, double radius, const std::vector<double>& ps) {
  ConstructionParams p;
  p.eps = 0.0;
  const auto g = make_grid(n, 8.0);
  auto v = pressure_hessian(p, g).physical_values();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::hypot(g.coord(i), g.coord(j)) >= radius) v[g.index(i, j)] = 0.0;
  return p_sweep(ScalarField::from_values(g, v), ps, expected_singularity(p), "R22_det_local");
}

Outcome log_coefficient() {
  const auto f = fit_log_slope([](double x, double y) { return dxxyy_G_closed(x, y); }, {}, 1e-4, 1e-2);
  return {within(f.slope, -24.0, 0.005), "slope " + num(f.slope) + " vs -24 (tol 0.5%)"};
}

Outcome determinant_decomposition() {
  ConstructionParams p{0.01, 0.2, 0.1, {}};
  const auto g = make_grid(512, 8.0);
  std::vector<double> raw;
  for (double d : {0.01, 0.005}) {
    p.delta = d;
    raw.push_back(remainder_J(det_grad(build_u0(p, g)), p).sup_estimate * d * d);
  }
  const double ratio = raw[0] / raw[1];
  return {within(ratio, 4.0, 0.2), "sup|det - eta delta d_xx Lap G| = " + num(raw[0]) + " -> " + num(raw[1]) +
                                       " on halving delta, ratio " + num(ratio) + " vs 4 (tol 20%)"};
}

Outcome pressure_hessian_singularity() {
  const ConstructionParams p;
  const auto a = run_fit_log(p, make_grid(1024, 8.0), 0.0, 0.25, 0);
  const auto b = run_fit_log(p, make_grid(2048, 8.0), 0.0, 0.25, 0);
  const double target = -24.0 * p.eta * p.delta;
  const bool ok = within(a.hessian.slope, target, 0.10) && within(b.hessian.slope, a.hessian.slope, 0.25);
  return {ok, "slope n=1024 " + num(a.hessian.slope) + ", n=2048 " + num(b.hessian.slope) + " vs " + num(target) +
                  " (tol 10%, doubling tol 25%)"};
}

Outcome p_linear_growth() {
  const ConstructionParams p;
  const std::vector<double> ps{8, 16, 32, 64};
  const auto a = run_psweep(p, make_grid(512, 8.0), ps, 8);
  const auto b = run_psweep(p, make_grid(1024, 8.0), ps, 8);
  const double ra = max_over_min(norm_over_p(a.series, 8)), rb = max_over_min(norm_over_p(b.series, 8));
  const bool ok = ra <= 2.0 && rb <= 2.0 && a.linear.slope > 0 && within(b.linear.slope, a.linear.slope, 0.25);
  Outcome o{ok, "norm/p max/min " + num(ra) + " (n=512), " + num(rb) + " (n=1024), limit 2; slope " +
                    num(a.linear.slope) + " -> " + num(b.linear.slope)};
  std::string np = "norm/p at n=512:";
  for (double v : norm_over_p(a.series, 8)) np += " " + num(v);
  o.diagnostics.push_back(np);

  const auto la = local_sweep(512, 0.25, ps), lb = local_sweep(1024, 0.25, ps);
  const auto fa = linear_lower_fit(la, 8), fb = linear_lower_fit(lb, 8);
  std::string d = "eps=0, restricted to B_1/4: norm/p";
  for (double v : norm_over_p(la, 8)) d += " " + num(v);
  d += " (max/min " + num(max_over_min(norm_over_p(la, 8))) + "), slope " + num(fa.slope) + " -> " + num(fb.slope) +
       " under doubling; |c|/e = " + num(24 * p.eta * p.delta / std::numbers::e);
  o.diagnostics.push_back(d);
  return o;
}

Outcome flow_map_bounds() {
  const auto p = unit_lipschitz_params();
  const auto r = run_flowmap(p, make_grid(512, 8.0), {0.025, 0.05, 0.1}, 2.5e-3, 128, 1e-4);
  const auto c = check_flowmap(r);
  return {c.pass && r.u_lip <= 1.0, c.detail};
}

Outcome commutator_scaling() {
  const auto runs = run_commutator(make_grid(64, 8.0), {0.01, 0.02, 0.04}, {2, 4, 8, 16, 32}, 16, 1, {40});
  const auto c = check_commutator(runs);
  Outcome o{c.pass, c.detail};
  for (const auto& r : runs) {
    std::string d = "a=" + num(r.a) + " estimate/(pK):";
    for (const auto& e : r.estimates) d += " " + num(e.opnorm_lower / (e.p * e.K));
    o.diagnostics.push_back(d);
  }
  return o;
}

Outcome solver_correctness() {
  const auto g = make_grid(64, 8.0);
  const auto w0 = steady_eigenfunction(g);
  const double steady = (run_fixed(w0, 1.0, 0.01) - w0).max_abs();

  SolverConfig cfg;
  cfg.n = 64;
  cfg.t_end = 1.0;
  const auto rec = evolve_and_track(smooth_vorticity(g), cfg);

  const auto gc = make_grid(32, 8.0);
  const auto s0 = smooth_vorticity(gc);
  const auto a = run_fixed(s0, 1.0, 0.05), b = run_fixed(s0, 1.0, 0.025), c = run_fixed(s0, 1.0, 0.0125);
  const double order = std::log2((a - b).max_abs() / (b - c).max_abs());

  const bool ok = steady <= 1e-6 && rec.energy_drift() <= 1e-6 && rec.enstrophy_drift() <= 1e-6 && within(order, 4.0, 0.2);
  return {ok, "steady deviation " + num(steady) + " over t=1; energy drift " + num(rec.energy_drift()) +
                  ", enstrophy drift " + num(rec.enstrophy_drift()) + " (limit 1e-6); RK4 order " + num(order)};
}

Outcome norm_inflation_trend() {
  SolverConfig cfg;
  cfg.n = 512;
  cfg.t_end = 0.05;
  const auto runs = run_growth_family(ConstructionParams{}, cfg, {0.1, 0.03, 0.01}, 8.0);
  const auto c = check_growth_family(runs);
  Outcome o{c.pass, c.detail};
  std::string d = "sup|grad u(t) - grad u(0)| on B_1/2 by eps:";
  for (const auto& r : runs) d += " " + num(r.eps) + " -> " + num(window_increment(r.record));
  d += increasing_in_log_inverse_eps(runs, window_increment) ? " (increasing)" : " (not increasing)";
  o.diagnostics.push_back(d);
  for (const auto& r : runs)
    o.diagnostics.push_back("eps=" + num(r.eps) + ": steps " + std::to_string(r.record.steps) + ", energy drift " +
                            num(r.record.energy_drift()) + ", resolution loss " + (r.record.resolution_loss ? "yes" : "no"));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "log coefficient of d_xxyy G", 1, log_coefficient},
      {2, "determinant remainder quadratic in delta", 30, determinant_decomposition},
      {3, "pressure Hessian log slope", 120, pressure_hessian_singularity},
      {4, "L^p norm linear in p", 0, p_linear_growth},
      {5, "flow-map Lipschitz and area bounds", 60, flow_map_bounds},
      {6, "commutator scaling", 0, commutator_scaling},
      {7, "solver correctness", 0, solver_correctness},
      {8, "norm growth trend in eps", 600, norm_inflation_trend},
  };

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.time_limit <= 0 || secs < c.time_limit;
    const bool pass = o.pass && in_time;
    std::cout << (pass ? "PASS" : "FAIL") << " #" << c.id << " " << c.name << ": " << o.detail << "; " << num(secs) << " s"
              << (c.time_limit > 0 ? " (limit " + num(c.time_limit) + " s)" : "") << '\n';
    for (const auto& d : o.diagnostics) std::cout << "  diagnostic: " << d << '\n';
    failed += pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
