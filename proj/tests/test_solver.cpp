#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "eulerlab/construction.hpp"
#include "eulerlab/field_io.hpp"
#include "eulerlab/solver.hpp"

using namespace eulerlab;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField smooth_vorticity(const Grid2D& g, unsigned seed, int kmax = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<std::array<double, 4>> t;
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = 0; b <= kmax; ++b)
      if (a != 0 || b != 0) t.push_back({double(a), double(b), ud(rng), ud(rng)});
  const double w = 2 * pi / g.length;
  return ScalarField::sample(g, [&](double x, double y) {
    double s = 0;
    for (auto& m : t) s += m[2] * std::cos(w * (m[0] * x + m[1] * y)) + m[3] * std::sin(w * (m[0] * x + m[1] * y));
    return s;
  });
}

ScalarField eigenfunction(const Grid2D& g) {
  const double w = 2 * pi / g.length;
  return ScalarField::sample(g, [&](double x, double y) { return std::cos(w * x) * std::cos(w * y); });
}

ScalarField run_fixed(const ScalarField& w0, double t_end, double dt) {
  const EulerStepper s(w0.grid());
  auto w = s.filter(w0.spectral_modes());
  const int steps = static_cast<int>(std::lround(t_end / dt));
  for (int i = 0; i < steps; ++i) w = s.step(w, dt);
  return ScalarField::from_modes(w0.grid(), w).to_physical();
}

}  // namespace

TEST(Curl, RotationPatch) {
  const auto g = make_grid(64, 8.0);
  const double w = 2 * pi / g.length;
  const VectorField2 u{ScalarField::sample(g, [&](double, double y) { return -std::sin(w * y) / w; }),
                       ScalarField::sample(g, [&](double x, double) { return std::sin(w * x) / w; })};
  const auto om = curl(u);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (std::hypot(g.coord(i), g.coord(j)) < 0.05) EXPECT_NEAR(om.at(i, j), 2.0, 1e-3);
}

TEST(Curl, OfPerpGradientIsLaplacian) {
  const auto g = make_grid(32, 8.0);
  const double w = 2 * pi / g.length;
  // psi = sin(wx), u = (-psi_y, psi_x)
  const VectorField2 u{ScalarField(g), ScalarField::sample(g, [&](double x, double) { return w * std::cos(w * x); })};
  const auto expect = ScalarField::sample(g, [&](double x, double) { return -w * w * std::sin(w * x); });
  EXPECT_LE((curl(u) - expect).max_abs(), 1e-12);
}

TEST(Curl, GradientFieldsAreIrrotational) {
  const auto g = make_grid(32, 8.0);
  const auto phi = smooth_vorticity(g, 3).to_spectral();
  const VectorField2 u{derivative(phi, Axis::x), derivative(phi, Axis::y)};
  EXPECT_LE(curl(u).max_abs(), 1e-11);
}

TEST(BiotSavart, SingleModeOracle) {
  const auto g = make_grid(32, 8.0);
  const double w = 2 * pi / g.length;
  const auto u = biot_savart(eigenfunction(g));
  const auto eu = ScalarField::sample(g, [&](double x, double y) { return -std::cos(w * x) * std::sin(w * y) / (2 * w); });
  const auto ev = ScalarField::sample(g, [&](double x, double y) { return std::sin(w * x) * std::cos(w * y) / (2 * w); });
  EXPECT_LE((u.u - eu).max_abs(), 1e-13);
  EXPECT_LE((u.v - ev).max_abs(), 1e-13);
}

TEST(BiotSavart, ZeroAndRoundTrip) {
  const auto g = make_grid(64, 8.0);
  const auto z = biot_savart(ScalarField(g));
  EXPECT_EQ(z.u.max_abs(), 0.0);
  EXPECT_EQ(z.v.max_abs(), 0.0);
  const auto om = smooth_vorticity(g, 4, 8);
  double mean = 1.0;
  const auto u = biot_savart(om, &mean);
  EXPECT_NEAR(mean, 0.0, 1e-13);
  EXPECT_LE((curl(u) - om).max_abs(), 1e-10);
  const double div = (derivative(u.u, Axis::x) + derivative(u.v, Axis::y)).max_abs();
  EXPECT_LE(div, 1e-9 * u.u.max_abs());
}

TEST(BiotSavart, NonZeroMeanIsReported) {
  const auto g = make_grid(32, 8.0);
  const auto om = smooth_vorticity(g, 5) + ScalarField::sample(g, [](double, double) { return 0.7; });
  double mean = 0.0;
  const auto u = biot_savart(om, &mean);
  EXPECT_NEAR(mean, 0.7, 1e-12);
  EXPECT_LE((curl(u) - (om - ScalarField::sample(g, [](double, double) { return 0.7; }))).max_abs(), 1e-10);
}

TEST(StepRK4, SteadyEigenfunction) {
  const auto g = make_grid(64, 8.0);
  const auto w0 = eigenfunction(g);
  const auto w1 = run_fixed(w0, 1.0, 0.01);
  EXPECT_LE((w1 - w0).max_abs(), 1e-6);
}

TEST(StepRK4, FourthOrderSelfConvergence) {
  const auto g = make_grid(32, 8.0);
  const auto w0 = smooth_vorticity(g, 6, 2);
  const double T = 1.0;
  const auto a = run_fixed(w0, T, 0.05), b = run_fixed(w0, T, 0.025), c = run_fixed(w0, T, 0.0125);
  const double order = std::log2((a - b).max_abs() / (b - c).max_abs());
  EXPECT_NEAR(order, 4.0, 0.8);
}

TEST(StepRK4, NonFiniteInputAborts) {
  const auto g = make_grid(16, 8.0);
  auto v = eigenfunction(g).physical_values();
  v[5] = std::nan("");
  EXPECT_THROW(step_rk4(ScalarField::from_values(g, v), 0.01), std::runtime_error);
}

TEST(Evolve, ConservesEnergyEnstrophyAndSup) {
  const auto g = make_grid(64, 8.0);
  SolverConfig cfg;
  cfg.n = 64;
  cfg.t_end = 0.1;
  const auto rec = evolve_and_track(smooth_vorticity(g, 7, 4), cfg);
  EXPECT_LE(rec.energy_drift(), 1e-6);
  EXPECT_LE(rec.enstrophy_drift(), 1e-6);
  EXPECT_LE(rec.omega_sup_drift(), 1e-4);
  EXPECT_FALSE(rec.resolution_loss);
  EXPECT_NEAR(rec.times.back(), 0.1, 1e-14);
}

TEST(Evolve, SteadyDataGivesFlatSeries) {
  const auto g = make_grid(32, 8.0);
  SolverConfig cfg;
  cfg.n = 32;
  cfg.t_end = 1.0;
  cfg.record_every = 10;
  const auto rec = evolve_and_track(eigenfunction(g), cfg);
  ASSERT_GE(rec.sup_norms.size(), 2u);
  for (double s : rec.sup_norms) EXPECT_NEAR(s, rec.sup_norms.front(), 1e-6);
  for (double s : rec.increment_sups) EXPECT_LE(s, 1e-6);
}

TEST(Evolve, FromVelocityMatchesFromVorticity) {
  const auto g = make_grid(32, 8.0);
  const auto om = smooth_vorticity(g, 8);
  SolverConfig cfg;
  cfg.n = 32;
  cfg.t_end = 0.05;
  const auto a = evolve_and_track(om, cfg);
  const auto b = evolve_and_track(biot_savart(om), cfg);
  EXPECT_NEAR(a.sup_norms.back(), b.sup_norms.back(), 1e-10);
}

TEST(Evolve, RoughDataRaisesResolutionFlag) {
  const auto g = make_grid(32, 8.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  SolverConfig cfg;
  cfg.n = 32;
  cfg.t_end = 0.01;
  EXPECT_TRUE(evolve_and_track(ScalarField::from_values(g, v), cfg).resolution_loss);
}

TEST(Evolve, ConfigValidation) {
  SolverConfig cfg;
  cfg.t_end = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.k = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  const auto g = make_grid(32, 8.0);
  EXPECT_THROW(evolve_and_track(eigenfunction(g), cfg), std::invalid_argument);  // n mismatch
}

TEST(Evolve, LpSnapshotsRecorded) {
  const auto g = make_grid(32, 8.0);
  SolverConfig cfg;
  cfg.n = 32;
  cfg.t_end = 0.02;
  cfg.snapshot_ps = {2, 4};
  const auto rec = evolve_and_track(smooth_vorticity(g, 10), cfg);
  ASSERT_EQ(rec.lp_snapshots.size(), rec.times.size());
  EXPECT_EQ(rec.lp_snapshots.front().entries.size(), 2u);
}

TEST(DerivativeTensor, FirstOrderMatchesHandGradient) {
  const auto g = make_grid(32, 8.0);
  const auto om = smooth_vorticity(g, 11);
  const auto u = biot_savart(om);
  const auto ux = derivative(u.u, Axis::x), uy = derivative(u.u, Axis::y);
  const auto vx = derivative(u.v, Axis::x), vy = derivative(u.v, Axis::y);
  const auto f = derivative_tensor_norm(om, 1);
  const auto a = ux.physical_values(), b = uy.physical_values(), c = vx.physical_values(), d = vy.physical_values();
  const auto fv = f.physical_values();
  for (std::size_t i = 0; i < fv.size(); i += 7)
    EXPECT_NEAR(fv[i], std::sqrt(a[i] * a[i] + b[i] * b[i] + c[i] * c[i] + d[i] * d[i]), 1e-12);
}

TEST(DerivativeTensor, SecondOrderCountsMixedTwice) {
  const auto g = make_grid(32, 8.0);
  const auto om = smooth_vorticity(g, 12);
  const auto u = biot_savart(om);
  double expect = 0;
  for (const auto* comp : {&u.u, &u.v}) {
    const auto xx = derivative(*comp, Axis::x, 2).at(3, 5);
    const auto xy = derivative(derivative(*comp, Axis::x), Axis::y).at(3, 5);
    const auto yy = derivative(*comp, Axis::y, 2).at(3, 5);
    expect += xx * xx + 2 * xy * xy + yy * yy;
  }
  EXPECT_NEAR(derivative_tensor_norm(om, 2).at(3, 5), std::sqrt(expect), 1e-11);
}

TEST(Evolve, ConstructedDataConservesInvariants) {
  ConstructionParams p{0.01, 0.2, 0.3, {}};
  const auto g = make_grid(128, 8.0);
  SolverConfig cfg;
  cfg.n = 128;
  cfg.t_end = 0.02;
  const auto rec = evolve_and_track(vorticity_u0(p, g), cfg);
  EXPECT_LE(rec.energy_drift(), 1e-6);
  EXPECT_LE(rec.enstrophy_drift(), 1e-6);
}

TEST(GrowthCsv, Headers) {
  GrowthRecord r;
  r.times = {0};
  r.sup_norms = r.window_sup_norms = r.increment_sups = r.window_increment_sups = {1};
  r.energy = r.enstrophy = r.omega_sup = r.tail_fraction = {1};
  std::ostringstream a, b;
  write_growth_csv(a, r);
  write_growth_diagnostics_csv(b, r);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,sup_Dk,energy,enstrophy");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), growth_diagnostics_header);
}

TEST(FieldIO, RoundTrip) {
  const auto g = make_grid(16, 8.0);
  const auto f = smooth_vorticity(g, 13);
  const auto path = std::filesystem::temp_directory_path() / "eulerlab_field_roundtrip.bin";
  write_field(path, f, "omega", {{"eps", 0.1}});
  const auto d = read_field(path);
  std::filesystem::remove(path);
  EXPECT_EQ(d.name, "omega");
  EXPECT_DOUBLE_EQ(d.meta.at("eps").get<double>(), 0.1);
  EXPECT_EQ(d.field.grid(), g);
  EXPECT_EQ((d.field - f).max_abs(), 0.0);
}
