#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eulerlab/construction.hpp"

using namespace eulerlab;

namespace {

constexpr double pi = std::numbers::pi;

// 4th-order accurate central differences for mixed partials of a scalar fn
template <class Fn>
double fd_dxxyy(Fn&& f, double x, double y, double h) {
  auto dxx = [&](double yy) {
    return (-f(x + 2 * h, yy) + 16 * f(x + h, yy) - 30 * f(x, yy) + 16 * f(x - h, yy) - f(x - 2 * h, yy)) /
           (12 * h * h);
  };
  return (-dxx(y + 2 * h) + 16 * dxx(y + h) - 30 * dxx(y) + 16 * dxx(y - h) - dxx(y - 2 * h)) / (12 * h * h);
}

template <class Fn>
double fd_d1(Fn&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace

TEST(Closed, QValues) {
  EXPECT_DOUBLE_EQ(eval_Q(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(eval_Q(1, 1), -4.0);
}

TEST(Closed, GValues) {
  EXPECT_DOUBLE_EQ(eval_G(1, 0, 0), 0.0);
  // Q vanishes on the line y = x tan(pi/8)
  const double t = std::tan(pi / 8);
  EXPECT_NEAR(eval_G(0.7, 0.7 * t, 0.1), 0.0, 1e-14);
  EXPECT_NEAR(eval_G(0.5, 0, 0), 0.0625 * std::log(0.25), 1e-15);
  EXPECT_NEAR(eval_G(0.5, 0, 0), -0.08664, 1e-5);
  EXPECT_THROW(eval_G(0, 0, 0), std::domain_error);
  EXPECT_NO_THROW(eval_G(0, 0, 0.1));
}

TEST(Closed, LaplacianOfG) {
  EXPECT_DOUBLE_EQ(laplacian_G_closed(1, 0), 16.0);
  for (double t : {0.1, 0.5, 2.0}) EXPECT_NEAR(laplacian_G_closed(t, t), -32 * t * t, 1e-12);
  EXPECT_THROW(laplacian_G_closed(0, 0), std::domain_error);
  // eps-regularised form reduces to 16Q/r^2
  EXPECT_NEAR(laplacian_G_eps(0.3, -0.7, 0.0), laplacian_G_closed(0.3, -0.7), 1e-13);
}

TEST(Closed, LaplacianEpsMatchesJetDerivatives) {
  for (double eps : {0.0, 0.05, 0.3}) {
    const auto j = chi_G_jet<2>(0.4, 0.25, eps, {});
    EXPECT_NEAR(j.partial(2, 0) + j.partial(0, 2), laplacian_G_eps(0.4, 0.25, eps), 1e-12);
  }
}

TEST(Closed, DxxyyMatchesFiniteDifference) {
  const auto g = [](double x, double y) { return eval_G(x, y, 0.0); };
  EXPECT_NEAR(dxxyy_G_closed(0.3, 0.4), fd_dxxyy(g, 0.3, 0.4, 5e-3), 1e-5);
  EXPECT_THROW(dxxyy_G_closed(0, 0), std::domain_error);
}

TEST(Closed, DxxyyHasLogCoefficientMinus24) {
  // along a ray H is constant, so differences isolate the log coefficient
  const double c = std::cos(0.3), s = std::sin(0.3);
  const double r1 = 1e-4, r2 = 1e-2;
  const double slope = (dxxyy_G_closed(r2 * c, r2 * s) - dxxyy_G_closed(r1 * c, r1 * s)) / (std::log(r2 * r2) - std::log(r1 * r1));
  EXPECT_NEAR(slope, -24.0, 1e-9);
}

TEST(Closed, RemainderHBounded) {
  const auto near = remainder_H(1e-8, 1e-4);
  const auto far = remainder_H(1e-4, 1.0);
  EXPECT_TRUE(std::isfinite(near.sup_estimate));
  EXPECT_NEAR(near.sup_estimate, far.sup_estimate, 1e-6 * far.sup_estimate);
  EXPECT_NEAR(far.sup_estimate, 68.0, 1e-6);
}

TEST(Closed, DxxLaplacianMatchesJets) {
  for (double eps : {0.0, 1e-3, 0.1})
    for (auto [x, y] : {std::pair{0.3, 0.1}, {-0.05, 0.2}, {0.6, -0.6}}) {
      const auto j = chi_G_jet<4>(x, y, eps, {});
      const double jet = j.partial(4, 0) + j.partial(2, 2);
      EXPECT_NEAR(dxx_laplacian_G_closed(x, y, eps), jet, 1e-9 * std::max(1.0, std::abs(jet)));
    }
}

TEST(Closed, HessianOfLaplacianIsBounded) {
  // d_i d_j Delta G is homogeneous of degree 0: sup independent of r
  double sup_small = 0, sup_large = 0;
  for (int k = 0; k < 360; ++k) {
    const double th = 2 * pi * k / 360;
    sup_small = std::max(sup_small, std::abs(dxx_laplacian_G_closed(1e-3 * std::cos(th), 1e-3 * std::sin(th), 0)));
    sup_large = std::max(sup_large, std::abs(dxx_laplacian_G_closed(std::cos(th), std::sin(th), 0)));
  }
  EXPECT_NEAR(sup_small, sup_large, 1e-9 * sup_large);
}

TEST(Cutoff, Profile) {
  EXPECT_DOUBLE_EQ(eval_cutoff(0.5), 1.0);
  EXPECT_DOUBLE_EQ(eval_cutoff(1.0), 1.0);
  EXPECT_DOUBLE_EQ(eval_cutoff(3.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_cutoff(2.0), 0.0);
  EXPECT_NEAR(eval_cutoff(1.5), 0.5, 1e-15);
  EXPECT_THROW(eval_cutoff(-0.1), std::invalid_argument);
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 0.01) {
    const double c = eval_cutoff(r);
    EXPECT_LE(c, prev + 1e-15);
    prev = c;
  }
}

TEST(Cutoff, FlatAtJunctions) {
  const double e = 0.02;
  for (double r : {1.0 + e, 2.0 - e}) {
    const double d = fd_d1([](double s) { return eval_cutoff(s); }, r, 1e-4);
    EXPECT_LE(std::abs(d), 1e-6);
  }
}

TEST(Cutoff, JetDerivativeMatchesFiniteDifference) {
  const double x = 1.1, y = 0.6;
  const auto j = cutoff(Jet2<2>::variable_x(x), Jet2<2>::variable_y(y), CutoffSpec{});
  const auto fx = [&](double s) { return cutoff(s, y, CutoffSpec{}); };
  EXPECT_NEAR(j.partial(1, 0), fd_d1(fx, x, 1e-4), 1e-9);
}

TEST(Params, Validation) {
  ConstructionParams p;
  EXPECT_NO_THROW(p.validate());
  p.delta = 0.5;
  try {
    p.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "delta must be < eta");
  }
  EXPECT_NO_THROW(unit_lipschitz_params().validate());
}

TEST(BuildU0, DivergenceFree) {
  ConstructionParams p;
  p.eps = 0.05;
  const auto g = make_grid(512, 8.0);
  // eps = 0.05 is below the 4h guard at n = 512
  const auto u = build_u0(p, g, ResolutionPolicy::allow_subgrid);
  const auto d = spectral_gradient(u);
  const double div = (d.ux + d.vy).max_abs();
  EXPECT_LE(div / gradient_sup_norm(d), 1e-8);
}

TEST(BuildU0, ShearOnUnitBall) {
  ConstructionParams p;
  p.eps = 0.0;
  const double x = 0.5, y = 0.25;
  const auto full = sample_u0(p, x, y);
  // delta grad_cw Delta G at eps = 0 from the closed form Delta G = 16Q/r^2
  const double h = 1e-4;
  auto lap = [](double a, double b) { return laplacian_G_closed(a, b); };
  const double dy = fd_d1([&](double s) { return lap(x, s); }, y, h);
  const double dx = fd_d1([&](double s) { return lap(s, y); }, x, h);
  EXPECT_NEAR(full.u - p.delta * dy, p.eta * 0.25, 1e-9);
  EXPECT_NEAR(full.v + p.delta * dx, 0.0, 1e-9);
}

TEST(BuildU0, ShearPart) {
  // u0 is affine in eta; the eta-part is (y chi + y^2 chi_y / 2, -y^2 chi_x / 2)
  const ConstructionParams p1{1e-3, 0.2, 0.0, {}}, p2{1e-3, 0.1, 0.0, {}};
  for (auto [x, y] : {std::pair{0.3, 0.4}, {1.2, 0.9}, {-0.4, -1.5}}) {
    const auto a = sample_u0(p1, x, y), b = sample_u0(p2, x, y);
    const auto c = cutoff(Jet2<1>::variable_x(x), Jet2<1>::variable_y(y), CutoffSpec{});
    const double eu = y * c.value() + 0.5 * y * y * c.partial(0, 1);
    const double ev = -0.5 * y * y * c.partial(1, 0);
    EXPECT_NEAR((a.u - b.u) / 0.1, eu, 1e-9);
    EXPECT_NEAR((a.v - b.v) / 0.1, ev, 1e-9);
  }
}

TEST(BuildU0, SupportedInB2) {
  ConstructionParams p;
  p.eps = 0.2;
  // closed form vanishes exactly; spectral differentiation leaks from the
  // cutoff annulus until that is resolved
  const auto g = make_grid(2048, 8.0);
  const auto u = build_u0(p, g);
  double leak = 0, exact = 0;
  for (int i = 0; i < g.n; i += 3)
    for (int j = 0; j < g.n; j += 3) {
      const double x = g.coord(i), y = g.coord(j);
      if (std::hypot(x, y) < 2.05) continue;
      leak = std::max({leak, std::abs(u.u.at(i, j)), std::abs(u.v.at(i, j))});
      const auto s = sample_u0(p, x, y);
      exact = std::max({exact, std::abs(s.u), std::abs(s.v)});
    }
  EXPECT_LE(exact, 1e-12);
  EXPECT_LE(leak, 1e-8);
}

TEST(BuildU0, AffineInDelta) {
  ConstructionParams a{0.01, 0.2, 0.3, {}}, b{0.02, 0.2, 0.3, {}};
  const auto g = make_grid(128, 8.0);
  const auto ua = build_u0(a, g), ub = build_u0(b, g);
  // delta-only part = (b - a); evaluate it independently with a tiny eta
  const auto th = ScalarField::sample(g, [&](double x, double y) {
    const auto j = chi_G_jet<2>(x, y, 0.3, {});
    return 0.01 * (j.partial(2, 0) + j.partial(0, 2));
  });
  const auto du = derivative(th, Axis::y);
  EXPECT_LE((ub.u - ua.u - du).max_abs(), 1e-12 * du.max_abs() + 1e-12);
}

TEST(BuildU0, ResolutionGuard) {
  ConstructionParams p;
  p.eps = 1e-3;
  const auto g = make_grid(64, 8.0);
  EXPECT_THROW(build_u0(p, g), std::invalid_argument);
  EXPECT_NO_THROW(build_u0(p, g, ResolutionPolicy::allow_subgrid));
}

TEST(BuildU0, SpectralMatchesClosedFormGradient) {
  ConstructionParams p;
  p.eps = 0.2;
  // the cutoff annulus near r_outer needs n >= 1024 for this tolerance
  const auto g = make_grid(1024, 8.0);
  const auto ds = spectral_gradient(build_u0(p, g));
  const auto de = exact_gradient(p, g);
  EXPECT_LE((ds.ux - de.ux).max_abs() / de.ux.max_abs(), 1e-5);
  EXPECT_LE((ds.vx - de.vx).max_abs() / de.vx.max_abs(), 1e-5);
}

TEST(BuildU0, UnitLipschitzPreset) {
  const auto p = unit_lipschitz_params();
  const auto g = make_grid(256, 8.0);
  EXPECT_LE(gradient_sup_norm(exact_gradient(p, g)), 1.0);
}

TEST(BuildU0, VorticityIsCurl) {
  ConstructionParams p;
  p.eps = 0.2;
  const auto g = make_grid(128, 8.0);
  const auto w = vorticity_u0(p, g);
  const auto d = exact_gradient(p, g);
  EXPECT_LE((w - (d.vx - d.uy)).max_abs(), 1e-12 * w.max_abs());
}

TEST(SpectralLaplacian, MatchesClosedFormOnAnnulus) {
  // chi with a wide plateau so that chi G = G on the annulus of interest
  const CutoffSpec wide{1.5, 3.0};
  const auto g = make_grid(512, 8.0);
  const auto f = ScalarField::sample(g, [&](double x, double y) {
    return chi_G_jet<0>(x, y, 0.0, wide).value();
  });
  const auto lap = laplacian(f);
  double err = 0, ref = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = g.coord(i), y = g.coord(j), r = std::hypot(x, y);
      if (r < 0.2 || r > 0.9) continue;
      err = std::max(err, std::abs(lap.at(i, j) - laplacian_G_closed(x, y)));
      ref = std::max(ref, std::abs(laplacian_G_closed(x, y)));
    }
  EXPECT_LE(err / ref, 1e-6);
}

TEST(SpectralLaplacian, QIsHarmonic) {
  const CutoffSpec wide{1.5, 3.0};
  const auto g = make_grid(1024, 8.0);
  const auto f = ScalarField::sample(g, [&](double x, double y) { return eval_Q(x, y) * cutoff(x, y, wide); });
  const auto lap = laplacian(f);
  double m = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (std::hypot(g.coord(i), g.coord(j)) <= 1.0) m = std::max(m, std::abs(lap.at(i, j)));
  EXPECT_LE(m, 1e-8);
}

TEST(DetGrad, RankOneShearHasZeroDeterminant) {
  const auto g = make_grid(64, 8.0);
  const double w = 2 * pi / g.length;
  const VectorField2 u{ScalarField::sample(g, [&](double, double y) { return 0.2 * std::sin(w * y) / w; }), ScalarField(g)};
  EXPECT_LE(det_grad(u).max_abs(), 1e-14);
}

TEST(DetGrad, RotationHasUnitDeterminantNearOrigin) {
  const auto g = make_grid(128, 8.0);
  const double w = 2 * pi / g.length;
  const VectorField2 u{ScalarField::sample(g, [&](double, double y) { return -std::sin(w * y) / w; }),
                       ScalarField::sample(g, [&](double x, double) { return std::sin(w * x) / w; })};
  const auto d = det_grad(u);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (std::hypot(g.coord(i), g.coord(j)) < 0.05) EXPECT_NEAR(d.at(i, j), 1.0, 1e-3);
}

TEST(DetGrad, LeadingTermThenQuadraticRemainder) {
  ConstructionParams p{0.01, 0.2, 0.1, {}};
  const auto g = make_grid(512, 8.0);
  const auto j1 = remainder_J(det_grad(build_u0(p, g)), p);
  p.delta *= 0.5;
  const auto j2 = remainder_J(det_grad(build_u0(p, g)), p);
  EXPECT_EQ(j1.field, RemainderField::J);
  EXPECT_TRUE(std::isfinite(j1.sup_estimate));
  // remainder / delta^2 is independent of delta
  EXPECT_NEAR(j2.sup_estimate / j1.sup_estimate, 1.0, 0.2);
}

TEST(DetGrad, ExactGradientDeterminantDecomposes) {
  // with the closed-form gradient the remainder is exactly delta^2 J
  ConstructionParams p{0.01, 0.2, 1e-3, {}};
  const auto g = make_grid(128, 8.0);
  const auto j1 = remainder_J(det_grad(exact_gradient(p, g)), p);
  p.delta = 0.005;
  const auto j2 = remainder_J(det_grad(exact_gradient(p, g)), p);
  EXPECT_NEAR(j2.sup_estimate / j1.sup_estimate, 1.0, 1e-6);
}
