#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "eulerlab/field.hpp"

namespace eulerlab {

/// Fourier multiplier. The symbol is evaluated at physical wavenumbers
/// (kx, ky) = 2*pi/L * (k1, k2); the (0,0) mode takes `zero_mode` instead.
struct MultiplierSpec {
  std::function<cplx(double kx, double ky)> symbol;
  cplx zero_mode = 0.0;
};

inline double wavenumber(int mode, const Grid2D& g) { return 2.0 * std::numbers::pi / g.length * mode; }

/// Visits every stored mode of the half-spectrum with its integer
/// wavevector: fn(index, k1, k2).
template <class Fn>
void for_each_mode(const Grid2D& g, Fn&& fn) {
  const int n = g.n;
  const int half = n / 2 + 1;
  for (int i = 0; i < n; ++i) {
    const int k1 = mode_number(i, n);
    for (int j = 0; j < half; ++j) fn(static_cast<std::size_t>(i) * half + j, k1, j);
  }
}

/// Symbol value as applied on the grid. At a Nyquist index the single stored
/// mode stands for both +n/2 and -n/2, so the symbol is averaged over the two
/// signs; this keeps real fields real and zeroes odd derivatives there.
inline cplx effective_symbol(const MultiplierSpec& m, const Grid2D& g, int k1, int k2) {
  if (k1 == 0 && k2 == 0) return m.zero_mode;
  const int nyq = g.n / 2;
  const bool n1 = std::abs(k1) == nyq;
  const bool n2 = std::abs(k2) == nyq;
  const double kx = wavenumber(k1, g);
  const double ky = wavenumber(k2, g);
  if (!n1 && !n2) return m.symbol(kx, ky);
  cplx s = 0.0;
  int count = 0;
  for (int s1 : {1, -1}) {
    if (s1 < 0 && !n1) continue;
    for (int s2 : {1, -1}) {
      if (s2 < 0 && !n2) continue;
      s += m.symbol(s1 * kx, s2 * ky);
      ++count;
    }
  }
  return s / static_cast<double>(count);
}

inline ScalarField apply_spectral(const MultiplierSpec& m, const ScalarField& f) {
  auto modes = f.spectral_modes();
  const auto& g = f.grid();
  for_each_mode(g, [&](std::size_t idx, int k1, int k2) { modes[idx] *= effective_symbol(m, g, k1, k2); });
  return ScalarField::from_modes(g, std::move(modes));
}

inline ScalarField apply(const MultiplierSpec& m, const ScalarField& f) { return apply_spectral(m, f).to_physical(); }

inline MultiplierSpec derivative_symbol(Axis axis, int order) {
  return {[axis, order](double kx, double ky) {
            const double k = axis == Axis::x ? kx : ky;
            cplx s = 1.0;
            for (int o = 0; o < order; ++o) s *= cplx(0.0, k);
            return s;
          },
          0.0};
}

/// Symbol k_i k_j / |k|^2 (i, j in {1, 2}); the zero mode is annihilated.
/// With this sign R_i R_j = d_i d_j Delta^{-1}.
inline MultiplierSpec riesz_symbol(int i, int j) {
  if (i < 1 || i > 2 || j < 1 || j > 2) throw std::invalid_argument("Riesz indices must be 1 or 2");
  return {[i, j](double kx, double ky) {
            const double ki = i == 1 ? kx : ky;
            const double kj = j == 1 ? kx : ky;
            return cplx(ki * kj / (kx * kx + ky * ky), 0.0);
          },
          0.0};
}

inline MultiplierSpec inverse_laplacian_symbol() {
  return {[](double kx, double ky) { return cplx(-1.0 / (kx * kx + ky * ky), 0.0); }, 0.0};
}

inline MultiplierSpec laplacian_symbol() {
  return {[](double kx, double ky) { return cplx(-(kx * kx + ky * ky), 0.0); }, 0.0};
}

inline ScalarField derivative(const ScalarField& f, Axis axis, int order = 1) {
  if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
  return apply(derivative_symbol(axis, order), f);
}

inline ScalarField riesz_pair(const ScalarField& f, int i, int j) { return apply(riesz_symbol(i, j), f); }

inline ScalarField laplacian(const ScalarField& f) { return apply(laplacian_symbol(), f); }

/// Solves Delta p = f - mean(f); the projected-out mean is reported through
/// `removed_mean` when requested.
inline ScalarField inverse_laplacian(const ScalarField& f, double* removed_mean = nullptr) {
  if (removed_mean) *removed_mean = f.mean();
  return apply(inverse_laplacian_symbol(), f);
}

inline bool retained_by_two_thirds_rule(int k1, int k2, int n) {
  return 3 * std::max(std::abs(k1), std::abs(k2)) <= n;
}

/// 2/3-rule truncation: zeroes modes with max(|k1|, |k2|) > n/3.
inline ScalarField dealias(const ScalarField& f) {
  auto modes = f.spectral_modes();
  const auto& g = f.grid();
  for_each_mode(g, [&](std::size_t idx, int k1, int k2) {
    if (!retained_by_two_thirds_rule(k1, k2, g.n)) modes[idx] = 0.0;
  });
  return ScalarField::from_modes(g, std::move(modes)).to_physical();
}

inline constexpr double infinity_exponent = std::numeric_limits<double>::infinity();

/// Rectangle-rule L^p norm over the torus, (sum |f|^p h^2)^(1/p). The sup is
/// factored out before powering so large p cannot overflow.
inline double lp_norm(const ScalarField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("L^p exponent must be >= 1");
  const auto v = f.physical_values();
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0 || std::isinf(p)) return m;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / m, p);
  const double h = f.grid().spacing();
  return m * std::pow(s * h * h, 1.0 / p);
}

}  // namespace eulerlab
