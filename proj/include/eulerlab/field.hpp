#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eulerlab/fft.hpp"
#include "eulerlab/grid.hpp"

namespace eulerlab {

using cplx = std::complex<double>;

enum class Representation { physical, spectral };

/// Real field sampled on a Grid2D, held either as point values or as its
/// half-spectrum of Fourier coefficients. Conversions return new fields.
class ScalarField {
 public:
  explicit ScalarField(Grid2D grid) : grid_(grid), values_(grid.size(), 0.0) {}

  static ScalarField from_values(Grid2D grid, std::vector<double> values) {
    if (values.size() != grid.size()) throw std::invalid_argument("value count does not match grid");
    ScalarField f(grid, Representation::physical);
    f.values_ = std::move(values);
    return f;
  }

  static ScalarField from_modes(Grid2D grid, std::vector<cplx> modes) {
    if (modes.size() != grid.spectral_size()) throw std::invalid_argument("mode count does not match grid");
    ScalarField f(grid, Representation::spectral);
    f.modes_ = std::move(modes);
    return f;
  }

  /// Samples fn(x, y) at every node.
  template <class Fn>
  static ScalarField sample(Grid2D grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.coord(i);
      for (int j = 0; j < grid.n; ++j) v[grid.index(i, j)] = fn(x, grid.coord(j));
    }
    return from_values(grid, std::move(v));
  }

  const Grid2D& grid() const { return grid_; }
  Representation representation() const { return rep_; }

  ScalarField to_spectral() const {
    if (rep_ == Representation::spectral) return *this;
    return from_modes(grid_, fft::forward(grid_.n, values_));
  }

  ScalarField to_physical() const {
    if (rep_ == Representation::physical) return *this;
    return from_values(grid_, fft::inverse(grid_.n, modes_));
  }

  std::span<const double> values() const {
    if (rep_ != Representation::physical) throw std::logic_error("field is in spectral representation");
    return values_;
  }

  std::span<const cplx> modes() const {
    if (rep_ != Representation::spectral) throw std::logic_error("field is in physical representation");
    return modes_;
  }

  double at(int i, int j) const { return values()[grid_.index(i, j)]; }

  double max_abs() const {
    const auto p = physical_values();
    double m = 0.0;
    for (double v : p) m = std::max(m, std::abs(v));
    return m;
  }

  double mean() const {
    if (rep_ == Representation::spectral) return modes_[0].real();
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) { return combine(a, b, 1.0, 1.0); }
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) { return combine(a, b, 1.0, -1.0); }
  friend ScalarField operator*(double s, const ScalarField& a) {
    auto v = a.physical_values();
    for (double& x : v) x *= s;
    return from_values(a.grid_, std::move(v));
  }

  /// Pointwise product in physical space (no dealiasing).
  friend ScalarField pointwise(const ScalarField& a, const ScalarField& b) {
    check_same_grid(a, b);
    auto v = a.physical_values();
    const auto w = b.physical_values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= w[k];
    return from_values(a.grid_, std::move(v));
  }

  /// Point values regardless of the stored representation.
  std::vector<double> physical_values() const {
    if (rep_ == Representation::physical) return values_;
    return fft::inverse(grid_.n, modes_);
  }

  std::vector<cplx> spectral_modes() const {
    if (rep_ == Representation::spectral) return modes_;
    return fft::forward(grid_.n, values_);
  }

 private:
  ScalarField(Grid2D grid, Representation rep) : grid_(grid), rep_(rep) {}

  static void check_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid_ == b.grid_)) throw std::invalid_argument("fields live on different grids");
  }

  static ScalarField combine(const ScalarField& a, const ScalarField& b, double sa, double sb) {
    check_same_grid(a, b);
    auto v = a.physical_values();
    const auto w = b.physical_values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = sa * v[k] + sb * w[k];
    return from_values(a.grid_, std::move(v));
  }

  Grid2D grid_;
  Representation rep_ = Representation::physical;
  std::vector<double> values_;
  std::vector<cplx> modes_;
};

struct VectorField2 {
  ScalarField u;
  ScalarField v;

  VectorField2(ScalarField u_, ScalarField v_) : u(std::move(u_)), v(std::move(v_)) {
    if (!(u.grid() == v.grid())) throw std::invalid_argument("vector components live on different grids");
  }

  const Grid2D& grid() const { return u.grid(); }
};

/// Full velocity gradient, (grad u)_{ij} = d_j u_i.
struct VelocityGradient {
  ScalarField ux, uy, vx, vy;

  const Grid2D& grid() const { return ux.grid(); }
};

}  // namespace eulerlab
