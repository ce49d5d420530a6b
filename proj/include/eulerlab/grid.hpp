#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eulerlab {

enum class Axis { x, y };

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Periodic square torus of side `length` sampled on an n x n cell-centred
/// grid: x_i = -L/2 + (i + 1/2) h. No node sits on the origin.
struct Grid2D {
  int n = 0;
  double length = 0.0;

  double spacing() const { return length / n; }
  double coord(int i) const { return -0.5 * length + (i + 0.5) * spacing(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  /// Row-major with the x index outermost.
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
  double area() const { return length * length; }
  /// Number of complex modes in the half-spectrum (last axis halved).
  std::size_t spectral_size() const { return static_cast<std::size_t>(n) * (n / 2 + 1); }

  bool operator==(const Grid2D&) const = default;
};

inline Grid2D make_grid(int n, double length) {
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument("grid resolution must be even and >= 8, got " + std::to_string(n));
  if (!(length > 0.0)) throw std::invalid_argument("torus length must be positive");
  return Grid2D{n, length};
}

/// Signed integer mode number of FFT index i on an n-point axis.
inline int mode_number(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace eulerlab
