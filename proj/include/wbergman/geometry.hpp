#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wbergman {

using Complex = std::complex<double>;

struct Weight;

/// Axis-aligned rectangle in C, used both for the domain Omega and for compact pieces of it.
struct Rect {
  Complex center{0.0, 0.0};
  double half_width_x = 1.0;
  double half_width_y = 1.0;

  Rect() = default;
  /// Throws DomainError unless both half-widths are positive and finite.
  Rect(Complex center, double half_width_x, double half_width_y);

  double x_min() const { return center.real() - half_width_x; }
  double x_max() const { return center.real() + half_width_x; }
  double y_min() const { return center.imag() - half_width_y; }
  double y_max() const { return center.imag() + half_width_y; }
  double area() const { return 4.0 * half_width_x * half_width_y; }
  double max_half_width() const { return half_width_x > half_width_y ? half_width_x : half_width_y; }

  /// Closed containment.
  bool contains(Complex z) const;
  /// Disk |z - c| < radius lies in the closed rectangle.
  bool contains_disk(Complex c, double radius) const;

  bool operator==(const Rect&) const = default;
};

/// Unit square [-1, 1]^2.
inline Rect unit_square() { return Rect{Complex{0.0, 0.0}, 1.0, 1.0}; }

enum class QuadratureRule {
  /// Cell centers, each weight the cell area. Second order.
  midpoint,
  /// Same nodes; the six outermost node layers on each side carry a local
  /// Euler-Maclaurin endpoint correction. Sixth order.
  end_corrected,
};

/// Tensor quadrature on a rectangle. Nodes are ordered x-fastest: index = j * nx + i.
struct Quadrature {
  Rect rect;
  std::vector<Complex> nodes;
  std::vector<double> weights;
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  double cell_area = 0.0;
  QuadratureRule rule = QuadratureRule::midpoint;

  std::size_t size() const { return nodes.size(); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  double spacing() const { return hx > hy ? hx : hy; }
};

/// Tensor grid with nx * ny cells. Rejects nx, ny < 2 (and < 12 for end_corrected).
Quadrature build_grid(const Rect& rect, int nx, int ny, QuadratureRule rule = QuadratureRule::midpoint);

/// Sum of g(z) * weight over the nodes.
double integrate(const Quadrature& q, const std::function<double(Complex)>& g);

/// Compact piece K of Omega obtained by pulling every side in by `margin`.
struct CompactK {
  Rect rect;
  double margin = 0.0;

  bool contains(Complex z) const { return rect.contains(z); }
};

/// Requires 0 <= margin < min(half widths).
CompactK shrink_to_compact(const Rect& rect, double margin);

/// Points on E = {phi = 0}.
struct ZeroSetSample {
  std::vector<Complex> points;
  double tolerance = 0.0;
};

/// Samples E ∩ rect. Uses the weight's parametric zero-set description when it has one;
/// otherwise locates minima of phi along every grid line of a (n_samples x n_samples)
/// grid by bisection on the directional derivative and keeps those with phi <= tolerance.
/// Throws EmptySetError when nothing is found.
ZeroSetSample sample_zero_set(const Weight& w, const Rect& rect, int n_samples, double tolerance = 1e-12);

/// Points of E that lie inside K.
std::vector<Complex> restrict_to(const ZeroSetSample& e, const CompactK& k);

}  // namespace wbergman
