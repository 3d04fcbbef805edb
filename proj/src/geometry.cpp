#include "wbergman/geometry.hpp"

#include <cmath>
#include <string>

#include "wbergman/errors.hpp"
#include "wbergman/weights.hpp"

namespace wbergman {

Rect::Rect(Complex c, double hx, double hy) : center(c), half_width_x(hx), half_width_y(hy) {
  if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy)) {
    throw DomainError("Rect: half widths must be positive and finite");
  }
}

bool Rect::contains(Complex z) const {
  return z.real() >= x_min() && z.real() <= x_max() && z.imag() >= y_min() && z.imag() <= y_max();
}

bool Rect::contains_disk(Complex c, double radius) const {
  return c.real() - radius >= x_min() && c.real() + radius <= x_max() && c.imag() - radius >= y_min() &&
         c.imag() + radius <= y_max();
}

namespace {

std::vector<double> line_weights(int n, double h, QuadratureRule rule) {
  std::vector<double> w(static_cast<std::size_t>(n), h);
  if (rule == QuadratureRule::end_corrected) {
    // Euler-Maclaurin endpoint terms of the midpoint rule through h^5 f^(5), moved onto the
    // six outermost nodes. All corrected weights stay positive.
    const double c[6] = {184831.0 / 967680.0,  -532379.0 / 967680.0, 68155.0 / 96768.0,
                         -248543.0 / 483840.0, 195203.0 / 967680.0,  -32119.0 / 967680.0};
    for (int i = 0; i < 6; ++i) {
      w[static_cast<std::size_t>(i)] += c[i] * h;
      w[static_cast<std::size_t>(n - 1 - i)] += c[i] * h;
    }
  }
  return w;
}

}  // namespace

Quadrature build_grid(const Rect& rect, int nx, int ny, QuadratureRule rule) {
  if (nx < 2 || ny < 2) {
    throw DomainError("build_grid: need nx >= 2 and ny >= 2, got " + std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (rule == QuadratureRule::end_corrected && (nx < 12 || ny < 12)) {
    throw DomainError("build_grid: end-corrected rule needs at least 12 cells per direction");
  }
  Quadrature q;
  q.rect = rect;
  q.nx = nx;
  q.ny = ny;
  q.rule = rule;
  q.hx = 2.0 * rect.half_width_x / nx;
  q.hy = 2.0 * rect.half_width_y / ny;
  q.cell_area = q.hx * q.hy;

  const auto wx = line_weights(nx, q.hx, rule);
  const auto wy = line_weights(ny, q.hy, rule);
  const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  q.nodes.reserve(n);
  q.weights.reserve(n);
  for (int j = 0; j < ny; ++j) {
    const double y = rect.y_min() + (j + 0.5) * q.hy;
    for (int i = 0; i < nx; ++i) {
      const double x = rect.x_min() + (i + 0.5) * q.hx;
      q.nodes.emplace_back(x, y);
      q.weights.push_back(wx[static_cast<std::size_t>(i)] * wy[static_cast<std::size_t>(j)]);
    }
  }
  return q;
}

double integrate(const Quadrature& q, const std::function<double(Complex)>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += g(q.nodes[i]) * q.weights[i];
  return s;
}

CompactK shrink_to_compact(const Rect& rect, double margin) {
  if (!(margin >= 0.0)) throw DomainError("shrink_to_compact: margin must be >= 0");
  if (margin >= rect.half_width_x || margin >= rect.half_width_y) {
    throw DomainError("shrink_to_compact: margin collapses the rectangle");
  }
  return CompactK{Rect{rect.center, rect.half_width_x - margin, rect.half_width_y - margin}, margin};
}

namespace {

// Directional derivative of phi along a coordinate axis (0 = x, 1 = y).
double axis_derivative(const Weight& w, Complex z, int axis) {
  if (w.grad) return w.grad(z)[static_cast<std::size_t>(axis)];
  const double h = 1e-6;
  const Complex step = axis == 0 ? Complex{h, 0.0} : Complex{0.0, h};
  return (w.eval(z + step) - w.eval(z - step)) / (2.0 * h);
}

// Minimum of phi on the segment [lo, hi] along `axis`, given that phi decreases at lo
// and increases at hi.
Complex bisect_minimum(const Weight& w, Complex lo, Complex hi, int axis) {
  for (int it = 0; it < 200; ++it) {
    const Complex mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (axis_derivative(w, mid, axis) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return w.eval(lo) <= w.eval(hi) ? lo : hi;
}

void scan_line(const Weight& w, const std::vector<Complex>& line, int axis, double tolerance,
               std::vector<Complex>& out) {
  const std::size_t n = line.size();
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = w.eval(line[i]);
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || vals[i] <= vals[i - 1];
    const bool right_ok = i + 1 == n || vals[i] <= vals[i + 1];
    if (!left_ok || !right_ok) continue;
    if (vals[i] <= tolerance) {
      out.push_back(line[i]);
      continue;
    }
    if (i == 0 || i + 1 == n) continue;
    const Complex p = bisect_minimum(w, line[i - 1], line[i + 1], axis);
    if (w.eval(p) <= tolerance) out.push_back(p);
  }
}

}  // namespace

ZeroSetSample sample_zero_set(const Weight& w, const Rect& rect, int n_samples, double tolerance) {
  if (n_samples < 2) throw DomainError("sample_zero_set: need at least 2 samples");
  if (!(tolerance > 0.0)) throw DomainError("sample_zero_set: tolerance must be positive");
  ZeroSetSample out;
  out.tolerance = tolerance;

  if (w.zero_set_param) {
    const auto& c = *w.zero_set_param;
    const double span = c.t_max - c.t_min;
    const double dt = c.closed ? span / n_samples : span / (n_samples - 1);
    for (int i = 0; i < n_samples; ++i) {
      const Complex p = c.point(c.t_min + i * dt);
      if (rect.contains(p) && w.eval(p) <= tolerance) out.points.push_back(p);
    }
  } else {
    const int n = n_samples;
    std::vector<Complex> line(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double x = rect.x_min() + 2.0 * rect.half_width_x * i / (n - 1);
      for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = {x, rect.y_min() + 2.0 * rect.half_width_y * j / (n - 1)};
      scan_line(w, line, 1, tolerance, out.points);
    }
    for (int j = 0; j < n; ++j) {
      const double y = rect.y_min() + 2.0 * rect.half_width_y * j / (n - 1);
      for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = {rect.x_min() + 2.0 * rect.half_width_x * i / (n - 1), y};
      scan_line(w, line, 0, tolerance, out.points);
    }
  }
  if (out.points.empty()) {
    throw EmptySetError("sample_zero_set: zero set of '" + w.name + "' does not meet the rectangle");
  }
  return out;
}

std::vector<Complex> restrict_to(const ZeroSetSample& e, const CompactK& k) {
  std::vector<Complex> pts;
  for (const auto& p : e.points) {
    if (k.contains(p)) pts.push_back(p);
  }
  return pts;
}

}  // namespace wbergman
