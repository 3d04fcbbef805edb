#include "wbergman/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wbergman/errors.hpp"

namespace wbergman {

std::string_view to_string(WeightModel model) {
  switch (model) {
    case WeightModel::flat_line: return "flat_line";
    case WeightModel::circle: return "circle";
    case WeightModel::scaled_line: return "scaled_line";
    case WeightModel::log_growth: return "log_growth";
  }
  return "unknown";
}

std::optional<WeightModel> parse_weight_model(std::string_view name) {
  for (auto m : {WeightModel::flat_line, WeightModel::circle, WeightModel::scaled_line, WeightModel::log_growth}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<std::string> list_weight_models() {
  return {"flat_line", "circle", "scaled_line", "log_growth"};
}

double smoothstep5(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep5_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double t = s * (1.0 - s);
  return 30.0 * t * t;
}

namespace {

double smoothstep5_second(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

double param(const WeightParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const WeightParams& params, std::initializer_list<const char*> allowed, std::string_view model) {
  for (const auto& [key, value] : params) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw DomainError(std::string(model) + ": unknown parameter '" + key + "'");
    if (!std::isfinite(value)) throw DomainError(std::string(model) + ": parameter '" + key + "' is not finite");
  }
}

// The real axis clipped to [lo, hi] (intersected with the domain's x-range).
std::optional<ZeroSetCurve> real_segment(const Rect& domain, double lo, double hi) {
  if (domain.y_min() > 0.0 || domain.y_max() < 0.0) return std::nullopt;
  const double a = std::max(lo, domain.x_min());
  const double b = std::min(hi, domain.x_max());
  if (a > b) return std::nullopt;
  return ZeroSetCurve{[](double t) { return Complex{t, 0.0}; }, a, b, false};
}

double distance_to_origin(const Rect& r) {
  const double dx = std::max({r.x_min(), 0.0, -r.x_max()});
  const double dy = std::max({r.y_min(), 0.0, -r.y_max()});
  return std::hypot(dx, dy);
}

Weight line_weight(std::string name, double c, const Rect& domain) {
  Weight w;
  w.name = std::move(name);
  w.eval = [c](Complex z) { return c * z.imag() * z.imag(); };
  w.grad = [c](Complex z) { return std::array<double, 2>{0.0, 2.0 * c * z.imag()}; };
  w.complex_hessian = [c](Complex) { return 0.5 * c; };
  w.delta = 0.5 * c;
  w.zero_set_param = real_segment(domain, -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity());
  return w;
}

Weight circle_weight(double r, const Rect& domain) {
  if (!(r > 0.0)) throw DomainError("circle: radius must be positive");
  if (domain.contains(Complex{0.0, 0.0})) {
    throw DomainError("circle: domain contains z = 0 where the Hessian degenerates");
  }
  const double rho_min = distance_to_origin(domain);
  const double delta = 1.0 - r / (2.0 * rho_min);
  if (!(delta > 0.0)) {
    throw DomainError("circle: Hessian 1 - r/(2|z|) is not positive on the domain (need dist(0, domain) > r/2)");
  }
  Weight w;
  w.name = "circle";
  w.eval = [r](Complex z) {
    const double d = std::abs(z) - r;
    return d * d;
  };
  w.grad = [r](Complex z) {
    const double rho = std::abs(z);
    const double f = 2.0 * (rho - r) / rho;
    return std::array<double, 2>{f * z.real(), f * z.imag()};
  };
  w.complex_hessian = [r](Complex z) { return 1.0 - r / (2.0 * std::abs(z)); };
  w.delta = delta;
  w.zero_set_param = ZeroSetCurve{[r](double t) { return std::polar(r, t); }, 0.0, 2.0 * std::numbers::pi, true};
  return w;
}

struct LogGrowth {
  static constexpr double r0 = 1.5;
  static constexpr double r1 = 2.5;
  double m;

  // sigma(rho) = 1 - S((rho - r0) / (r1 - r0)) and its first two radial derivatives.
  void sigma(double rho, double& s0, double& s1, double& s2) const {
    const double width = r1 - r0;
    const double s = (rho - r0) / width;
    s0 = 1.0 - smoothstep5(s);
    s1 = -smoothstep5_derivative(s) / width;
    s2 = -smoothstep5_second(s) / (width * width);
  }

  double eval(Complex z) const {
    const double rho = std::abs(z);
    double s0, s1, s2;
    sigma(rho, s0, s1, s2);
    const double a = z.imag() * z.imag();
    const double l = m * std::log1p(rho * rho);
    return l + (a - l) * s0;
  }

  std::array<double, 2> grad(Complex z) const {
    const double x = z.real(), y = z.imag();
    const double rho = std::abs(z);
    double s0, s1, s2;
    sigma(rho, s0, s1, s2);
    const double a = y * y;
    const double l = m * std::log1p(rho * rho);
    const double gl = 2.0 * m / (1.0 + rho * rho);
    const double gs = rho > 0.0 ? s1 / rho : 0.0;
    return {gl * x + (0.0 - gl * x) * s0 + (a - l) * gs * x, gl * y + (2.0 * y - gl * y) * s0 + (a - l) * gs * y};
  }

  double hessian(Complex z) const {
    const double x = z.real(), y = z.imag();
    const double rho = std::abs(z);
    double s0, s1, s2;
    sigma(rho, s0, s1, s2);
    const double q = 1.0 + rho * rho;
    const double a = y * y;
    const double l = m * std::log1p(rho * rho);
    const double lap_l = 4.0 * m / (q * q);
    const double gl = 2.0 * m / q;
    const double gs = rho > 0.0 ? s1 / rho : 0.0;
    const double lap_s = rho > 0.0 ? s2 + s1 / rho : 0.0;
    // grad(A - L) . grad(sigma)
    const double cross = (-gl * x) * gs * x + (2.0 * y - gl * y) * gs * y;
    const double lap = lap_l + (2.0 - lap_l) * s0 + 2.0 * cross + (a - l) * lap_s;
    return 0.25 * lap;
  }
};

Weight log_growth_weight(double m, const Rect& domain) {
  if (!(m > 0.0)) throw DomainError("log_growth: m must be positive");
  const LogGrowth lg{m};
  Weight w;
  w.name = "log_growth";
  w.eval = [lg](Complex z) { return lg.eval(z); };
  w.grad = [lg](Complex z) { return lg.grad(z); };
  w.complex_hessian = [lg](Complex z) { return lg.hessian(z); };

  constexpr int n = 513;
  double lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double y = domain.y_min() + 2.0 * domain.half_width_y * j / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double x = domain.x_min() + 2.0 * domain.half_width_x * i / (n - 1);
      lo = std::min(lo, lg.hessian(Complex{x, y}));
    }
  }
  if (!(lo > 0.0)) throw DomainError("log_growth: Hessian is not positive on the domain");
  w.delta = lo;
  w.zero_set_param = real_segment(domain, -LogGrowth::r0, LogGrowth::r0);
  return w;
}

}  // namespace

Weight make_model_weight(WeightModel model, const WeightParams& params, const Rect& domain) {
  switch (model) {
    case WeightModel::flat_line:
      reject_unknown(params, {}, "flat_line");
      return line_weight("flat_line", 1.0, domain);
    case WeightModel::scaled_line: {
      reject_unknown(params, {"c"}, "scaled_line");
      const double c = param(params, "c", 1.0);
      if (!(c > 0.0)) throw DomainError("scaled_line: c must be positive");
      return line_weight("scaled_line", c, domain);
    }
    case WeightModel::circle:
      reject_unknown(params, {"radius"}, "circle");
      return circle_weight(param(params, "radius", 1.0), domain);
    case WeightModel::log_growth:
      reject_unknown(params, {"m"}, "log_growth");
      return log_growth_weight(param(params, "m", 1.0), domain);
  }
  throw DomainError("make_model_weight: unknown model");
}

PshReport verify_plurisubharmonic(const Weight& w, const Quadrature& q, double required_delta) {
  PshReport r;
  r.min_eig = std::numeric_limits<double>::infinity();
  const Complex dx{q.hx, 0.0};
  const Complex dy{0.0, q.hy};
  for (const auto& z : q.nodes) {
    const double h = w.complex_hessian(z);
    if (h < r.min_eig) {
      r.min_eig = h;
      r.worst_node = z;
    }
    const double f0 = w.eval(z);
    const double lap = (w.eval(z + dx) - 2.0 * f0 + w.eval(z - dx)) / (q.hx * q.hx) +
                       (w.eval(z + dy) - 2.0 * f0 + w.eval(z - dy)) / (q.hy * q.hy);
    const double rel = std::abs(0.25 * lap - h) / std::max(std::abs(h), 1e-300);
    r.fd_max_rel_error = std::max(r.fd_max_rel_error, rel);
  }
  r.ok = r.min_eig >= required_delta;
  r.fd_ok = r.fd_max_rel_error <= 1e-4;
  return r;
}

RescaledWeight rescale_for_agmon(const Weight& w) {
  if (!(w.delta > 0.0)) throw DomainError("rescale_for_agmon: weight has no positive Hessian bound");
  const double scale = 5.0 / w.delta;
  if (scale == 1.0) return {w, 1.0};
  Weight r = w;
  r.name = w.name + "_rescaled";
  r.eval = [f = w.eval, scale](Complex z) { return scale * f(z); };
  if (w.grad) {
    r.grad = [g = w.grad, scale](Complex z) {
      auto v = g(z);
      return std::array<double, 2>{scale * v[0], scale * v[1]};
    };
  }
  r.complex_hessian = [h = w.complex_hessian, scale](Complex z) { return scale * h(z); };
  r.delta = 5.0;
  return {r, scale};
}

double psi(double t) { return t >= 1.0 ? t : 0.5 * t * t + 0.5; }

double psi_derivative(double t) { return t >= 1.0 ? 1.0 : t; }

double chi_k(Complex z, Complex a, double k) { return psi(std::sqrt(k) * std::abs(z - a)); }

}  // namespace wbergman
