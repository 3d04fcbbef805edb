#include "wbergman/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wbergman/errors.hpp"

namespace wbergman {

namespace {

void require_aligned(std::span<const Complex> a, const Quadrature& q, const char* who) {
  if (a.size() != q.size()) throw DomainError(std::string(who) + ": samples are not aligned with the quadrature nodes");
}

}  // namespace

double sup_error_on_E(const TestFunction& u, const Projection& p, const ZeroSetSample& e, const CompactK& k_set) {
  const auto pts = restrict_to(e, k_set);
  if (pts.empty()) throw EmptySetError("sup_error_on_E: E ∩ K is empty");
  const auto pu = p.at(pts);
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s = std::max(s, std::abs(u.eval(pts[i]) - pu[i]));
  return s;
}

double l2_ratio(std::span<const Complex> v, std::span<const Complex> f, const Quadrature& q, const Weight& w,
                double k) {
  require_aligned(v, q, "l2_ratio");
  require_aligned(f, q, "l2_ratio");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double mu = q.weights[i] * std::exp(-k * w.eval(q.nodes[i]));
    num += std::norm(v[i]) * mu;
    den += std::norm(f[i]) * mu;
  }
  if (!(den > 0.0)) throw UndefinedRatioError("l2_ratio: f vanishes; ratio undefined");
  return num / den;
}

double weighted_sup_on_K(std::span<const Complex> v, std::span<const Complex> f, const CompactK& k_set,
                         const Quadrature& q, const Weight& w, double k) {
  require_aligned(v, q, "weighted_sup_on_K");
  require_aligned(f, q, "weighted_sup_on_K");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double e = std::exp(-k * w.eval(q.nodes[i]));
    den = std::max(den, std::norm(f[i]) * e);
    if (k_set.contains(q.nodes[i])) num = std::max(num, std::norm(v[i]) * e);
  }
  if (!(den > 0.0)) throw UndefinedRatioError("weighted_sup_on_K: f vanishes; ratio undefined");
  return num / den;
}

AgmonRatio agmon_ratio(std::span<const Complex> v, std::span<const Complex> f, const Quadrature& q,
                       const Weight& w, double k, Complex a) {
  require_aligned(v, q, "agmon_ratio");
  require_aligned(f, q, "agmon_ratio");
  const double rk = std::sqrt(k);
  // The ratios are unchanged by a common factor, so exponents are shifted by their maximum
  // to keep far centres from underflowing.
  std::vector<double> ed(q.size()), ec(q.size());
  double top_d = -std::numeric_limits<double>::infinity(), top_c = top_d;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Complex z = q.nodes[i];
    const double base = -k * w.eval(z);
    ed[i] = base - rk * std::abs(z - a);
    ec[i] = base - chi_k(z, a, k);
    top_d = std::max(top_d, ed[i]);
    top_c = std::max(top_c, ec[i]);
  }
  double num_d = 0.0, den_d = 0.0, num_c = 0.0, den_c = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double md = q.weights[i] * std::exp(ed[i] - top_d);
    const double mc = q.weights[i] * std::exp(ec[i] - top_c);
    const double nv = std::norm(v[i]), nf = std::norm(f[i]);
    num_d += nv * md;
    den_d += nf * md;
    num_c += nv * mc;
    den_c += nf * mc;
  }
  if (!(den_d > 0.0) || !(den_c > 0.0)) throw UndefinedRatioError("agmon_ratio: f vanishes; ratio undefined");
  return AgmonRatio{a, num_d / den_d, num_c / den_c};
}

double cutoff_xi(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - smoothstep5(2.0 * t - 1.0);
}

double cutoff_xi_derivative(double t) {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  return -2.0 * smoothstep5_derivative(2.0 * t - 1.0);
}

BmReconstruction bm_reconstruct(std::span<const Complex> v, std::span<const Complex> dbar_v, double k, Complex a,
                                const Quadrature& q) {
  require_aligned(v, q, "bm_reconstruct");
  require_aligned(dbar_v, q, "bm_reconstruct");
  if (!(k > 0.0)) throw DomainError("bm_reconstruct: k must be positive");
  const double ix = std::round((a.real() - q.rect.x_min()) / q.hx);
  const double iy = std::round((a.imag() - q.rect.y_min()) / q.hy);
  const Complex c{q.rect.x_min() + ix * q.hx, q.rect.y_min() + iy * q.hy};
  const double radius = 1.0 / std::sqrt(k);
  if (!q.rect.contains_disk(c, radius)) throw DomainError("bm_reconstruct: cutoff ball is not contained in the domain");

  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Complex d = q.nodes[i] - c;
    const double t = k * std::norm(d);
    if (t >= 1.0) continue;
    s += (cutoff_xi(t) * dbar_v[i] / d + k * v[i] * cutoff_xi_derivative(t)) * q.weights[i];
  }
  return BmReconstruction{-s / std::numbers::pi, c};
}

LocalEstimate local_estimate_check(Complex v_at_a, std::span<const Complex> v, std::span<const Complex> f, double k,
                                   Complex a, const Quadrature& q, int dimension) {
  require_aligned(v, q, "local_estimate_check");
  require_aligned(f, q, "local_estimate_check");
  if (!(k > 0.0)) throw DomainError("local_estimate_check: k must be positive");
  if (!q.rect.contains_disk(a, 1.0 / std::sqrt(k))) {
    throw DomainError("local_estimate_check: ball |z - a| < k^{-1/2} is not contained in the domain");
  }
  LocalEstimate r;
  r.lhs = std::norm(v_at_a);
  double integral = 0.0, fsup = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (k * std::norm(q.nodes[i] - a) >= 1.0) continue;
    integral += std::norm(v[i]) * q.weights[i];
    fsup = std::max(fsup, std::norm(f[i]));
  }
  r.rhs_l2 = std::pow(k, dimension) * integral;
  r.rhs_f = fsup / k;
  return r;
}

RateFit fit_rate(std::span<const double> k_values, std::span<const double> errors) {
  if (k_values.size() != errors.size()) throw DomainError("fit_rate: k_values and errors differ in length");
  if (k_values.size() < 3) throw DomainError("fit_rate: need at least 3 points");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) throw DomainError("fit_rate: errors must be positive and finite");
    if (!(k_values[i] > 0.0)) throw DomainError("fit_rate: k values must be positive");
    if (i > 0 && !(k_values[i] > k_values[i - 1])) throw DomainError("fit_rate: k values must be strictly increasing");
  }
  const auto n = static_cast<double>(k_values.size());
  std::vector<double> x(k_values.size()), y(k_values.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::log(k_values[i]);
    y[i] = std::log(errors[i]);
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.k_values.assign(k_values.begin(), k_values.end());
  fit.errors.assign(errors.begin(), errors.end());
  return fit;
}

double spread(std::span<const double> values) {
  if (values.empty()) throw DomainError("spread: no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

}  // namespace wbergman
