#include "wbergman/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wbergman/errors.hpp"

namespace wbergman {

GaussianApproximant make_gaussian_approximant(const TestFunction& u, double k) {
  GaussianApproximant ga;
  ga.k = k;
  ga.u_restricted = [f = u.eval](double t) { return f(Complex{t, 0.0}); };
  ga.support_lo = u.support_rect.x_min();
  ga.support_hi = u.support_rect.x_max();
  return ga;
}

Complex gaussian_approximant(const GaussianApproximant& ga, Complex z) {
  if (!(ga.k > 0.0)) throw DomainError("gaussian_approximant: k must be positive");
  const double dt = (ga.support_hi - ga.support_lo) / ga.nodes;
  Complex s{0.0, 0.0};
  for (int i = 0; i < ga.nodes; ++i) {
    const double t = ga.support_lo + (i + 0.5) * dt;
    const Complex d = z - t;
    s += ga.u_restricted(t) * std::exp(-ga.k * d * d);
  }
  return std::sqrt(ga.k / std::numbers::pi) * dt * s;
}

double gaussian_kernel_mass(double k, int nodes) {
  const double half = 12.0 / std::sqrt(k);
  const double ds = 2.0 * half / nodes;
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double t = -half + (i + 0.5) * ds;
    s += std::exp(-k * t * t);
  }
  return std::sqrt(k / std::numbers::pi) * ds * s;
}

double gaussian_sup_error(const GaussianApproximant& ga, std::span<const Complex> points) {
  double s = 0.0;
  for (const auto& z : points) {
    s = std::max(s, std::abs(gaussian_approximant(ga, z) - ga.u_restricted(z.real())));
  }
  return s;
}

ModelCaseReport compare_from_tables(std::span<const double> k_values, std::span<const double> bergman_errors,
                                    std::span<const double> gaussian_errors, double reference_scale) {
  if (k_values.size() != bergman_errors.size() || k_values.size() != gaussian_errors.size()) {
    throw DomainError("compare_from_tables: tables differ in length");
  }
  ModelCaseReport r;
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    r.per_k.push_back({k_values[i], bergman_errors[i], gaussian_errors[i]});
  }
  const double floor = 1e-8 * reference_scale;
  r.degenerate = std::all_of(bergman_errors.begin(), bergman_errors.end(), [&](double e) { return e <= floor; });
  auto positive = [](std::span<const double> e) {
    return std::all_of(e.begin(), e.end(), [](double x) { return x > 0.0; });
  };
  if (!r.degenerate && positive(bergman_errors)) r.bergman_slope = fit_rate(k_values, bergman_errors).slope;
  if (positive(gaussian_errors)) r.gaussian_slope = fit_rate(k_values, gaussian_errors).slope;
  return r;
}

ModelCaseReport compare_model_case(const TestFunction& u, std::span<const double> k_values,
                                   const ModelCasePipeline& pipeline) {
  if (pipeline.weight.name != "flat_line") throw DomainError("compare_model_case: the model case needs flat_line");
  const auto probes = restrict_to(pipeline.zero_set, pipeline.compact);
  if (probes.empty()) throw EmptySetError("compare_model_case: E ∩ K is empty");
  std::vector<double> berg, gauss;
  for (double k : k_values) {
    const auto ap = project_adaptive(u, pipeline.quadrature, pipeline.weight, k, probes, pipeline.policy);
    berg.push_back(ap.sup_errors.back());
    gauss.push_back(gaussian_sup_error(make_gaussian_approximant(u, k), probes));
  }
  return compare_from_tables(k_values, berg, gauss, sup_abs(sample(u.eval, probes)));
}

}  // namespace wbergman
