#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wbergman/bergman.hpp"
#include "wbergman/estimates.hpp"

namespace wbergman {

/// Gaussian convolution on E = R:
///   G_k u(z) = sqrt(k/pi) ∫ u(t) exp(-k (z - t)^2) dt,
/// integrated with the midpoint rule on `nodes` points over [support_lo, support_hi].
struct GaussianApproximant {
  double k = 1.0;
  std::function<Complex(double)> u_restricted;
  double support_lo = -1.0;
  double support_hi = 1.0;
  int nodes = 4096;
};

/// Restriction of u to the real axis over the x-range of its support rectangle.
GaussianApproximant make_gaussian_approximant(const TestFunction& u, double k);

Complex gaussian_approximant(const GaussianApproximant& ga, Complex z);

/// sqrt(k/pi) ∫ exp(-k s^2) ds by the same midpoint rule over |s| <= 12/sqrt(k).
double gaussian_kernel_mass(double k, int nodes = 4096);

/// max over the points of |G_k u - u|.
double gaussian_sup_error(const GaussianApproximant& ga, std::span<const Complex> points);

struct ModelCaseRow {
  double k = 0.0;
  double bergman_err = 0.0;
  double gaussian_err = 0.0;

  bool operator==(const ModelCaseRow&) const = default;
};

struct ModelCaseReport {
  std::vector<ModelCaseRow> per_k;
  std::optional<double> bergman_slope;
  std::optional<double> gaussian_slope;
  /// Set when the Bergman errors are at round-off level (u already holomorphic), so no rate exists.
  bool degenerate = false;

  bool operator==(const ModelCaseReport&) const = default;
};

/// Fits both error tables with fit_rate. `reference_scale` (sup |u| on E ∩ K) sets the
/// round-off threshold 1e-8 * reference_scale below which the comparison is degenerate.
ModelCaseReport compare_from_tables(std::span<const double> k_values, std::span<const double> bergman_errors,
                                    std::span<const double> gaussian_errors, double reference_scale = 1.0);

struct ModelCasePipeline {
  const Quadrature& quadrature;
  const Weight& weight;
  const CompactK& compact;
  const ZeroSetSample& zero_set;
  DegreePolicy policy;
};

/// Runs the adaptive Bergman projection and the Gaussian approximant over the k grid and
/// compares sup errors on E ∩ K. The weight must be flat_line.
ModelCaseReport compare_model_case(const TestFunction& u, std::span<const double> k_values,
                                   const ModelCasePipeline& pipeline);

}  // namespace wbergman
