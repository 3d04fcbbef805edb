#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wbergman/bergman.hpp"
#include "wbergman/geometry.hpp"
#include "wbergman/weights.hpp"

namespace wbergman {

struct AgmonRatio {
  Complex center{};
  /// Ratio with the extra factor exp(-sqrt(k)|z - a|) on both sides.
  double distance_variant = 0.0;
  /// Same with exp(-chi_k(z)).
  double chi_variant = 0.0;

  bool operator==(const AgmonRatio&) const = default;
};

/// Per-k values of every functional. Fields of disabled scenarios stay empty.
struct RatioReport {
  double k = 0.0;
  int basis_degree = 0;
  double gram_condition = 0.0;
  int effective_rank = 0;
  std::optional<double> sup_err_E;
  std::optional<double> l2_ratio;
  std::optional<double> sup_ratio;
  std::vector<AgmonRatio> agmon_ratios;
  std::optional<int> agmon_basis_degree;
  std::optional<double> bm_lhs;
  std::optional<double> bm_rhs_l2_term;
  std::optional<double> bm_rhs_f_term;
  /// |reconstructed v(a) - v(a)| / sup_ball |v|.
  std::optional<double> bm_relative_error;

  bool operator==(const RatioReport&) const = default;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> k_values;
  std::vector<double> errors;

  bool operator==(const RateFit&) const = default;
};

/// max over E ∩ K of |u - P_k u|. Throws EmptySetError when no sample lies in K.
double sup_error_on_E(const TestFunction& u, const Projection& p, const ZeroSetSample& e, const CompactK& k_set);

/// (∫|v|^2 e^{-k phi}) / (∫|f|^2 e^{-k phi}). Throws UndefinedRatioError when f vanishes.
double l2_ratio(std::span<const Complex> v, std::span<const Complex> f, const Quadrature& q, const Weight& w,
                double k);

/// (sup_K |v|^2 e^{-k phi}) / (sup_Omega |f|^2 e^{-k phi}) over the quadrature nodes.
double weighted_sup_on_K(std::span<const Complex> v, std::span<const Complex> f, const CompactK& k_set,
                         const Quadrature& q, const Weight& w, double k);

/// l2_ratio with the extra factors exp(-sqrt(k)|z - a|) and exp(-chi_k) on both integrals.
/// `w` is expected to be the rescaled weight (Hessian >= 5).
AgmonRatio agmon_ratio(std::span<const Complex> v, std::span<const Complex> f, const Quadrature& q,
                       const Weight& w, double k, Complex a);

/// Smooth cutoff: 1 on t <= 1/2, 0 on t >= 1, 1 - S(2t - 1) between (S the quintic smoothstep).
double cutoff_xi(double t);
double cutoff_xi_derivative(double t);

struct BmReconstruction {
  Complex value{};
  /// The grid vertex nearest to the requested centre; the formula reconstructs v there.
  Complex center{};
};

/// Cauchy-Pompeiu reconstruction of v at (the grid vertex nearest to) a:
///   v(a) = -(1/pi) ∫ [ xi(k|z-a|^2) dbar_v(z) / (z - a) + k v(z) xi'(k|z-a|^2) ] dA.
/// The centre sits on a vertex so no node hits the 1/(z - a) singularity.
/// Throws DomainError unless the disk |z - a| <= k^{-1/2} lies in the grid's rectangle.
BmReconstruction bm_reconstruct(std::span<const Complex> v, std::span<const Complex> dbar_v, double k, Complex a,
                                const Quadrature& q);

struct LocalEstimate {
  double lhs = 0.0;     // |v(a)|^2
  double rhs_l2 = 0.0;  // k^n ∫_{|z-a|^2 < 1/k} |v|^2
  double rhs_f = 0.0;   // (1/k) sup_{|z-a|^2 < 1/k} |f|^2
};

/// Both sides of the local L^2-to-pointwise estimate at a. `dimension` is n (1 or 2) and only
/// enters through the k^n factor.
LocalEstimate local_estimate_check(Complex v_at_a, std::span<const Complex> v, std::span<const Complex> f, double k,
                                   Complex a, const Quadrature& q, int dimension = 1);

/// Least-squares line through (log k, log error).
RateFit fit_rate(std::span<const double> k_values, std::span<const double> errors);

/// max / min of positive values.
double spread(std::span<const double> values);

}  // namespace wbergman
