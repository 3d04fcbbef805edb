#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wbergman/geometry.hpp"
#include "wbergman/weights.hpp"

namespace wbergman {

/// A compactly supported smooth function u with its closed-form dbar u = (u_x + i u_y) / 2.
struct TestFunction {
  std::string name;
  std::function<Complex(Complex)> eval;
  std::function<Complex(Complex)> dbar;
  Rect support_rect;
};

/// u(z) = g(x) g(y), g(t) = exp(1 - 1/(1 - (t/rho)^2)) for |t| < rho and 0 otherwise.
TestFunction standard_bump(double rho = 0.7);

/// Named test functions:
///   standard_bump         the bump above with rho = 0.7
///   holomorphic_quadratic ((z - c)/s)^2 on the domain (in every basis span of degree >= 2)
///   conj_z                conj(z)
///   zero                  u = 0
TestFunction make_test_function(std::string_view name, const Rect& domain);
std::vector<std::string> list_test_functions();

std::vector<Complex> sample(const std::function<Complex(Complex)>& g, std::span<const Complex> nodes);

enum class BasisKind {
  /// Scaled monomials ((z - center)/scale)^j, j = 0..degree.
  monomials,
  /// Same functions with degree pinned to the weight exponent k.
  polynomials_deg_k,
};

struct Basis {
  BasisKind kind = BasisKind::monomials;
  Complex center{};
  int degree = 0;
  double scale = 1.0;

  int size() const { return degree + 1; }
  Complex eval(int j, Complex z) const;
  /// Row (b_0(z), ..., b_degree(z)).
  Eigen::RowVectorXcd row(Complex z) const;
  /// nodes.size() x size() matrix of basis values.
  Eigen::MatrixXcd sample(std::span<const Complex> nodes) const;
};

/// Monomials centred at the domain centre with scale = max half-width.
Basis make_basis(BasisKind kind, const Rect& domain, int degree);

/// Quadrature weights times exp(-k phi) at every node.
Eigen::VectorXd weighted_measure(const Quadrature& q, const Weight& w, double k);

/// <g1, g2> = sum g1 conj(g2) exp(-k phi) dA over the nodes.
Complex inner_product(std::span<const Complex> g1, std::span<const Complex> g2, const Quadrature& q,
                      const Weight& w, double k);

/// Hermitian Gram matrix G[i][j] = <b_i, b_j>.
Eigen::MatrixXcd gram_matrix(const Basis& basis, const Quadrature& q, const Weight& w, double k);
/// Same, from an already computed measure.
Eigen::MatrixXcd gram_matrix(const Basis& basis, std::span<const Complex> nodes, const Eigen::VectorXd& measure);

/// Maps raw basis coefficients to an orthonormal basis of the retained eigen-directions.
struct OrthoFactor {
  Eigen::MatrixXcd transform;  // size() x effective_rank; e_i = sum_j transform(j, i) b_j
  int effective_rank = 0;
  int discarded = 0;
  double condition = 1.0;
  double eigen_floor = 1e-12;
};

/// Eigendecomposition of G; directions with eigenvalue < eigen_floor * max eigenvalue are
/// dropped and the rest scaled by eigenvalue^{-1/2}. Throws DegenerateBasisError when
/// nothing survives.
OrthoFactor orthonormalize(const Eigen::MatrixXcd& gram, double eigen_floor = 1e-12);

/// One more pass on an existing factor: the Gram matrix of the transformed basis is computed
/// from the samples and its inverse square root applied. Removes the loss of orthogonality an
/// ill-conditioned monomial Gram matrix leaves after the first pass. Rank and condition are kept.
OrthoFactor reorthonormalize(const OrthoFactor& factor, const Basis& basis, std::span<const Complex> nodes,
                             const Eigen::VectorXd& measure);

/// orthonormalize followed by reorthonormalize.
OrthoFactor orthonormal_factor(const Basis& basis, std::span<const Complex> nodes, const Eigen::VectorXd& measure,
                               double eigen_floor = 1e-12);

/// P_k u expressed in the orthonormal basis of an OrthoFactor.
struct Projection {
  double k = 0.0;
  Eigen::VectorXcd coeffs;
  Basis basis;
  OrthoFactor factor;

  Complex operator()(Complex z) const;
  std::vector<Complex> at(std::span<const Complex> points) const;
  /// Values of the orthonormal functions e_i at the points (points x rank).
  Eigen::MatrixXcd orthonormal_values(std::span<const Complex> points) const;
};

Projection project(const TestFunction& u, const Basis& basis, const OrthoFactor& factor, const Quadrature& q,
                   const Weight& w, double k);
/// Projection of an arbitrary function sampled at q.nodes.
Projection project(std::span<const Complex> u_samples, const Basis& basis, const OrthoFactor& factor,
                   const Quadrature& q, const Weight& w, double k);
Projection project(std::span<const Complex> u_samples, const Basis& basis, const OrthoFactor& factor,
                   const Quadrature& q, const Eigen::VectorXd& measure, double k);

/// v = u - P_k u at the given points; the L^2(e^{-k phi})-minimal solution of dbar v = dbar u.
std::vector<Complex> residual(const TestFunction& u, const Projection& p, std::span<const Complex> points);
Complex residual_at(const TestFunction& u, const Projection& p, Complex z);

/// K(z, w) = sum_i e_i(z) conj(e_i(w)).
Complex bergman_kernel(const Basis& basis, const OrthoFactor& factor, Complex z, Complex w_pt);

/// Degree selection: start at ceil(2 sqrt(k)) + 4 (or a fixed degree) and double while
/// the sup error on the probe points moves by more than `stabilization_threshold`.
struct DegreePolicy {
  enum class Initial { sqrt_rule, fixed };
  Initial initial = Initial::sqrt_rule;
  int fixed_degree = 8;
  double stabilization_threshold = 0.02;
  int max_degree = 128;
  double eigen_floor = 1e-12;

  int initial_degree(double k) const;

  bool operator==(const DegreePolicy&) const = default;
};

struct AdaptiveProjection {
  Projection projection;
  int degree = 0;
  bool reached_cap = false;
  std::vector<int> degrees_tried;
  std::vector<double> sup_errors;
};

/// Adaptive-degree projection of u. `probe_points` (normally E ∩ K) drive the stopping
/// rule. `kind == polynomials_deg_k` skips adaptation and uses min(round(k), max_degree).
AdaptiveProjection project_adaptive(const TestFunction& u, const Quadrature& q, const Weight& w, double k,
                                    std::span<const Complex> probe_points, const DegreePolicy& policy,
                                    BasisKind kind = BasisKind::monomials);

/// Centred finite-difference dbar = (d/dx + i d/dy)/2 of grid samples; one-sided at the edges.
std::vector<Complex> dbar_fd(std::span<const Complex> samples, const Quadrature& q);

/// max |g| over the samples.
double sup_abs(std::span<const Complex> g);

}  // namespace wbergman
