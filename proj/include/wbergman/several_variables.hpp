#pragma once

// Two complex variables: product grids, tensor monomials z1^i z2^j, and the same
// Gram / orthonormalize / project pipeline as in one variable.

#include <Eigen/Core>
#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wbergman/bergman.hpp"
#include "wbergman/estimates.hpp"
#include "wbergman/geometry.hpp"
#include "wbergman/weights.hpp"

namespace wbergman {

using Point2 = std::array<Complex, 2>;

/// Product of two planar quadratures; node (a, b) carries weight w_a * w_b.
struct Quadrature2 {
  Quadrature first;
  Quadrature second;
  std::vector<Point2> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

Quadrature2 build_product_grid(const Quadrature& q1, const Quadrature& q2);

struct Weight2 {
  std::string name;
  std::function<double(const Point2&)> eval;
  /// (d^2 phi / dz_i dzbar_j), Hermitian.
  std::function<Eigen::Matrix2cd(const Point2&)> complex_hessian;
  double delta = 0.0;
};

/// phi(z1, z2) = phi1(z1) + phi2(z2); delta = min(delta1, delta2).
Weight2 make_sum_weight(const Weight& w1, const Weight& w2);

/// phi = (Im z1)^2 + (Im z2)^2 + gamma (Im z1 - Im z2)^2. Complex Hessian
/// I/2 + (gamma/2) [[1, -1], [-1, 1]] with eigenvalues 1/2 and 1/2 + gamma; E = R^2.
Weight2 make_coupled_line_weight(double gamma);

struct PshReport2 {
  double min_eig = 0.0;
  bool ok = false;
  Point2 worst_node{};
  /// max entrywise |FD Hessian - analytic Hessian| over the nodes.
  double fd_max_abs_error = 0.0;
};

/// Smallest eigenvalue of the complex Hessian over the nodes, with a centred finite-difference
/// cross-check of all four entries (step = grid spacing of each factor).
PshReport2 verify_plurisubharmonic(const Weight2& w, const Quadrature2& q, double required_delta);

/// z1^i z2^j (scaled by the domain half-widths), 0 <= i, j <= degree, index i * (degree + 1) + j.
struct TensorBasis2 {
  Complex center1{};
  Complex center2{};
  double scale1 = 1.0;
  double scale2 = 1.0;
  int degree = 0;

  static constexpr int max_degree = 12;

  int size() const { return (degree + 1) * (degree + 1); }
  Eigen::RowVectorXcd row(const Point2& z) const;
  Eigen::MatrixXcd sample(std::span<const Point2> nodes) const;
};

/// Throws DomainError for degree outside [0, 12].
TensorBasis2 make_tensor_basis(const Rect& d1, const Rect& d2, int degree);

struct TestFunction2 {
  std::string name;
  std::function<Complex(const Point2&)> eval;
  /// (dbar_1 u, dbar_2 u).
  std::function<std::array<Complex, 2>(const Point2&)> dbar;
};

/// (z1, z2) -> u1(z1) u2(z2).
TestFunction2 product_test_function(const TestFunction& u1, const TestFunction& u2);

Eigen::VectorXd weighted_measure(const Quadrature2& q, const Weight2& w, double k);
Eigen::MatrixXcd gram_matrix(const TensorBasis2& basis, const Quadrature2& q, const Eigen::VectorXd& measure);

struct Projection2 {
  double k = 0.0;
  Eigen::VectorXcd coeffs;
  TensorBasis2 basis;
  OrthoFactor factor;

  Complex operator()(const Point2& z) const;
  std::vector<Complex> at(std::span<const Point2> points) const;
};

Projection2 project(const TestFunction2& u, const TensorBasis2& basis, const OrthoFactor& factor,
                    const Quadrature2& q, const Eigen::VectorXd& measure, double k);

/// Residual v = u - P_k u at the points.
std::vector<Complex> residual(const TestFunction2& u, const Projection2& p, std::span<const Point2> points);

/// Sum |g|^2 over the measure.
double weighted_norm_squared(std::span<const Complex> g, const Eigen::VectorXd& measure);

/// max |u - P_k u| over points of E ∩ K (the caller passes points already in E ∩ K).
double sup_error_on_E(const TestFunction2& u, const Projection2& p, std::span<const Point2> points);

/// n = 2 version of local_estimate_check: ball |z - a|^2 < 1/k in C^2, factor k^2.
LocalEstimate local_estimate_check(Complex v_at_a, std::span<const Complex> v,
                                   std::span<const std::array<Complex, 2>> f, double k, const Point2& a,
                                   const Quadrature2& q);

}  // namespace wbergman
