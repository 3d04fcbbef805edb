#include "wbergman/bergman.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "wbergman/errors.hpp"

namespace wbergman {

namespace {

constexpr std::size_t kChunk = 4096;

double bump_profile(double t, double rho) {
  const double s = t / rho;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_profile_derivative(double t, double rho) {
  const double s = t / rho;
  if (std::abs(s) >= 1.0) return 0.0;
  const double d = 1.0 - s * s;
  return bump_profile(t, rho) * (-2.0 * s / rho) / (d * d);
}

}  // namespace

TestFunction standard_bump(double rho) {
  if (!(rho > 0.0)) throw DomainError("standard_bump: rho must be positive");
  TestFunction u;
  u.name = "standard_bump";
  u.eval = [rho](Complex z) { return Complex{bump_profile(z.real(), rho) * bump_profile(z.imag(), rho), 0.0}; };
  u.dbar = [rho](Complex z) {
    const double gx = bump_profile(z.real(), rho), gy = bump_profile(z.imag(), rho);
    const double dx = bump_profile_derivative(z.real(), rho), dy = bump_profile_derivative(z.imag(), rho);
    return 0.5 * Complex{dx * gy, gx * dy};
  };
  u.support_rect = Rect{Complex{0.0, 0.0}, rho, rho};
  return u;
}

TestFunction make_test_function(std::string_view name, const Rect& domain) {
  if (name == "standard_bump") return standard_bump(0.7);
  if (name == "holomorphic_quadratic") {
    const Complex c = domain.center;
    const double s = domain.max_half_width();
    TestFunction u;
    u.name = "holomorphic_quadratic";
    u.eval = [c, s](Complex z) {
      const Complex w = (z - c) / s;
      return w * w;
    };
    u.dbar = [](Complex) { return Complex{0.0, 0.0}; };
    u.support_rect = domain;
    return u;
  }
  if (name == "conj_z") {
    TestFunction u;
    u.name = "conj_z";
    u.eval = [](Complex z) { return std::conj(z); };
    u.dbar = [](Complex) { return Complex{1.0, 0.0}; };
    u.support_rect = domain;
    return u;
  }
  if (name == "zero") {
    TestFunction u;
    u.name = "zero";
    u.eval = [](Complex) { return Complex{0.0, 0.0}; };
    u.dbar = [](Complex) { return Complex{0.0, 0.0}; };
    u.support_rect = domain;
    return u;
  }
  throw DomainError("unknown test function '" + std::string(name) + "'");
}

std::vector<std::string> list_test_functions() {
  return {"standard_bump", "holomorphic_quadratic", "conj_z", "zero"};
}

std::vector<Complex> sample(const std::function<Complex(Complex)>& g, std::span<const Complex> nodes) {
  std::vector<Complex> out(nodes.size());
  std::transform(nodes.begin(), nodes.end(), out.begin(), g);
  return out;
}

Complex Basis::eval(int j, Complex z) const {
  const Complex w = (z - center) / scale;
  Complex p{1.0, 0.0};
  for (int i = 0; i < j; ++i) p *= w;
  return p;
}

Eigen::RowVectorXcd Basis::row(Complex z) const {
  Eigen::RowVectorXcd r(size());
  const Complex w = (z - center) / scale;
  Complex p{1.0, 0.0};
  for (int j = 0; j <= degree; ++j) {
    r(j) = p;
    p *= w;
  }
  return r;
}

Eigen::MatrixXcd Basis::sample(std::span<const Complex> nodes) const {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXcd b(n, size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex w = (nodes[static_cast<std::size_t>(i)] - center) / scale;
    Complex p{1.0, 0.0};
    for (int j = 0; j <= degree; ++j) {
      b(i, j) = p;
      p *= w;
    }
  }
  return b;
}

Basis make_basis(BasisKind kind, const Rect& domain, int degree) {
  if (degree < 0) throw DomainError("make_basis: degree must be >= 0");
  return Basis{kind, domain.center, degree, domain.max_half_width()};
}

Eigen::VectorXd weighted_measure(const Quadrature& q, const Weight& w, double k) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    mu(static_cast<Eigen::Index>(i)) = q.weights[i] * std::exp(-k * w.eval(q.nodes[i]));
  }
  return mu;
}

Complex inner_product(std::span<const Complex> g1, std::span<const Complex> g2, const Quadrature& q,
                      const Weight& w, double k) {
  if (g1.size() != q.size() || g2.size() != q.size()) {
    throw DomainError("inner_product: samples are not aligned with the quadrature nodes");
  }
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += g1[i] * std::conj(g2[i]) * (q.weights[i] * std::exp(-k * w.eval(q.nodes[i])));
  }
  return s;
}

namespace {

// Gram matrix of the columns basis.sample(nodes) * transform (identity when transform is empty).
Eigen::MatrixXcd chunked_gram(const Basis& basis, const Eigen::MatrixXcd& transform, std::span<const Complex> nodes,
                              const Eigen::VectorXd& measure) {
  const Eigen::Index m = transform.size() == 0 ? basis.size() : transform.cols();
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
  for (std::size_t start = 0; start < nodes.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, nodes.size() - start);
    Eigen::MatrixXcd a = basis.sample(nodes.subspan(start, len));
    if (transform.size() != 0) a = a * transform;
    const auto root = measure.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)).cwiseSqrt();
    a = root.asDiagonal() * a;
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.adjoint());
  }
  Eigen::MatrixXcd full = g.selfadjointView<Eigen::Lower>();
  return full;
}

}  // namespace

Eigen::MatrixXcd gram_matrix(const Basis& basis, std::span<const Complex> nodes, const Eigen::VectorXd& measure) {
  return chunked_gram(basis, Eigen::MatrixXcd{}, nodes, measure);
}

Eigen::MatrixXcd gram_matrix(const Basis& basis, const Quadrature& q, const Weight& w, double k) {
  return gram_matrix(basis, q.nodes, weighted_measure(q, w, k));
}

OrthoFactor orthonormalize(const Eigen::MatrixXcd& gram, double eigen_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  if (es.info() != Eigen::Success) throw DegenerateBasisError("orthonormalize: eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::Index n = lam.size();
  const double top = n > 0 ? lam(n - 1) : 0.0;
  if (!(top > 0.0)) throw DegenerateBasisError("orthonormalize: Gram matrix has no positive eigenvalue");

  // Descending eigenvalue order; stable so equal eigenvalues keep the solver's order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return lam(a) > lam(b); });
  std::vector<Eigen::Index> kept;
  for (auto i : order) {
    if (lam(i) >= eigen_floor * top && lam(i) > 0.0) kept.push_back(i);
  }
  if (kept.empty()) throw DegenerateBasisError("orthonormalize: all eigenvalues below the floor");

  OrthoFactor f;
  f.eigen_floor = eigen_floor;
  f.effective_rank = static_cast<int>(kept.size());
  f.discarded = static_cast<int>(n) - f.effective_rank;
  f.transform.resize(n, f.effective_rank);
  for (int c = 0; c < f.effective_rank; ++c) {
    Eigen::VectorXcd v = es.eigenvectors().col(kept[static_cast<std::size_t>(c)]);
    // Fix the phase: largest component real and positive.
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v(big)) / std::abs(v(big));
    f.transform.col(c) = v / std::sqrt(lam(kept[static_cast<std::size_t>(c)]));
  }
  f.condition = lam(kept.front()) / lam(kept.back());
  return f;
}

OrthoFactor reorthonormalize(const OrthoFactor& factor, const Basis& basis, std::span<const Complex> nodes,
                             const Eigen::VectorXd& measure) {
  const Eigen::MatrixXcd g2 = chunked_gram(basis, factor.transform, nodes, measure);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g2);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw DegenerateBasisError("reorthonormalize: transformed Gram matrix is not positive definite");
  }
  OrthoFactor f = factor;
  f.transform = factor.transform * es.operatorInverseSqrt();
  return f;
}

OrthoFactor orthonormal_factor(const Basis& basis, std::span<const Complex> nodes, const Eigen::VectorXd& measure,
                               double eigen_floor) {
  return reorthonormalize(orthonormalize(gram_matrix(basis, nodes, measure), eigen_floor), basis, nodes, measure);
}

Eigen::MatrixXcd Projection::orthonormal_values(std::span<const Complex> points) const {
  return basis.sample(points) * factor.transform;
}

Complex Projection::operator()(Complex z) const { return (basis.row(z) * factor.transform * coeffs)(0); }

std::vector<Complex> Projection::at(std::span<const Complex> points) const {
  std::vector<Complex> out(points.size());
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, points.size() - start);
    const Eigen::VectorXcd vals = orthonormal_values(points.subspan(start, len)) * coeffs;
    for (std::size_t i = 0; i < len; ++i) out[start + i] = vals(static_cast<Eigen::Index>(i));
  }
  return out;
}

Projection project(std::span<const Complex> u_samples, const Basis& basis, const OrthoFactor& factor,
                   const Quadrature& q, const Eigen::VectorXd& measure, double k) {
  if (u_samples.size() != q.size()) throw DomainError("project: samples are not aligned with the quadrature nodes");
  if (factor.transform.rows() != basis.size()) throw DomainError("project: factor does not match the basis");
  Projection p;
  p.k = k;
  p.basis = basis;
  p.factor = factor;
  p.coeffs = Eigen::VectorXcd::Zero(factor.effective_rank);
  const std::span<const Complex> nodes(q.nodes);
  for (std::size_t start = 0; start < q.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, q.size() - start);
    const Eigen::MatrixXcd e = p.orthonormal_values(nodes.subspan(start, len));
    Eigen::VectorXcd wu(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) {
      wu(static_cast<Eigen::Index>(i)) = u_samples[start + i] * measure(static_cast<Eigen::Index>(start + i));
    }
    p.coeffs.noalias() += e.adjoint() * wu;
  }
  return p;
}

Projection project(std::span<const Complex> u_samples, const Basis& basis, const OrthoFactor& factor,
                   const Quadrature& q, const Weight& w, double k) {
  return project(u_samples, basis, factor, q, weighted_measure(q, w, k), k);
}

Projection project(const TestFunction& u, const Basis& basis, const OrthoFactor& factor, const Quadrature& q,
                   const Weight& w, double k) {
  const auto us = sample(u.eval, q.nodes);
  return project(us, basis, factor, q, w, k);
}

std::vector<Complex> residual(const TestFunction& u, const Projection& p, std::span<const Complex> points) {
  auto v = p.at(points);
  for (std::size_t i = 0; i < points.size(); ++i) v[i] = u.eval(points[i]) - v[i];
  return v;
}

Complex residual_at(const TestFunction& u, const Projection& p, Complex z) { return u.eval(z) - p(z); }

Complex bergman_kernel(const Basis& basis, const OrthoFactor& factor, Complex z, Complex w_pt) {
  const Eigen::RowVectorXcd ez = basis.row(z) * factor.transform;
  const Eigen::RowVectorXcd ew = basis.row(w_pt) * factor.transform;
  return (ez * ew.adjoint())(0);
}

int DegreePolicy::initial_degree(double k) const {
  if (initial == Initial::fixed) return std::min(fixed_degree, max_degree);
  return std::min(static_cast<int>(std::ceil(2.0 * std::sqrt(k))) + 4, max_degree);
}

AdaptiveProjection project_adaptive(const TestFunction& u, const Quadrature& q, const Weight& w, double k,
                                    std::span<const Complex> probe_points, const DegreePolicy& policy,
                                    BasisKind kind) {
  const Eigen::VectorXd measure = weighted_measure(q, w, k);
  const auto us = sample(u.eval, q.nodes);
  const auto probe_u = sample(u.eval, probe_points);
  const double u_scale = std::max(sup_abs(us), sup_abs(probe_u));

  auto attempt = [&](int degree) {
    const Basis basis = make_basis(kind, q.rect, degree);
    const OrthoFactor factor = orthonormal_factor(basis, q.nodes, measure, policy.eigen_floor);
    Projection p = project(us, basis, factor, q, measure, k);
    const auto pv = p.at(probe_points);
    double err = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) err = std::max(err, std::abs(probe_u[i] - pv[i]));
    return std::pair{std::move(p), err};
  };

  AdaptiveProjection out;
  if (kind == BasisKind::polynomials_deg_k) {
    const int degree = std::min(static_cast<int>(std::lround(k)), policy.max_degree);
    auto [p, err] = attempt(degree);
    out.projection = std::move(p);
    out.degree = degree;
    out.reached_cap = degree == policy.max_degree;
    out.degrees_tried.push_back(degree);
    out.sup_errors.push_back(err);
    return out;
  }

  int degree = policy.initial_degree(k);
  for (;;) {
    auto [p, err] = attempt(degree);
    out.projection = std::move(p);
    out.degree = degree;
    out.degrees_tried.push_back(degree);
    out.sup_errors.push_back(err);
    const std::size_t n = out.sup_errors.size();
    if (n >= 2) {
      const double prev = out.sup_errors[n - 2];
      const bool stable = std::abs(err - prev) <= policy.stabilization_threshold * prev ||
                          std::max(err, prev) <= 1e-10 * u_scale;
      if (stable) break;
    }
    if (degree >= policy.max_degree) {
      out.reached_cap = true;
      break;
    }
    degree = std::min(2 * degree, policy.max_degree);
  }
  return out;
}

std::vector<Complex> dbar_fd(std::span<const Complex> samples, const Quadrature& q) {
  if (samples.size() != q.size()) throw DomainError("dbar_fd: samples are not aligned with the grid");
  std::vector<Complex> out(samples.size());
  for (int j = 0; j < q.ny; ++j) {
    for (int i = 0; i < q.nx; ++i) {
      const int il = std::max(i - 1, 0), ir = std::min(i + 1, q.nx - 1);
      const int jl = std::max(j - 1, 0), jr = std::min(j + 1, q.ny - 1);
      const Complex ux = (samples[q.index(ir, j)] - samples[q.index(il, j)]) / ((ir - il) * q.hx);
      const Complex uy = (samples[q.index(i, jr)] - samples[q.index(i, jl)]) / ((jr - jl) * q.hy);
      out[q.index(i, j)] = 0.5 * (ux + Complex{0.0, 1.0} * uy);
    }
  }
  return out;
}

double sup_abs(std::span<const Complex> g) {
  double s = 0.0;
  for (const auto& x : g) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace wbergman
