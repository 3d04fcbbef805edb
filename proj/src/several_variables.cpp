#include "wbergman/several_variables.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "wbergman/errors.hpp"

namespace wbergman {

namespace {
constexpr std::size_t kChunk = 4096;
}

Quadrature2 build_product_grid(const Quadrature& q1, const Quadrature& q2) {
  Quadrature2 q;
  q.first = q1;
  q.second = q2;
  q.nodes.reserve(q1.size() * q2.size());
  q.weights.reserve(q1.size() * q2.size());
  for (std::size_t a = 0; a < q1.size(); ++a) {
    for (std::size_t b = 0; b < q2.size(); ++b) {
      q.nodes.push_back({q1.nodes[a], q2.nodes[b]});
      q.weights.push_back(q1.weights[a] * q2.weights[b]);
    }
  }
  return q;
}

Weight2 make_sum_weight(const Weight& w1, const Weight& w2) {
  Weight2 w;
  w.name = w1.name + "+" + w2.name;
  w.eval = [f1 = w1.eval, f2 = w2.eval](const Point2& z) { return f1(z[0]) + f2(z[1]); };
  w.complex_hessian = [h1 = w1.complex_hessian, h2 = w2.complex_hessian](const Point2& z) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = h1(z[0]);
    m(1, 1) = h2(z[1]);
    return m;
  };
  w.delta = std::min(w1.delta, w2.delta);
  return w;
}

Weight2 make_coupled_line_weight(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("coupled_line: gamma must be >= 0");
  Weight2 w;
  w.name = "coupled_line";
  w.eval = [gamma](const Point2& z) {
    const double y1 = z[0].imag(), y2 = z[1].imag();
    return y1 * y1 + y2 * y2 + gamma * (y1 - y2) * (y1 - y2);
  };
  w.complex_hessian = [gamma](const Point2&) {
    Eigen::Matrix2cd m;
    m << 0.5 + 0.5 * gamma, -0.5 * gamma, -0.5 * gamma, 0.5 + 0.5 * gamma;
    return m;
  };
  w.delta = 0.5;
  return w;
}

namespace {

// phi as a function of the four real coordinates (x1, y1, x2, y2).
double eval_real(const Weight2& w, const std::array<double, 4>& r) {
  return w.eval(Point2{Complex{r[0], r[1]}, Complex{r[2], r[3]}});
}

double second_partial(const Weight2& w, std::array<double, 4> r, int a, int b, const std::array<double, 4>& h) {
  const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
  if (a == b) {
    const double f0 = eval_real(w, r);
    auto p = r, m = r;
    p[ua] += h[ua];
    m[ua] -= h[ua];
    return (eval_real(w, p) - 2.0 * f0 + eval_real(w, m)) / (h[ua] * h[ua]);
  }
  auto at = [&](double sa, double sb) {
    auto s = r;
    s[ua] += sa * h[ua];
    s[ub] += sb * h[ub];
    return eval_real(w, s);
  };
  return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h[ua] * h[ub]);
}

}  // namespace

PshReport2 verify_plurisubharmonic(const Weight2& w, const Quadrature2& q, double required_delta) {
  PshReport2 rep;
  rep.min_eig = std::numeric_limits<double>::infinity();
  const std::array<double, 4> h{q.first.hx, q.first.hy, q.second.hx, q.second.hy};
  for (const auto& z : q.nodes) {
    const Eigen::Matrix2cd m = w.complex_hessian(z);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < rep.min_eig) {
      rep.min_eig = lo;
      rep.worst_node = z;
    }
    const std::array<double, 4> r{z[0].real(), z[0].imag(), z[1].real(), z[1].imag()};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
        const double re = second_partial(w, r, xi, xj, h) + second_partial(w, r, yi, yj, h);
        const double im = second_partial(w, r, xi, yj, h) - second_partial(w, r, yi, xj, h);
        const Complex fd = 0.25 * Complex{re, im};
        rep.fd_max_abs_error = std::max(rep.fd_max_abs_error, std::abs(fd - m(i, j)));
      }
    }
  }
  rep.ok = rep.min_eig >= required_delta;
  return rep;
}

Eigen::RowVectorXcd TensorBasis2::row(const Point2& z) const {
  const int d = degree + 1;
  Eigen::RowVectorXcd p1(d), p2(d);
  const Complex w1 = (z[0] - center1) / scale1, w2 = (z[1] - center2) / scale2;
  Complex a{1.0, 0.0}, b{1.0, 0.0};
  for (int i = 0; i < d; ++i) {
    p1(i) = a;
    p2(i) = b;
    a *= w1;
    b *= w2;
  }
  Eigen::RowVectorXcd r(size());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) r(i * d + j) = p1(i) * p2(j);
  }
  return r;
}

Eigen::MatrixXcd TensorBasis2::sample(std::span<const Point2> nodes) const {
  Eigen::MatrixXcd b(static_cast<Eigen::Index>(nodes.size()), size());
  for (std::size_t i = 0; i < nodes.size(); ++i) b.row(static_cast<Eigen::Index>(i)) = row(nodes[i]);
  return b;
}

TensorBasis2 make_tensor_basis(const Rect& d1, const Rect& d2, int degree) {
  if (degree < 0 || degree > TensorBasis2::max_degree) {
    throw DomainError("make_tensor_basis: degree per variable must be in [0, 12]");
  }
  return TensorBasis2{d1.center, d2.center, d1.max_half_width(), d2.max_half_width(), degree};
}

TestFunction2 product_test_function(const TestFunction& u1, const TestFunction& u2) {
  TestFunction2 u;
  u.name = u1.name + "*" + u2.name;
  u.eval = [a = u1.eval, b = u2.eval](const Point2& z) { return a(z[0]) * b(z[1]); };
  u.dbar = [a = u1.eval, b = u2.eval, da = u1.dbar, db = u2.dbar](const Point2& z) {
    return std::array<Complex, 2>{da(z[0]) * b(z[1]), a(z[0]) * db(z[1])};
  };
  return u;
}

Eigen::VectorXd weighted_measure(const Quadrature2& q, const Weight2& w, double k) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    mu(static_cast<Eigen::Index>(i)) = q.weights[i] * std::exp(-k * w.eval(q.nodes[i]));
  }
  return mu;
}

Eigen::MatrixXcd gram_matrix(const TensorBasis2& basis, const Quadrature2& q, const Eigen::VectorXd& measure) {
  const Eigen::Index m = basis.size();
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
  const std::span<const Point2> nodes(q.nodes);
  for (std::size_t start = 0; start < q.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, q.size() - start);
    Eigen::MatrixXcd a = basis.sample(nodes.subspan(start, len));
    a = measure.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)).cwiseSqrt().asDiagonal() * a;
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.adjoint());
  }
  Eigen::MatrixXcd full = g.selfadjointView<Eigen::Lower>();
  return full;
}

Complex Projection2::operator()(const Point2& z) const { return (basis.row(z) * factor.transform * coeffs)(0); }

std::vector<Complex> Projection2::at(std::span<const Point2> points) const {
  std::vector<Complex> out(points.size());
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, points.size() - start);
    const Eigen::VectorXcd vals = basis.sample(points.subspan(start, len)) * factor.transform * coeffs;
    for (std::size_t i = 0; i < len; ++i) out[start + i] = vals(static_cast<Eigen::Index>(i));
  }
  return out;
}

Projection2 project(const TestFunction2& u, const TensorBasis2& basis, const OrthoFactor& factor,
                    const Quadrature2& q, const Eigen::VectorXd& measure, double k) {
  if (factor.transform.rows() != basis.size()) throw DomainError("project: factor does not match the basis");
  Projection2 p;
  p.k = k;
  p.basis = basis;
  p.factor = factor;
  p.coeffs = Eigen::VectorXcd::Zero(factor.effective_rank);
  const std::span<const Point2> nodes(q.nodes);
  for (std::size_t start = 0; start < q.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, q.size() - start);
    const Eigen::MatrixXcd e = basis.sample(nodes.subspan(start, len)) * factor.transform;
    Eigen::VectorXcd wu(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) {
      wu(static_cast<Eigen::Index>(i)) = u.eval(q.nodes[start + i]) * measure(static_cast<Eigen::Index>(start + i));
    }
    p.coeffs.noalias() += e.adjoint() * wu;
  }
  return p;
}

std::vector<Complex> residual(const TestFunction2& u, const Projection2& p, std::span<const Point2> points) {
  auto v = p.at(points);
  for (std::size_t i = 0; i < points.size(); ++i) v[i] = u.eval(points[i]) - v[i];
  return v;
}

double weighted_norm_squared(std::span<const Complex> g, const Eigen::VectorXd& measure) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += std::norm(g[i]) * measure(static_cast<Eigen::Index>(i));
  return s;
}

double sup_error_on_E(const TestFunction2& u, const Projection2& p, std::span<const Point2> points) {
  if (points.empty()) throw EmptySetError("sup_error_on_E: E ∩ K is empty");
  const auto pu = p.at(points);
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s = std::max(s, std::abs(u.eval(points[i]) - pu[i]));
  return s;
}

LocalEstimate local_estimate_check(Complex v_at_a, std::span<const Complex> v,
                                   std::span<const std::array<Complex, 2>> f, double k, const Point2& a,
                                   const Quadrature2& q) {
  if (v.size() != q.size() || f.size() != q.size()) {
    throw DomainError("local_estimate_check: samples are not aligned with the quadrature nodes");
  }
  const double r = 1.0 / std::sqrt(k);
  if (!q.first.rect.contains_disk(a[0], r) || !q.second.rect.contains_disk(a[1], r)) {
    throw DomainError("local_estimate_check: ball is not contained in the domain");
  }
  LocalEstimate out;
  out.lhs = std::norm(v_at_a);
  double integral = 0.0, fsup = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d2 = std::norm(q.nodes[i][0] - a[0]) + std::norm(q.nodes[i][1] - a[1]);
    if (k * d2 >= 1.0) continue;
    integral += std::norm(v[i]) * q.weights[i];
    fsup = std::max(fsup, std::norm(f[i][0]) + std::norm(f[i][1]));
  }
  out.rhs_l2 = k * k * integral;
  out.rhs_f = fsup / k;
  return out;
}

}  // namespace wbergman
