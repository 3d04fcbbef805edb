#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wbergman/bergman.hpp"
#include "wbergman/errors.hpp"
#include "wbergman/geometry.hpp"
#include "wbergman/weights.hpp"

using namespace wbergman;

namespace {

Weight zero_weight() {
  Weight w;
  w.name = "zero";
  w.eval = [](Complex) { return 0.0; };
  w.complex_hessian = [](Complex) { return 0.0; };
  return w;
}

double weighted_norm(std::span<const Complex> g, const Quadrature& q, const Weight& w, double k) {
  return std::sqrt(inner_product(g, g, q, w, k).real());
}

struct Setup {
  Quadrature q = build_grid(unit_square(), 128, 128, QuadratureRule::end_corrected);
  Weight w = make_model_weight(WeightModel::flat_line, {}, unit_square());
  TestFunction u = standard_bump();
  double k = 64.0;
  Basis basis = make_basis(BasisKind::monomials, unit_square(), 20);
  OrthoFactor factor = orthonormal_factor(basis, q.nodes, weighted_measure(q, w, k));
  Projection p = project(u, basis, factor, q, w, k);
};

}  // namespace

TEST_SUITE("bergman") {
  TEST_CASE("inner products with k = 0") {
    const auto q = build_grid(unit_square(), 64, 64);
    const std::vector<Complex> one(q.size(), 1.0);
    const auto z = sample([](Complex x) { return x; }, q.nodes);
    CHECK(inner_product(one, one, q, zero_weight(), 0.0).real() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(inner_product(one, z, q, zero_weight(), 0.0)) <= 1e-13);
  }

  TEST_CASE("<1, 1> under flat_line at k = 100 against the closed-form Gaussian integral") {
    const auto q = build_grid(unit_square(), 512, 512);
    const std::vector<Complex> one(q.size(), 1.0);
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const double exact = 2.0 * std::sqrt(std::numbers::pi / 100.0) * std::erf(10.0);
    const double got = inner_product(one, one, q, w, 100.0).real();
    CHECK(std::abs(got - exact) / exact <= 1e-6);
  }

  TEST_CASE("gram matrix: {1} at k = 0 and parity zeros") {
    const auto q = build_grid(unit_square(), 32, 32);
    const auto g0 = gram_matrix(make_basis(BasisKind::monomials, unit_square(), 0), q, zero_weight(), 0.0);
    REQUIRE(g0.rows() == 1);
    CHECK(g0(0, 0).real() == doctest::Approx(4.0).epsilon(1e-14));

    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto g = gram_matrix(make_basis(BasisKind::monomials, unit_square(), 7), q, w, 9.0);
    for (int i = 0; i < g.rows(); ++i) {
      for (int j = 0; j < g.cols(); ++j) {
        if ((i - j) % 2 != 0) CHECK(std::abs(g(i, j)) <= 1e-14 * std::abs(g(0, 0)));
        CHECK(std::abs(g(i, j) - std::conj(g(j, i))) <= 1e-15 * std::abs(g(0, 0)));
      }
    }
  }

  TEST_CASE("gram matrix stable under grid refinement (end-corrected)") {
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto basis = make_basis(BasisKind::monomials, unit_square(), 6);
    const auto g1 = gram_matrix(basis, build_grid(unit_square(), 256, 256, QuadratureRule::end_corrected), w, 25.0);
    const auto g2 = gram_matrix(basis, build_grid(unit_square(), 1024, 1024, QuadratureRule::end_corrected), w, 25.0);
    double worst = 0.0;
    for (int i = 0; i < g1.rows(); ++i) {
      for (int j = 0; j < g1.cols(); ++j) {
        if (std::abs(g2(i, j)) < 1e-12 * std::abs(g2(0, 0))) continue;  // parity zeros
        worst = std::max(worst, std::abs(g1(i, j) - g2(i, j)) / std::abs(g2(i, j)));
      }
    }
    CHECK(worst <= 1e-5);
  }

  TEST_CASE("orthonormalize: identity and diagonal") {
    const auto f = orthonormalize(Eigen::MatrixXcd::Identity(3, 3));
    CHECK(f.effective_rank == 3);
    CHECK(f.discarded == 0);
    CHECK(f.condition == 1.0);
    CHECK((f.transform.adjoint() * f.transform - Eigen::MatrixXcd::Identity(3, 3)).norm() <= 1e-15);

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    const auto fd = orthonormalize(d);
    CHECK(fd.condition == doctest::Approx(4.0));
    CHECK(std::abs(fd.transform(0, 0) - 0.5) <= 1e-15);
    CHECK(std::abs(fd.transform(1, 1) - 1.0) <= 1e-15);
    CHECK(std::abs(fd.transform(0, 1)) <= 1e-15);
    CHECK(std::abs(fd.transform(1, 0)) <= 1e-15);
  }

  TEST_CASE("orthonormalize: random SPD and the floor") {
    std::mt19937 rng(12345);
    std::normal_distribution<double> n01;
    Eigen::MatrixXcd a(10, 10);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) a(i, j) = Complex{n01(rng), n01(rng)};
    }
    const Eigen::MatrixXcd g = a.adjoint() * a + 0.1 * Eigen::MatrixXcd::Identity(10, 10);
    const auto f = orthonormalize(g);
    CHECK(f.effective_rank == 10);
    CHECK((f.transform.adjoint() * g * f.transform - Eigen::MatrixXcd::Identity(10, 10)).norm() <= 1e-10);

    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(3, 3);
    s(0, 0) = 1.0;
    s(1, 1) = 1e-14;
    s(2, 2) = 1e-3;
    const auto fs = orthonormalize(s, 1e-12);
    CHECK(fs.effective_rank == 2);
    CHECK(fs.discarded == 1);
    CHECK(fs.condition == doctest::Approx(1e3));

    CHECK_THROWS_AS(orthonormalize(Eigen::MatrixXcd::Zero(2, 2)), DegenerateBasisError);
  }

  TEST_CASE("reorthonormalize restores orthonormality lost to an ill-conditioned Gram matrix") {
    const auto q = build_grid(unit_square(), 128, 128, QuadratureRule::end_corrected);
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto mu = weighted_measure(q, w, 64.0);
    const auto basis = make_basis(BasisKind::monomials, unit_square(), 40);
    auto deviation = [&](const OrthoFactor& f) {
      const Eigen::MatrixXcd a = mu.cwiseSqrt().asDiagonal() * (basis.sample(q.nodes) * f.transform);
      const Eigen::MatrixXcd g = a.adjoint() * a;
      return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    };
    const auto once = orthonormalize(gram_matrix(basis, q.nodes, mu));
    const auto twice = reorthonormalize(once, basis, q.nodes, mu);
    CHECK(once.condition > 1e10);
    CHECK(deviation(once) > 1e-8);
    CHECK(deviation(twice) <= 1e-10);
    CHECK(twice.effective_rank == once.effective_rank);
    CHECK(twice.condition == once.condition);
    // the correction is a near-identity change of basis
    const Eigen::MatrixXcd t = once.transform.completeOrthogonalDecomposition().solve(twice.transform);
    CHECK((t - Eigen::MatrixXcd::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff() <= 1e-3);
  }

  TEST_CASE("in-span holomorphic input is reproduced") {
    const auto q = build_grid(unit_square(), 128, 128, QuadratureRule::end_corrected);
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto u = make_test_function("holomorphic_quadratic", unit_square());
    const auto basis = make_basis(BasisKind::monomials, unit_square(), 6);
    const auto p = project(u, basis, orthonormalize(gram_matrix(basis, q, w, 16.0)), q, w, 16.0);
    const auto v = residual(u, p, q.nodes);
    CHECK(sup_abs(v) <= 1e-8 * sup_abs(sample(u.eval, q.nodes)));
  }

  TEST_CASE("conj(z) projects to 0 at k = 0 on a symmetric square") {
    const auto q = build_grid(unit_square(), 64, 64);
    const auto basis = make_basis(BasisKind::monomials, unit_square(), 2);
    const auto u = make_test_function("conj_z", unit_square());
    const auto us = sample(u.eval, q.nodes);
    // the moments <conj z, z^j>, j <= 2, vanish on the grid
    for (int j = 0; j <= 2; ++j) {
      const auto bj = sample([&](Complex z) { return basis.eval(j, z); }, q.nodes);
      CHECK(std::abs(inner_product(us, bj, q, zero_weight(), 0.0)) <= 1e-13);
    }
    const auto p = project(u, basis, orthonormalize(gram_matrix(basis, q, zero_weight(), 0.0)), q, zero_weight(), 0.0);
    CHECK(p.coeffs.norm() <= 1e-13);
  }

  TEST_CASE("projection algebra on the bump") {
    const Setup s;
    const auto us = sample(s.u.eval, s.q.nodes);
    const auto pu = s.p.at(s.q.nodes);
    const auto v = residual(s.u, s.p, s.q.nodes);
    const double unorm = weighted_norm(us, s.q, s.w, s.k);

    SUBCASE("residual is orthogonal to every retained direction") {
      const Eigen::MatrixXcd e = s.p.orthonormal_values(s.q.nodes);
      for (int i = 0; i < e.cols(); ++i) {
        std::vector<Complex> ei(s.q.size());
        for (std::size_t n = 0; n < s.q.size(); ++n) ei[n] = e(static_cast<Eigen::Index>(n), i);
        CHECK(std::abs(inner_product(v, ei, s.q, s.w, s.k)) <= 1e-8 * unorm);
      }
    }
    SUBCASE("Pythagoras") {
      const double lhs = std::pow(weighted_norm(v, s.q, s.w, s.k), 2) + std::pow(weighted_norm(pu, s.q, s.w, s.k), 2);
      CHECK(std::abs(lhs - unorm * unorm) <= 1e-8 * unorm * unorm);
    }
    SUBCASE("idempotence") {
      const auto pp = project(pu, s.basis, s.factor, s.q, s.w, s.k);
      CHECK((pp.coeffs - s.p.coeffs).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("self-adjointness against random g") {
      std::mt19937 rng(7);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      std::vector<Complex> g(s.q.size());
      for (auto& x : g) x = Complex{d(rng), d(rng)};
      const auto pg = project(g, s.basis, s.factor, s.q, s.w, s.k).at(s.q.nodes);
      const Complex a = inner_product(pu, g, s.q, s.w, s.k);
      const Complex b = inner_product(us, pg, s.q, s.w, s.k);
      CHECK(std::abs(a - b) <= 1e-8 * std::max(std::abs(a), 1e-300));
    }
    SUBCASE("minimality under perturbations, quadratic in eps") {
      const double base = std::pow(weighted_norm(v, s.q, s.w, s.k), 2);
      const Eigen::MatrixXcd e = s.p.orthonormal_values(s.q.nodes);
      for (int i : {0, 3, static_cast<int>(e.cols()) - 1}) {
        for (Complex dir : {Complex{1, 0}, Complex{0, 1}}) {
          auto growth = [&](double eps) {
            std::vector<Complex> vp(v.size());
            for (std::size_t n = 0; n < v.size(); ++n) vp[n] = v[n] - eps * dir * e(static_cast<Eigen::Index>(n), i);
            return std::pow(weighted_norm(vp, s.q, s.w, s.k), 2) - base;
          };
          const double g1 = growth(1e-3), g2 = growth(2e-3);
          CHECK(g1 > 0.0);
          CHECK(g2 / g1 == doctest::Approx(4.0).epsilon(1e-3));
          CHECK(g1 == doctest::Approx(1e-6).epsilon(1e-3));  // e_i has unit norm
        }
      }
    }
    SUBCASE("dbar_fd: dbar u is recovered and dbar Pu vanishes, both at O(h^2) inside K") {
      // Pu has large derivatives at this k, so its FD residual is checked by its rate only.
      const auto k_set = shrink_to_compact(unit_square(), 0.25);
      auto err_on = [&](int n) {
        const auto g = build_grid(unit_square(), n, n);
        const auto du = dbar_fd(sample(s.u.eval, g.nodes), g);
        const auto dp = dbar_fd(s.p.at(g.nodes), g);
        double eu = 0.0, ep = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!k_set.contains(g.nodes[i])) continue;
          eu = std::max(eu, std::abs(du[i] - s.u.dbar(g.nodes[i])));
          ep = std::max(ep, std::abs(dp[i]));
        }
        return std::pair{eu, ep};
      };
      const auto [u1, p1] = err_on(256);
      const auto [u2, p2] = err_on(512);
      CHECK(u2 < 2.5e-3);
      CHECK(u1 / u2 >= 3.5);
      CHECK(p1 / p2 >= 3.5);
    }
  }

  TEST_CASE("residual norm is non-increasing in the degree") {
    const auto q = build_grid(unit_square(), 96, 96, QuadratureRule::end_corrected);
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto u = standard_bump();
    double prev = std::numeric_limits<double>::infinity();
    for (int d : {2, 4, 8, 12, 16, 24}) {
      const auto basis = make_basis(BasisKind::monomials, unit_square(), d);
      const auto p = project(u, basis, orthonormalize(gram_matrix(basis, q, w, 32.0)), q, w, 32.0);
      const double n = weighted_norm(residual(u, p, q.nodes), q, w, 32.0);
      CHECK(n <= prev * (1.0 + 1e-12));
      prev = n;
    }
  }

  TEST_CASE("Bergman kernel: Hermitian, positive diagonal, reproducing") {
    const Setup s;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-0.8, 0.8);
    for (int t = 0; t < 10; ++t) {
      const Complex z{d(rng), d(rng)}, w{d(rng), d(rng)};
      const Complex kzw = bergman_kernel(s.basis, s.factor, z, w);
      CHECK(std::abs(kzw - std::conj(bergman_kernel(s.basis, s.factor, w, z))) <= 1e-10 * std::abs(kzw));
      const Complex kzz = bergman_kernel(s.basis, s.factor, z, z);
      CHECK(kzz.real() >= 0.0);
      CHECK(std::abs(kzz.imag()) <= 1e-12 * kzz.real());
    }
    const Complex wpt{0.3, 0.1};
    const auto b1 = sample([&](Complex z) { return s.basis.eval(1, z); }, s.q.nodes);
    const auto kw = sample([&](Complex z) { return bergman_kernel(s.basis, s.factor, z, wpt); }, s.q.nodes);
    const Complex rep = inner_product(b1, kw, s.q, s.w, s.k);
    const Complex expect = s.basis.eval(1, wpt);
    CHECK(std::abs(rep - expect) <= 1e-6 * std::abs(expect));
  }

  TEST_CASE("degree policy") {
    DegreePolicy p;
    CHECK(p.initial_degree(16.0) == 12);
    CHECK(p.initial_degree(100.0) == 24);
    p.max_degree = 20;
    CHECK(p.initial_degree(100.0) == 20);
    p.initial = DegreePolicy::Initial::fixed;
    p.fixed_degree = 5;
    CHECK(p.initial_degree(1e6) == 5);
  }

  TEST_CASE("adaptive projection stops and respects the cap") {
    const auto q = build_grid(unit_square(), 128, 128, QuadratureRule::end_corrected);
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto u = standard_bump();
    std::vector<Complex> probes;
    for (int i = 0; i <= 30; ++i) probes.push_back(Complex{-0.75 + 0.05 * i, 0.0});
    DegreePolicy policy;
    const auto ap = project_adaptive(u, q, w, 32.0, probes, policy);
    CHECK(ap.degrees_tried.front() == 16);
    CHECK(ap.degree == ap.degrees_tried.back());
    CHECK(ap.sup_errors.size() == ap.degrees_tried.size());
    if (!ap.reached_cap) {
      const auto n = ap.sup_errors.size();
      REQUIRE(n >= 2);
      CHECK(std::abs(ap.sup_errors[n - 1] - ap.sup_errors[n - 2]) <= 0.02 * ap.sup_errors[n - 2]);
    }
    policy.max_degree = 20;
    const auto capped = project_adaptive(u, q, w, 256.0, probes, policy);
    CHECK(capped.degree == 20);
    CHECK(capped.reached_cap);

    const auto poly = project_adaptive(u, q, w, 16.0, probes, DegreePolicy{}, BasisKind::polynomials_deg_k);
    CHECK(poly.degree == 16);
    CHECK(poly.degrees_tried.size() == 1);
    CHECK(poly.projection.basis.kind == BasisKind::polynomials_deg_k);
  }

  TEST_CASE("holomorphic input: adaptive run stops on the round-off floor") {
    const auto q = build_grid(unit_square(), 64, 64, QuadratureRule::end_corrected);
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto u = make_test_function("holomorphic_quadratic", unit_square());
    const std::vector<Complex> probes{Complex{-0.5, 0}, Complex{0.1, 0}, Complex{0.6, 0}};
    const auto ap = project_adaptive(u, q, w, 16.0, probes, DegreePolicy{});
    CHECK(ap.sup_errors.back() <= 1e-8);
    CHECK(ap.degrees_tried.size() == 2);
  }

  TEST_CASE("grid stability of the residual norm at the default operating point") {
    const auto w = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto u = standard_bump();
    const double k = 64.0;
    auto norm_at = [&](int n) {
      const auto q = build_grid(unit_square(), n, n, QuadratureRule::end_corrected);
      const auto basis = make_basis(BasisKind::monomials, unit_square(), 40);
      const auto p = project(u, basis, orthonormalize(gram_matrix(basis, q, w, k)), q, w, k);
      return weighted_norm(residual(u, p, q.nodes), q, w, k);
    };
    const double a = norm_at(256), b = norm_at(512);
    CHECK(std::abs(a - b) / b <= 1e-4);
  }

  TEST_CASE("misaligned samples are rejected") {
    const auto q = build_grid(unit_square(), 8, 8);
    const std::vector<Complex> short_samples(10, 1.0);
    CHECK_THROWS_AS(inner_product(short_samples, short_samples, q, zero_weight(), 0.0), DomainError);
    CHECK_THROWS_AS(dbar_fd(short_samples, q), DomainError);
    CHECK_THROWS_AS(make_basis(BasisKind::monomials, unit_square(), -1), DomainError);
    CHECK_THROWS_AS(make_test_function("nope", unit_square()), DomainError);
  }

  TEST_CASE("bump closed-form dbar against finite differences") {
    const auto u = standard_bump();
    const double h = 1e-6;
    for (const Complex z : {Complex{0.1, 0.2}, Complex{-0.5, 0.3}, Complex{0.65, -0.6}}) {
      const Complex ux = (u.eval(z + Complex{h, 0}) - u.eval(z - Complex{h, 0})) / (2 * h);
      const Complex uy = (u.eval(z + Complex{0, h}) - u.eval(z - Complex{0, h})) / (2 * h);
      const Complex fd = 0.5 * (ux + Complex{0, 1} * uy);
      CHECK(std::abs(fd - u.dbar(z)) <= 1e-7 * std::max(1.0, std::abs(u.dbar(z))));
    }
    CHECK(u.eval(Complex{0, 0}).real() == doctest::Approx(1.0));
    CHECK(u.eval(Complex{0.7, 0}).real() == 0.0);
  }
}
