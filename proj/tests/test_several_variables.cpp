#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "wbergman/errors.hpp"
#include "wbergman/several_variables.hpp"

using namespace wbergman;

TEST_SUITE("several_variables") {
  TEST_CASE("product grid weights multiply") {
    const auto q1 = build_grid(unit_square(), 8, 8);
    const auto q2 = build_grid(Rect{Complex{1, 0}, 0.5, 2.0}, 6, 10);
    const auto q = build_product_grid(q1, q2);
    REQUIRE(q.size() == q1.size() * q2.size());
    double sum = 0.0;
    for (double w : q.weights) sum += w;
    CHECK(sum == doctest::Approx(4.0 * 4.0).epsilon(1e-12));
    CHECK(q.nodes[q2.size() + 3][0] == q1.nodes[1]);
    CHECK(q.nodes[q2.size() + 3][1] == q2.nodes[3]);
  }

  TEST_CASE("coupled weight: Hessian eigenvalues and FD cross-check") {
    const double gamma = 0.7;
    const auto w = make_coupled_line_weight(gamma);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(w.complex_hessian(Point2{}));
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.5));
    CHECK(es.eigenvalues()(1) == doctest::Approx(0.5 + gamma));
    const auto g = build_grid(unit_square(), 6, 6);
    const auto q = build_product_grid(g, g);
    const auto rep = verify_plurisubharmonic(w, q, 0.5 - 1e-12);
    CHECK(rep.ok);
    CHECK(rep.min_eig == doctest::Approx(0.5));
    CHECK(rep.fd_max_abs_error <= 1e-8);
    CHECK_FALSE(verify_plurisubharmonic(w, q, 0.6).ok);
    CHECK(w.eval(Point2{Complex{3, 0}, Complex{-1, 0}}) == 0.0);
    CHECK_THROWS_AS(make_coupled_line_weight(-1.0), DomainError);
  }

  TEST_CASE("sum weight") {
    const auto a = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto b = make_model_weight(WeightModel::scaled_line, {{"c", 3.0}}, unit_square());
    const auto w = make_sum_weight(a, b);
    CHECK(w.delta == 0.5);
    const Point2 z{Complex{0.1, 0.2}, Complex{-0.3, 0.5}};
    CHECK(w.eval(z) == doctest::Approx(0.04 + 0.75));
    const auto h = w.complex_hessian(z);
    CHECK(h(0, 0).real() == 0.5);
    CHECK(h(1, 1).real() == 1.5);
    CHECK(std::abs(h(0, 1)) == 0.0);
  }

  TEST_CASE("tensor basis layout and degree limits") {
    const auto b = make_tensor_basis(unit_square(), unit_square(), 3);
    CHECK(b.size() == 16);
    const Point2 z{Complex{0.5, 0.1}, Complex{-0.2, 0.3}};
    const auto r = b.row(z);
    CHECK(std::abs(r(2 * 4 + 1) - z[0] * z[0] * z[1]) <= 1e-15);
    CHECK_THROWS_AS(make_tensor_basis(unit_square(), unit_square(), 13), DomainError);
    CHECK_THROWS_AS(make_tensor_basis(unit_square(), unit_square(), -1), DomainError);
  }

  TEST_CASE("product oracle: P(u1 u2) = P1 u1 * P2 u2 for a sum weight") {
    const double k = 4.0;
    const int degree = 6;
    const auto g = build_grid(unit_square(), 16, 16, QuadratureRule::end_corrected);
    const auto w1 = make_model_weight(WeightModel::flat_line, {}, unit_square());
    const auto u1 = standard_bump();
    const auto u2 = make_test_function("conj_z", unit_square());

    const auto b1 = make_basis(BasisKind::monomials, unit_square(), degree);
    const auto f1 = orthonormalize(gram_matrix(b1, g, w1, k));
    REQUIRE(f1.discarded == 0);
    const auto p1 = project(u1, b1, f1, g, w1, k);
    const auto p2 = project(u2, b1, f1, g, w1, k);

    const auto q = build_product_grid(g, g);
    const auto w = make_sum_weight(w1, w1);
    const auto mu = weighted_measure(q, w, k);
    const auto basis = make_tensor_basis(unit_square(), unit_square(), degree);
    const auto factor = orthonormalize(gram_matrix(basis, q, mu));
    REQUIRE(factor.discarded == 0);
    const auto u = product_test_function(u1, u2);
    const auto p = project(u, basis, factor, q, mu, k);
    double worst = 0.0, scale = 0.0;
    for (const Complex a : {Complex{0, 0}, Complex{0.3, -0.2}, Complex{-0.6, 0.1}}) {
      for (const Complex b : {Complex{0.1, 0.1}, Complex{-0.4, 0.5}}) {
        const Complex expect = p1(a) * p2(b);
        worst = std::max(worst, std::abs(p(Point2{a, b}) - expect));
        scale = std::max(scale, std::abs(expect));
      }
    }
    CHECK(worst <= 1e-8 * scale);
  }

  TEST_CASE("coupled weight: orthogonality and Pythagoras of the 2-variable projection") {
    const double k = 4.0;
    const auto g = build_grid(unit_square(), 16, 16, QuadratureRule::end_corrected);
    const auto q = build_product_grid(g, g);
    const auto w = make_coupled_line_weight(0.5);
    const auto mu = weighted_measure(q, w, k);
    const auto basis = make_tensor_basis(unit_square(), unit_square(), 5);
    const auto factor = orthonormalize(gram_matrix(basis, q, mu));
    const auto u = product_test_function(standard_bump(), standard_bump());
    const auto p = project(u, basis, factor, q, mu, k);
    const auto v = residual(u, p, q.nodes);
    std::vector<Complex> us(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) us[i] = u.eval(q.nodes[i]);
    const auto pu = p.at(q.nodes);
    const double nu = weighted_norm_squared(us, mu);
    CHECK(std::abs(weighted_norm_squared(v, mu) + weighted_norm_squared(pu, mu) - nu) <= 1e-8 * nu);
    const Eigen::MatrixXcd e = basis.sample(q.nodes) * factor.transform;
    for (int c = 0; c < e.cols(); ++c) {
      Complex s{0.0, 0.0};
      for (std::size_t i = 0; i < q.size(); ++i) s += v[i] * std::conj(e(static_cast<Eigen::Index>(i), c)) * mu(static_cast<Eigen::Index>(i));
      CHECK(std::abs(s) <= 1e-8 * std::sqrt(nu));
    }
    std::vector<Point2> on_e;
    for (double x : {-0.5, 0.0, 0.4}) on_e.push_back(Point2{Complex{x, 0}, Complex{-x / 2, 0}});
    CHECK(sup_error_on_E(u, p, on_e) > 0.0);
    CHECK_THROWS_AS(sup_error_on_E(u, p, std::vector<Point2>{}), EmptySetError);
  }

  TEST_CASE("n = 2 local estimate on a constant: lhs / rhs_l2 = 2 / pi^2") {
    const double k = 4.0;
    const auto g = build_grid(unit_square(), 40, 40);
    const auto q = build_product_grid(g, g);
    const Complex c{0.6, 0.8};
    const std::vector<Complex> v(q.size(), c);
    const std::vector<std::array<Complex, 2>> f(q.size(), std::array<Complex, 2>{Complex{1, 0}, Complex{0, 2}});
    const auto r = local_estimate_check(c, v, f, k, Point2{}, q);
    CHECK(r.lhs == doctest::Approx(1.0));
    // ball of radius k^{-1/2} in C^2 has volume pi^2 / (2 k^2)
    CHECK(r.lhs / r.rhs_l2 == doctest::Approx(2.0 / (std::numbers::pi * std::numbers::pi)).epsilon(0.03));
    CHECK(r.rhs_f == doctest::Approx(5.0 / k));
    CHECK_THROWS_AS(local_estimate_check(c, v, f, 1.0, Point2{Complex{0.5, 0}, Complex{}}, q), DomainError);
  }
}
