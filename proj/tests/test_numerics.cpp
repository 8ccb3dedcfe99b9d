#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gpb/lie_poisson.hpp"
#include "gpb/numerics.hpp"

using namespace gpb;
using std::numbers::pi;

TEST_CASE("integrate_periodic basic values") {
  CHECK(std::abs(integrate_periodic([](double t) { return std::cos(t); }, QuadratureRule::periodic(64))) <
        1e-14);
  CHECK(integrate_periodic([](double) { return 1.0; }, QuadratureRule::periodic(8)) ==
        doctest::Approx(2 * pi).epsilon(1e-15));
}

TEST_CASE("trapezoid on the sawtooth integrand has the closed-form second-order error") {
  // Sum_k (t_k - pi)(-sin t_k) 2pi/n = (2 pi^2/n) cot(pi/n) = 2pi - 2pi^3/(3 n^2) + O(n^-4),
  // since the sawtooth is not smooth across the period boundary.
  for (int n : {16, 128, 1000}) {
    const double v = integrate_periodic([](double t) { return (t - pi) * -std::sin(t); },
                                        QuadratureRule::periodic(n));
    const double expected = 2 * pi * pi / n / std::tan(pi / n);
    CHECK(std::abs(v - expected) < 1e-12);
    CHECK(std::abs(v - (2 * pi - 2 * std::pow(pi, 3) / (3.0 * n * n))) < 20.0 / std::pow(n, 4));
  }
  // The spectral sawtooth rule recovers (1/2pi) * 2pi = 1 to rounding.
  CHECK(std::abs(integrate_sawtooth([](double t) { return -std::sin(t); }, 128) - 1.0) < 1e-13);
  CHECK(std::abs(integrate_sawtooth([](double t) { return std::cos(3 * t); }, 64)) < 1e-13);
  CHECK(std::abs(integrate_sawtooth([](double) { return 1.0; }, 64)) < 1e-13);
}

TEST_CASE("periodic trapezoid kills low harmonics") {
  const int n = 32;
  for (int k = 1; k < n / 2; ++k) {
    CHECK(std::abs(integrate_periodic([k](double t) { return std::sin(k * t); }, QuadratureRule::periodic(n))) <
          1e-13);
    CHECK(std::abs(integrate_periodic([k](double t) { return std::cos(k * t); }, QuadratureRule::periodic(n))) <
          1e-13);
  }
}

TEST_CASE("integrate_periodic reports the failing node") {
  CHECK_THROWS_AS(integrate_periodic([](double t) { return t == 0.0 ? NAN : 1.0; }), EvaluationError);
  CHECK_THROWS_AS(QuadratureRule::periodic(1), DimensionError);
}

TEST_CASE("quadrature weights sum to the interval length") {
  const auto p = periodic_trapezoid_nodes(17);
  double s = 0;
  for (double w : p.weights) s += w;
  CHECK(s == doctest::Approx(2 * pi).epsilon(1e-14));
  const auto g = gauss_legendre_nodes(12, -1.0, 3.0);
  s = 0;
  double m5 = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    s += g.weights[k];
    m5 += g.weights[k] * std::pow(g.nodes[k], 5);
  }
  CHECK(s == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(m5 == doctest::Approx((std::pow(3.0, 6) - 1.0) / 6.0).epsilon(1e-12));
}

TEST_CASE("jacobian_fd examples") {
  const VectorXd x = (VectorXd(3) << 0.3, -1.2, 2.0).finished();
  CHECK((jacobian_fd([](const VectorXd& v) { return v; }, x) - MatrixXd::Identity(3, 3)).norm() < 1e-10);
  CHECK(jacobian_fd([](const VectorXd&) { return VectorXd::Ones(2).eval(); }, x).norm() == 0.0);
  const VectorXd e3 = VectorXd::Unit(3, 2);
  const MatrixXd j = jacobian_fd([](const VectorXd& q) { return VectorXd(q / q.norm()); }, e3);
  MatrixXd expected = MatrixXd::Zero(3, 3);
  expected(0, 0) = 1;
  expected(1, 1) = 1;
  CHECK((j - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("jacobian_fd is exact on quadratics") {
  auto f = [](const VectorXd& v) {
    VectorXd o(2);
    o << v(0) * v(1) + 3 * v(0) * v(0), v(1) * v(1) - v(0);
    return o;
  };
  const VectorXd x = (VectorXd(2) << 1.7, -0.4).finished();
  MatrixXd expected(2, 2);
  expected << x(1) + 6 * x(0), x(0), -1, 2 * x(1);
  CHECK((jacobian_fd(f, x) - expected).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(jacobian_fd([](const VectorXd&) { return VectorXd::Constant(1, INFINITY).eval(); }, x),
                  EvaluationError);
}

TEST_CASE("matrix_rank") {
  CHECK(matrix_rank(MatrixXd::Zero(3, 3)) == 0);
  CHECK(matrix_rank(MatrixXd::Identity(4, 4)) == 4);
  const auto so3 = LieAlgebraStructure::so3();
  const MatrixXd k = so3.ad_star(VectorXd::Unit(3, 2));
  CHECK(matrix_rank(k) == 2);
  // Invariance under permutation and orthogonal conjugation.
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  CHECK(matrix_rank(perm * k * perm.transpose()) == 2);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(MatrixXd::Random(3, 3)).householderQ();
  CHECK(matrix_rank(q * k * q.transpose()) == 2);
}

TEST_CASE("matrix_exp_action") {
  const VectorXd v = (VectorXd(3) << 1, 2, 3).finished();
  CHECK(matrix_exp_action(MatrixXd::Zero(3, 3), 1.0, v) == v);
  const auto so3 = LieAlgebraStructure::so3();
  const MatrixXd gen = so3.ad_star(VectorXd::Unit(3, 2));
  CHECK(matrix_exp_action(gen, 0.0, v) == v);
  const VectorXd r = matrix_exp_action(gen, pi / 2, VectorXd::Unit(3, 0));
  CHECK((r - (VectorXd(3) << 0, -1, 0).finished()).norm() < 1e-12);
  CHECK_THROWS_AS(matrix_exp_action(MatrixXd::Zero(2, 2), 1.0, v), DimensionError);
}

TEST_CASE("rk4_step") {
  const VectorXd x = (VectorXd(2) << 1, 0).finished();
  CHECK(rk4_step([](const VectorXd& s) { return VectorXd::Zero(s.size()).eval(); }, x, 0.1) == x);
  const VectorField grow = [](const VectorXd& s) { return s; };
  // One step reproduces the degree-4 Taylor polynomial; the remainder is h^5/120 + O(h^6).
  const double h = 0.1;
  const double one = rk4_step(grow, VectorXd::Ones(1), h)(0);
  CHECK(std::abs(one - (1 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24)) < 1e-15);
  CHECK(std::abs(std::exp(h) - one - std::pow(h, 5) / 120) < 2e-9);

  const VectorField rot = [](const VectorXd& s) { return (VectorXd(2) << -s(1), s(0)).finished(); };
  const int steps = 1000;
  VectorXd y = x;
  for (int i = 0; i < steps; ++i) y = rk4_step(rot, y, 2 * pi / steps);
  CHECK((y - x).norm() < 1e-9);

  CHECK_THROWS_AS(rk4_step([](const VectorXd& s) { return VectorXd(s / 0.0); }, VectorXd::Zero(1), 0.1),
                  IntegrationError);
}

TEST_CASE("rk4 observed order is about four") {
  const VectorField grow = [](const VectorXd& s) { return s; };
  auto err = [&](int n) {
    VectorXd y = VectorXd::Ones(1);
    for (int i = 0; i < n; ++i) y = rk4_step(grow, y, 1.0 / n);
    return std::abs(y(0) - std::exp(1.0));
  };
  const double order = std::log2(err(20) / err(40));
  CHECK(order > 3.8);
  CHECK(order < 4.2);
}
