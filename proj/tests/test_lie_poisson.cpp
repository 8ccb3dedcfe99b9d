#include <cmath>

#include "doctest.h"
#include "gpb/lie_poisson.hpp"

using namespace gpb;

namespace {

VectorXd v3(double a, double b, double c) { return (VectorXd(3) << a, b, c).finished(); }

}  // namespace

TEST_CASE("structure constant checks") {
  const auto so3 = check_structure_constants(LieAlgebraStructure::so3());
  CHECK(so3.pass);
  CHECK(so3.antisymmetry == 0.0);
  CHECK(so3.jacobi == 0.0);
  CHECK(check_structure_constants(LieAlgebraStructure::abelian(4)).pass);
  LieAlgebraStructure bad(3);
  bad(0, 1, 2) = 1.0;
  const auto r = check_structure_constants(bad);
  CHECK_FALSE(r.pass);
  CHECK(r.antisymmetry == 1.0);
  const auto sum = LieAlgebraStructure::direct_sum(LieAlgebraStructure::so3(), LieAlgebraStructure::so3());
  CHECK(sum.dim() == 6);
  CHECK(check_structure_constants(sum).pass);
}

TEST_CASE("lie_poisson_tensor") {
  const auto so3 = LieAlgebraStructure::so3();
  MatrixXd expected(3, 3);
  expected << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  CHECK(lie_poisson_tensor(so3, v3(0, 0, 1)) == expected);
  CHECK(lie_poisson_tensor(so3, VectorXd::Zero(3)).isZero());
  CHECK(lie_poisson_tensor(LieAlgebraStructure::abelian(3), v3(1, 2, 3)).isZero());
  CHECK_THROWS_AS(lie_poisson_tensor(so3, VectorXd::Zero(2)), DimensionError);
}

TEST_CASE("fiber_bracket") {
  const auto fiber = PoissonFiber::lie_poisson(2, LieAlgebraStructure::so3());
  const VectorXd q = (VectorXd(2) << 0.4, -1.0).finished();
  const VectorXd y = v3(0.3, -0.7, 1.9);
  const auto y1 = ScalarFunction::coordinate(5, 2);
  const auto y2 = ScalarFunction::coordinate(5, 3);
  CHECK(fiber_bracket(y1, y2, fiber, q, y) == doctest::Approx(y(2)).epsilon(1e-14));
  CHECK(fiber_bracket(y1, y1, fiber, q, y) == 0.0);
  const auto c = squared_norm_casimir(2, 3);
  CHECK(std::abs(fiber_bracket(c, y2, fiber, q, y)) < 1e-14);

  const auto g = ScalarFunction::from_template(5, [](const auto& z) { return z(0) * z(3) * z(4) + z(2) * z(2); });
  CHECK(fiber_bracket(g, c + y1, fiber, q, y) ==
        doctest::Approx(-fiber_bracket(c + y1, g, fiber, q, y)).epsilon(1e-14));

  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(fiber_bracket(ScalarFunction::coordinate(5, 2 + a), ScalarFunction::coordinate(5, 2 + b), fiber, q, y) ==
            doctest::Approx(fiber.psi(q, y)(a, b)).epsilon(1e-14));
}

TEST_CASE("fiber Jacobi identity on coordinate triples") {
  for (const auto& l : {LieAlgebraStructure::so3(), LieAlgebraStructure::direct_sum(LieAlgebraStructure::so3(),
                                                                                     LieAlgebraStructure::abelian(1))}) {
    const int n = l.dim();
    const VectorXd y = VectorXd::LinSpaced(n, -0.8, 1.3);
    double worst = 0;
    // {{y^a, y^b}, y^c} = lambda^{ab}_mu Psi^{mu c}.
    const MatrixXd psi = l.poisson_tensor(y);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double s = 0;
          for (int mu = 0; mu < n; ++mu)
            s += l(a, b, mu) * psi(mu, c) + l(b, c, mu) * psi(mu, a) + l(c, a, mu) * psi(mu, b);
          worst = std::max(worst, std::abs(s));
        }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("ad_star convention") {
  const auto so3 = LieAlgebraStructure::so3();
  CHECK((ad_star(so3, v3(0, 0, 1), v3(1, 0, 0)) - v3(0, -1, 0)).norm() == 0.0);
  CHECK(ad_star(so3, VectorXd::Zero(3), v3(1, 2, 3)).isZero());
  CHECK(ad_star(so3, v3(2, 4, 6), v3(1, 2, 3)).isZero());
  const VectorXd x = v3(0.3, 1.1, -0.5);
  const VectorXd y = v3(-2.0, 0.4, 0.9);
  CHECK((ad_star(so3, x, y) - cross<double>(y, x)).norm() < 1e-15);
  // Generator of <x, y> is -Psi grad = -Psi x.
  CHECK((ad_star(so3, x, y) + so3.poisson_tensor(y) * x).norm() < 1e-15);
  // [ad*_x, ad*_z] = -ad*_[x,z].
  const VectorXd z = v3(1.0, -0.2, 0.7);
  const MatrixXd kx = so3.ad_star(x), kz = so3.ad_star(z);
  CHECK((kx * kz - kz * kx + so3.ad_star(so3.bracket(x, z))).norm() < 1e-14);
  CHECK_THROWS_AS(ad_star(so3, x, VectorXd::Zero(2)), DimensionError);
}

TEST_CASE("coad_flow") {
  const auto so3 = LieAlgebraStructure::so3();
  for (double t : {0.0, 0.3, 1.7, -2.5, 9.0}) {
    const VectorXd y = coad_flow(so3, v3(0, 0, 1), t, v3(1, 0, 0));
    CHECK((y - v3(std::cos(t), -std::sin(t), 0)).norm() < 1e-12);
  }
  const VectorXd y0 = v3(0.4, -1.2, 0.8);
  const VectorXd x = v3(0.5, 0.2, -1.0);
  CHECK(coad_flow(so3, x, 0.0, y0) == y0);
  for (double t = -10; t <= 10; t += 0.5) {
    const VectorXd y = coad_flow(so3, x, t, y0);
    CHECK(std::abs(y.squaredNorm() - y0.squaredNorm()) < 1e-10);
    CHECK((y - rotate(y0, x / x.norm(), -t * x.norm())).norm() < 1e-11);
  }
}

TEST_CASE("is_casimir") {
  auto fiber = PoissonFiber::lie_poisson(3, LieAlgebraStructure::so3());
  std::vector<FiberPoint> samples;
  for (int k = 0; k < 5; ++k) samples.push_back({VectorXd::Constant(3, k * 0.1), v3(0.2 + k, -0.5, 1.0 - k)});
  const auto c = is_casimir(squared_norm_casimir(3, 3), fiber, samples);
  CHECK(c.pass);
  CHECK(c.residual == 0.0);
  CHECK_FALSE(is_casimir(ScalarFunction::coordinate(6, 3), fiber, samples).pass);
  auto abelian = PoissonFiber::lie_poisson(3, LieAlgebraStructure::abelian(3));
  CHECK(is_casimir(ScalarFunction::coordinate(6, 3), abelian, samples).pass);
  const auto fd_only = ScalarFunction(6, [](const VectorXd& z) { return z.tail(3).squaredNorm(); });
  CHECK(is_casimir(fd_only, fiber, samples).pass);
}
