#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gpb/builtins.hpp"
#include "gpb/dynamics.hpp"
#include "test_util.hpp"

using namespace gpb;
using testutil::v3;

namespace {

const LieAlgebraStructure kSo3 = LieAlgebraStructure::so3();

VectorXd pinned_state() { return pack_state(v3(0.3, 0.1, -0.2), v3(1, 0.5, 0.8), v3(0.2, -0.4, 0.5)); }

struct QuadraticMetric {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    MatrixX<S> g = MatrixX<S>::Identity(3, 3);
    g(0, 0) = 1.0 + 0.2 * q(1) * q(1);
    g(1, 1) = 2.0 + 0.1 * q(2) * q(2);
    g(0, 2) = g(2, 0) = 0.1 * q(0);
    return g;
  }
};

}  // namespace

TEST_CASE("kinetic_hamiltonian") {
  const auto h = kinetic_hamiltonian(Metric::identity(3), 3);
  CHECK(h(pack_state(v3(1, 2, 3), v3(0.1, 0.2, 0.3), v3(1, 1, 1))) == 7.0);
  CHECK(h(pack_state(VectorXd::Zero(3), v3(0.1, 0.2, 0.3), v3(1, 1, 1))) == 0.0);
  const Metric diag = Metric::from_template(3, [](const auto& q) {
    using S = typename std::decay_t<decltype(q)>::Scalar;
    MatrixX<S> g = MatrixX<S>::Zero(3, 3);
    g(0, 0) = S(1.0);
    g(1, 1) = S(4.0);
    g(2, 2) = S(9.0);
    return g;
  });
  const auto hd = kinetic_hamiltonian(diag, 3);
  CHECK(hd(pack_state(v3(1, 1, 1), v3(0.4, 0.5, 0.6), VectorXd::Zero(3))) ==
        doctest::Approx(49.0 / 72.0).epsilon(1e-15));
}

TEST_CASE("singular metric is reported") {
  CHECK_THROWS_AS(Metric::constant_matrix(MatrixXd::Zero(2, 2)), DomainError);
  const Metric g = Metric::from_template(1, [](const auto& q) {
    using S = typename std::decay_t<decltype(q)>::Scalar;
    MatrixX<S> m(1, 1);
    m(0, 0) = q(0);
    return m;
  });
  CHECK_THROWS_AS(g.inverse(VectorXd::Zero(1)), DomainError);
}

TEST_CASE("kinetic gradient matches differences for a curved metric") {
  const Metric g = Metric::from_template(3, QuadraticMetric{});
  const auto h = kinetic_hamiltonian(g, 3);
  const VectorXd x = pinned_state();
  const VectorXd fd = gradient_fd([&](const VectorXd& z) { return h(z); }, x);
  CHECK((h.gradient(x) - fd).cwiseAbs().maxCoeff() < 1e-9);
  const MatrixXd gg = g(x.segment(3, 3));
  CHECK((gg * g.inverse(x.segment(3, 3)) - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hamiltonian_rhs examples") {
  const GaugePoissonStructure flat(PoissonFiber::lie_poisson(3, LieAlgebraStructure::abelian(3)), GaugeForm::zero(3, 3));
  const VectorXd x = pinned_state();
  const VectorXd free = hamiltonian_rhs(flat, kinetic_hamiltonian(Metric::identity(3), 3))(x);
  CHECK(free.head(3).isZero());
  CHECK(free.segment(3, 3) == x.head(3));
  CHECK(free.tail(3).isZero());
  CHECK(hamiltonian_rhs(builtins::wu_yang_structure(), ScalarFunction::constant(9, 2.0))(x).isZero());
}

TEST_CASE("blockwise and matrix paths agree") {
  testutil::Sampler rng(17);
  const auto h_generic = ScalarFunction::from_template(9, [](const auto& z) {
    using std::sin;
    return 0.5 * (z(0) * z(0) + z(1) * z(1) + z(2) * z(2)) + sin(z(3)) * z(6) + z(7) * z(8) * z(4);
  });
  const GaugePoissonStructure generic(PoissonFiber::lie_poisson(3, kSo3),
                                      builtins::generic_so3_potential().contracted);
  for (const auto& s : {builtins::wu_yang_structure(), generic}) {
    for (const auto& h : {h_generic, kinetic_hamiltonian(Metric::identity(3), 3)}) {
      const auto blocks = hamiltonian_rhs(s, h);
      const auto matrix = hamiltonian_rhs_matrix(s, h);
      for (int k = 0; k < 100; ++k) {
        const VectorXd x = pack_state(rng.box(3), rng.shell(0.5, 3.0), rng.box(3, -2, 2));
        CHECK((blocks(x) - matrix(x)).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
}

TEST_CASE("wong_rhs reproduces the Hamiltonian field") {
  testutil::Sampler rng(19);
  const Metric curved = Metric::from_template(3, QuadraticMetric{});
  for (const auto& p : {builtins::wu_yang_potential(), builtins::generic_so3_potential()}) {
    const GaugePoissonStructure s(PoissonFiber::lie_poisson(3, kSo3), p.contracted);
    for (const auto& g : {Metric::identity(3), curved}) {
      const auto wong = wong_rhs(p, kSo3, g);
      const auto ham = hamiltonian_rhs(s, kinetic_hamiltonian(g, 3));
      for (int k = 0; k < 100; ++k) {
        const VectorXd x = pack_state(rng.box(3), rng.shell(0.5, 3.0), rng.box(3, -2, 2));
        CHECK((wong(x) - ham(x)).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
  // A = 0: straight lines; y = 0: fiber decouples.
  const auto zero = wong_rhs(LinearGaugePotential::zero(3, 3), kSo3, Metric::identity(3));
  const VectorXd x = pinned_state();
  CHECK(zero(x).head(3).isZero());
  CHECK(zero(x).tail(3).isZero());
  const VectorXd x0 = pack_state(v3(0.3, 0.1, -0.2), v3(1, 0.5, 0.8), VectorXd::Zero(3));
  const VectorXd w0 = wong_rhs(builtins::wu_yang_potential(), kSo3, Metric::identity(3))(x0);
  CHECK(w0.head(3).isZero());
  CHECK(w0.tail(3).isZero());
}

TEST_CASE("integrate examples") {
  const VectorXd x0 = pack_state(v3(1, 0, 0), v3(0, 0, 1), VectorXd::Zero(3));
  const auto still = integrate([](const VectorXd& x) { return VectorXd(VectorXd::Zero(x.size())); }, x0, 1.0, 0.1);
  for (const auto& s : still.states) CHECK(s == x0);
  CHECK(still.states.size() == 11);

  const GaugePoissonStructure flat(PoissonFiber::lie_poisson(3, LieAlgebraStructure::abelian(3)), GaugeForm::zero(3, 3));
  const auto free = integrate(hamiltonian_rhs(flat, kinetic_hamiltonian(Metric::identity(3), 3)), x0, 1.0, 1e-3);
  CHECK((free.states.back().segment(3, 3) - v3(1, 0, 1)).norm() < 1e-12);
  CHECK(free.times.back() == 1.0);
  for (std::size_t k = 1; k < free.times.size(); ++k) CHECK(free.times[k] > free.times[k - 1]);

  const VectorField rot = [](const VectorXd& s) { return (VectorXd(2) << -s(1), s(0)).finished(); };
  const VectorXd c0 = (VectorXd(2) << 1, 0).finished();
  const auto circle = integrate(rot, c0, 2 * std::numbers::pi, 2 * std::numbers::pi / 1000);
  CHECK(circle.states.size() == 1001);
  CHECK((circle.states.back() - c0).norm() < 1e-9);
}

TEST_CASE("integrate stops at the singular radius") {
  const auto rhs = hamiltonian_rhs(builtins::wu_yang_structure(), kinetic_hamiltonian(Metric::identity(3), 3));
  const VectorXd at_origin = pack_state(v3(1, 0, 0), VectorXd::Zero(3), v3(1, 0, 0));
  CHECK_THROWS_AS(integrate(rhs, at_origin, 1.0, 1e-3, min_radius_domain(3)), IntegrationError);
  // Head-on approach: q reaches the origin at t = 0.5.
  const VectorXd toward = pack_state(v3(-1, 0, 0), v3(0.5, 0, 0), v3(0, 0, 0));
  try {
    integrate(rhs, toward, 1.0, 1e-3, min_radius_domain(3));
    FAIL("expected a domain exit");
  } catch (const IntegrationError& e) {
    CHECK(e.time() > 0.49);
    CHECK(e.time() < 0.5);
    CHECK(e.last_state().segment(3, 3).norm() >= 1e-6);
  }
}

TEST_CASE("pinned Wu-Yang trajectory conserves its first integrals") {
  const auto s = builtins::wu_yang_structure();
  const auto h = kinetic_hamiltonian(Metric::identity(3), 3);
  const auto traj = integrate(wong_rhs(builtins::wu_yang_potential(), kSo3, Metric::identity(3)), pinned_state(),
                              10.0, 1e-3, min_radius_domain(3));
  CHECK(traj.states.size() == 10001);
  const auto j = ScalarFunction::from_template(9, [](const auto& x) {
    using std::sqrt;
    const auto q = x.segment(3, 3);
    return q.dot(x.tail(3)) / sqrt(q.squaredNorm());
  });
  const auto report = monitor(traj, {{"H", h},
                                     {"casimir", squared_norm_casimir(6, 3).pullback_tail(9)},
                                     {"J", j},
                                     {"y1", ScalarFunction::coordinate(9, 6)}});
  CHECK(report.at("H").max_rel_drift <= 1e-8);
  CHECK(report.at("casimir").max_rel_drift <= 1e-8);
  CHECK(report.at("J").max_rel_drift <= 1e-8);
  CHECK(report.at("y1").max_abs_drift > 1e-3);
  CHECK(report.at("H").initial == doctest::Approx(0.07).epsilon(1e-14));

  const auto still = monitor(Trajectory{{0.0, 1.0}, {pinned_state(), pinned_state()}}, {{"H", h}});
  CHECK(still.at("H").max_abs_drift == 0.0);
}

TEST_CASE("energy drift converges at fourth order") {
  const GaugePoissonStructure s(PoissonFiber::lie_poisson(3, kSo3), builtins::generic_so3_potential().contracted);
  const auto h = kinetic_hamiltonian(Metric::from_template(3, QuadraticMetric{}), 3);
  const VectorXd x0 = pack_state(v3(1.0, -0.8, 0.6), v3(0.2, 0.4, -0.3), v3(1.0, 0.5, -0.7));
  auto drift = [&](double step) {
    return monitor(integrate(hamiltonian_rhs(s, h), x0, 2.0, step), {{"H", h}}).at("H").max_abs_drift;
  };
  const double order = std::log2(drift(0.04) / drift(0.02));
  CHECK(order >= 3.5);
}
