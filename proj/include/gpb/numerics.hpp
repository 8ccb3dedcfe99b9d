#ifndef GPB_NUMERICS_HPP
#define GPB_NUMERICS_HPP

#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gpb/errors.hpp"

namespace gpb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorField = std::function<VectorXd(const VectorXd&)>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class QuadratureKind { PeriodicTrapezoid, GaussLegendre, ProductSpherical };

/// Nodes and weights of a one-dimensional rule.
struct QuadratureNodes {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::PeriodicTrapezoid;
  int node_count = 64;

  QuadratureRule() = default;
  QuadratureRule(QuadratureKind k, int n);

  static QuadratureRule periodic(int n) { return {QuadratureKind::PeriodicTrapezoid, n}; }
  static QuadratureRule gauss_legendre(int n) { return {QuadratureKind::GaussLegendre, n}; }
};

/// Equispaced nodes t_k = k*period/n with equal weights period/n.
QuadratureNodes periodic_trapezoid_nodes(int n, double period = kTwoPi);

/// Gauss-Legendre nodes on [a, b] (Golub-Welsch).
QuadratureNodes gauss_legendre_nodes(int n, double a, double b);

/// Weights w_k on the periodic grid such that
///   sum_k w_k f(t_k) = (1/2pi) * integral_0^2pi (t - pi) f(t) dt
/// exactly for trigonometric polynomials f of degree < n/2.
QuadratureNodes sawtooth_nodes(int n);

/// Sum f(t_k) * 2pi/n over the periodic grid.
double integrate_periodic(const std::function<double(double)>& f,
                          const QuadratureRule& rule = QuadratureRule::periodic(64));

/// (1/2pi) * integral_0^2pi (t - pi) f(t) dt for 2pi-periodic f.
double integrate_sawtooth(const std::function<double(double)>& f, int n = 64);

struct DiffScheme {
  double step = 1e-5;
  /// Absolute step used at coordinate value x.
  double h(double x) const { return step * std::max(1.0, std::abs(x)); }
};

VectorXd gradient_fd(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                     const DiffScheme& scheme = {});

/// Central-difference Jacobian, rows = outputs, columns = inputs.
MatrixXd jacobian_fd(const VectorField& f, const VectorXd& x, const DiffScheme& scheme = {});

/// Hessian of a scalar function from central differences of its gradient.
MatrixXd hessian_fd(const std::function<VectorXd(const VectorXd&)>& gradient, const VectorXd& x,
                    const DiffScheme& scheme = {});

/// Number of singular values above tol * sigma_max.
int matrix_rank(const MatrixXd& m, double tol = 1e-10);

/// exp(t M) v (Pade scaling and squaring).
VectorXd matrix_exp_action(const MatrixXd& m, double t, const VectorXd& v);

/// One classical Runge-Kutta step of the autonomous system x' = rhs(x).
VectorXd rk4_step(const VectorField& rhs, const VectorXd& x, double h);

bool all_finite(const VectorXd& v);
bool all_finite(const MatrixXd& m);

/// Largest |M + M^T| entry.
double antisymmetry_defect(const MatrixXd& m);

/// Cross product of two 3-vectors of any scalar type.
template <typename Scalar>
VectorX<Scalar> cross(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  VectorX<Scalar> c(3);
  c(0) = a(1) * b(2) - a(2) * b(1);
  c(1) = a(2) * b(0) - a(0) * b(2);
  c(2) = a(0) * b(1) - a(1) * b(0);
  return c;
}

}  // namespace gpb

#endif  // GPB_NUMERICS_HPP
