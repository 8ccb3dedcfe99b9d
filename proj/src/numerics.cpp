#include "gpb/numerics.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace gpb {

QuadratureRule::QuadratureRule(QuadratureKind k, int n) : kind(k), node_count(n) {
  if (n < 2) throw DimensionError("quadrature rule needs at least 2 nodes");
}

QuadratureNodes periodic_trapezoid_nodes(int n, double period) {
  if (n < 2) throw DimensionError("periodic rule needs at least 2 nodes");
  QuadratureNodes q;
  q.nodes.resize(n);
  q.weights.assign(n, period / n);
  for (int k = 0; k < n; ++k) q.nodes[k] = period * k / n;
  return q;
}

QuadratureNodes gauss_legendre_nodes(int n, double a, double b) {
  if (n < 2) throw DimensionError("Gauss-Legendre rule needs at least 2 nodes");
  // Jacobi matrix of the Legendre recurrence.
  MatrixXd jac = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = beta;
    jac(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(jac);
  QuadratureNodes q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int k = 0; k < n; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    q.nodes[k] = mid + half * eig.eigenvalues()(k);
    q.weights[k] = 2.0 * v0 * v0 * half;
  }
  return q;
}

QuadratureNodes sawtooth_nodes(int n) {
  // Spectral weights: (1/2pi) int (t-pi) e^{ikt} dt = -i/k for k != 0, 0 for k = 0.
  QuadratureNodes q = periodic_trapezoid_nodes(n);
  const int kmax = (n - 1) / 2;
  for (int j = 0; j < n; ++j) {
    double w = 0.0;
    for (int k = 1; k <= kmax; ++k) w += std::sin(k * q.nodes[j]) / k;
    q.weights[j] = -2.0 * w / n;
  }
  return q;
}

double integrate_periodic(const std::function<double(double)>& f, const QuadratureRule& rule) {
  if (rule.kind != QuadratureKind::PeriodicTrapezoid)
    throw DimensionError("integrate_periodic requires a periodic-trapezoid rule");
  const QuadratureNodes q = periodic_trapezoid_nodes(rule.node_count);
  double sum = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double v = f(q.nodes[k]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite integrand at t = " << q.nodes[k];
      throw EvaluationError(msg.str(), VectorXd::Constant(1, q.nodes[k]));
    }
    sum += q.weights[k] * v;
  }
  return sum;
}

double integrate_sawtooth(const std::function<double(double)>& f, int n) {
  const QuadratureNodes q = sawtooth_nodes(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double v = f(q.nodes[k]);
    if (!std::isfinite(v))
      throw EvaluationError("non-finite integrand", VectorXd::Constant(1, q.nodes[k]));
    sum += q.weights[k] * v;
  }
  return sum;
}

namespace {

void require_finite(double v, const VectorXd& x) {
  if (!std::isfinite(v)) throw EvaluationError("non-finite sample in finite difference", x);
}

void require_finite(const VectorXd& v, const VectorXd& x) {
  if (!all_finite(v)) throw EvaluationError("non-finite sample in finite difference", x);
}

}  // namespace

VectorXd gradient_fd(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                     const DiffScheme& scheme) {
  VectorXd g(x.size());
  VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = scheme.h(x(i));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    require_finite(fp, x);
    require_finite(fm, x);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

MatrixXd jacobian_fd(const VectorField& f, const VectorXd& x, const DiffScheme& scheme) {
  VectorXd xp = x;
  MatrixXd jac;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = scheme.h(x(i));
    xp(i) = x(i) + h;
    const VectorXd fp = f(xp);
    xp(i) = x(i) - h;
    const VectorXd fm = f(xp);
    xp(i) = x(i);
    require_finite(fp, x);
    require_finite(fm, x);
    if (i == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

MatrixXd hessian_fd(const std::function<VectorXd(const VectorXd&)>& gradient, const VectorXd& x,
                    const DiffScheme& scheme) {
  MatrixXd hess = jacobian_fd(gradient, x, scheme);
  return 0.5 * (hess + hess.transpose());
}

int matrix_rank(const MatrixXd& m, double tol) {
  if (!all_finite(m)) throw EvaluationError("matrix_rank on non-finite input");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * smax) ++rank;
  return rank;
}

VectorXd matrix_exp_action(const MatrixXd& m, double t, const VectorXd& v) {
  if (m.rows() != m.cols() || m.cols() != v.size())
    throw DimensionError("matrix_exp_action: non-conformal operands");
  if (t == 0.0) return v;
  const MatrixXd e = (t * m).exp();
  return e * v;
}

VectorXd rk4_step(const VectorField& rhs, const VectorXd& x, double h) {
  auto stage = [&](const VectorXd& at) {
    VectorXd k = rhs(at);
    if (!all_finite(k)) throw IntegrationError("non-finite RK4 stage", 0.0, x);
    return k;
  };
  const VectorXd k1 = stage(x);
  const VectorXd k2 = stage(x + 0.5 * h * k1);
  const VectorXd k3 = stage(x + 0.5 * h * k2);
  const VectorXd k4 = stage(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool all_finite(const VectorXd& v) { return v.allFinite(); }
bool all_finite(const MatrixXd& m) { return m.allFinite(); }

double antisymmetry_defect(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace gpb
