#include "gpb/lie_poisson.hpp"

#include <algorithm>
#include <cmath>

namespace gpb {

LieAlgebraStructure::LieAlgebraStructure(int n)
    : n_(n), c_(static_cast<std::size_t>(n) * n * n, 0.0) {
  if (n < 0) throw DimensionError("negative Lie algebra dimension");
}

LieAlgebraStructure LieAlgebraStructure::so3() {
  LieAlgebraStructure l(3);
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    l(a, b, c) = 1.0;
    l(b, a, c) = -1.0;
  }
  return l;
}

LieAlgebraStructure LieAlgebraStructure::abelian(int n) { return LieAlgebraStructure(n); }

LieAlgebraStructure LieAlgebraStructure::direct_sum(const LieAlgebraStructure& a,
                                                    const LieAlgebraStructure& b) {
  const int na = a.dim();
  LieAlgebraStructure l(na + b.dim());
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      for (int k = 0; k < na; ++k) l(i, j, k) = a(i, j, k);
  for (int i = 0; i < b.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j)
      for (int k = 0; k < b.dim(); ++k) l(na + i, na + j, na + k) = b(i, j, k);
  return l;
}

MatrixXd LieAlgebraStructure::poisson_tensor(const VectorXd& y) const {
  if (y.size() != n_) throw DimensionError("poisson_tensor: fiber point has wrong dimension");
  MatrixXd psi = MatrixXd::Zero(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c) psi(a, b) += (*this)(a, b, c) * y(c);
  return psi;
}

MatrixXd LieAlgebraStructure::poisson_tensor_derivative(int c) const {
  MatrixXd d(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) d(a, b) = (*this)(a, b, c);
  return d;
}

VectorXd LieAlgebraStructure::bracket(const VectorXd& x, const VectorXd& z) const {
  return ad(x) * z;
}

MatrixXd LieAlgebraStructure::ad(const VectorXd& x) const {
  if (x.size() != n_) throw DimensionError("ad: algebra element has wrong dimension");
  MatrixXd m = MatrixXd::Zero(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c) m(c, b) += (*this)(a, b, c) * x(a);
  return m;
}

MatrixXd LieAlgebraStructure::ad_star(const VectorXd& x) const { return ad(x).transpose(); }

StructureReport check_structure_constants(const LieAlgebraStructure& l, double tol) {
  const int n = l.dim();
  StructureReport r;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        r.antisymmetry = std::max(r.antisymmetry, std::abs(l(a, b, c) + l(b, a, c)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int v = 0; v < n; ++v) {
          double s = 0.0;
          for (int mu = 0; mu < n; ++mu)
            s += l(a, b, mu) * l(mu, c, v) + l(b, c, mu) * l(mu, a, v) + l(c, a, mu) * l(mu, b, v);
          r.jacobi = std::max(r.jacobi, std::abs(s));
        }
  r.pass = r.antisymmetry <= tol && r.jacobi <= tol;
  return r;
}

MatrixXd lie_poisson_tensor(const LieAlgebraStructure& algebra, const VectorXd& y) {
  return algebra.poisson_tensor(y);
}

VectorXd ad_star(const LieAlgebraStructure& algebra, const VectorXd& x, const VectorXd& y) {
  if (y.size() != algebra.dim()) throw DimensionError("ad_star: coalgebra element has wrong dimension");
  return algebra.ad_star(x) * y;
}

VectorXd coad_flow(const LieAlgebraStructure& algebra, const VectorXd& x, double t,
                   const VectorXd& y0) {
  if (y0.size() != algebra.dim()) throw DimensionError("coad_flow: initial point has wrong dimension");
  return matrix_exp_action(algebra.ad_star(x), t, y0);
}

VectorXd rotate(const VectorXd& y, const VectorXd& axis, double angle) {
  if (y.size() != 3 || axis.size() != 3) throw DimensionError("rotate needs 3-vectors");
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const VectorXd k = axis;
  return c * y + s * cross<double>(k, y) + (1.0 - c) * k.dot(y) * k;
}

VectorXd join(const VectorXd& q, const VectorXd& y) {
  VectorXd z(q.size() + y.size());
  z << q, y;
  return z;
}

PoissonFiber PoissonFiber::lie_poisson(int m, const LieAlgebraStructure& algebra) {
  PoissonFiber f;
  f.m = m;
  f.n = algebra.dim();
  f.kind = Kind::LiePoisson;
  f.algebra = algebra;
  f.psi_fn = [algebra](const VectorXd&, const VectorXd& y) { return algebra.poisson_tensor(y); };
  return f;
}

PoissonFiber PoissonFiber::general(int m, int n,
                                   std::function<MatrixXd(const VectorXd&, const VectorXd&)> psi) {
  PoissonFiber f;
  f.m = m;
  f.n = n;
  f.kind = Kind::General;
  f.psi_fn = std::move(psi);
  return f;
}

void PoissonFiber::add_casimir(std::string name, ScalarFunction c) {
  if (c.dim() != m + n) throw DimensionError("Casimir must be a function of (q, y)");
  casimir_names.push_back(std::move(name));
  casimirs.push_back(std::move(c));
}

MatrixXd PoissonFiber::psi(const VectorXd& q, const VectorXd& y) const {
  if (y.size() != n) throw DimensionError("fiber point has wrong dimension");
  return psi_fn(q, y);
}

std::vector<MatrixXd> PoissonFiber::psi_dy(const VectorXd& q, const VectorXd& y) const {
  std::vector<MatrixXd> out(n);
  if (kind == Kind::LiePoisson && algebra) {
    for (int c = 0; c < n; ++c) out[c] = algebra->poisson_tensor_derivative(c);
    return out;
  }
  VectorXd yp = y;
  const DiffScheme scheme;
  for (int c = 0; c < n; ++c) {
    const double h = scheme.h(y(c));
    yp(c) = y(c) + h;
    const MatrixXd fp = psi(q, yp);
    yp(c) = y(c) - h;
    const MatrixXd fm = psi(q, yp);
    yp(c) = y(c);
    out[c] = (fp - fm) / (2.0 * h);
  }
  return out;
}

std::vector<MatrixXd> PoissonFiber::psi_dq(const VectorXd& q, const VectorXd& y) const {
  std::vector<MatrixXd> out(q.size(), MatrixXd::Zero(n, n));
  if (kind == Kind::LiePoisson) return out;
  VectorXd qp = q;
  const DiffScheme scheme;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double h = scheme.h(q(i));
    qp(i) = q(i) + h;
    const MatrixXd fp = psi(qp, y);
    qp(i) = q(i) - h;
    const MatrixXd fm = psi(qp, y);
    qp(i) = q(i);
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

ScalarFunction squared_norm_casimir(int m, int n) {
  return ScalarFunction::from_template(
      m + n, [m, n](const auto& z) { return z.tail(n).squaredNorm(); });
}

double fiber_bracket(const ScalarFunction& f, const ScalarFunction& g, const PoissonFiber& fiber,
                     const VectorXd& q, const VectorXd& y) {
  const VectorXd z = join(q, y);
  const VectorXd df = f.gradient(z).tail(fiber.n);
  const VectorXd dg = g.gradient(z).tail(fiber.n);
  return df.dot(fiber.psi(q, y) * dg);
}

CheckReport is_casimir(const ScalarFunction& c, const PoissonFiber& fiber,
                       const std::vector<FiberPoint>& samples, double tol) {
  double worst = 0.0;
  for (const auto& s : samples) {
    const VectorXd dc = c.gradient(join(s.q, s.y)).tail(fiber.n);
    worst = std::max(worst, (fiber.psi(s.q, s.y) * dc).norm());
  }
  return CheckReport::from_residual("casimir", worst, tol);
}

}  // namespace gpb
