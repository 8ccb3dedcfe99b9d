#include "gpb/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gpb {

GaugeForm GaugeForm::zero(int m, int n) {
  const int d = m + n;
  GaugeForm a;
  a.m = m;
  a.n = n;
  a.components = VectorFunction(
      d, m, [m](const VectorXd&) { return VectorXd(VectorXd::Zero(m)); },
      [m, d](const VectorXd&) { return MatrixXd(MatrixXd::Zero(m, d)); },
      [m, d](const VectorXd&) { return std::vector<MatrixXd>(m, MatrixXd::Zero(d, d)); });
  return a;
}

void GaugeForm::check_domain(const VectorXd& q) const {
  if (q.size() != m) throw DimensionError("gauge form: base point has wrong dimension");
  if (min_q_norm > 0.0 && q.norm() < min_q_norm) {
    std::ostringstream msg;
    msg << "gauge form evaluated at |q| = " << q.norm() << " below the singular radius "
        << min_q_norm;
    throw DomainError(msg.str());
  }
}

VectorXd GaugeForm::operator()(const VectorXd& q, const VectorXd& y) const {
  check_domain(q);
  return components(join(q, y));
}

MatrixXd GaugeForm::jacobian(const VectorXd& q, const VectorXd& y) const {
  check_domain(q);
  return components.jacobian(join(q, y));
}

std::vector<MatrixXd> GaugeForm::hessians(const VectorXd& q, const VectorXd& y) const {
  check_domain(q);
  return components.hessians(join(q, y));
}

CheckReport check_partials(const GaugeForm& a, const std::vector<FiberPoint>& samples, double tol) {
  double worst = 0.0;
  for (const auto& s : samples) {
    a.check_domain(s.q);
    const VectorXd z = join(s.q, s.y);
    const MatrixXd fd = jacobian_fd([&](const VectorXd& at) { return a.components(at); }, z);
    const MatrixXd an = a.components.jacobian(z);
    worst = std::max(worst, (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff()));
  }
  return CheckReport::from_residual("gauge-partials", worst, tol);
}

LinearGaugePotential LinearGaugePotential::zero(int n, int m) {
  return from_function(n, m, [n, m](const VectorXd&) { return MatrixXd(MatrixXd::Zero(n, m)); });
}

LinearGaugePotential LinearGaugePotential::from_function(
    int n, int m, std::function<MatrixXd(const VectorXd&)> value, double min_q_norm) {
  LinearGaugePotential p;
  p.n = n;
  p.m = m;
  p.min_q_norm = min_q_norm;
  p.value = value;
  GaugeForm a;
  a.m = m;
  a.n = n;
  a.min_q_norm = min_q_norm;
  const int d = m + n;
  a.components = VectorFunction(
      d, m,
      [value, m, n](const VectorXd& z) {
        return VectorXd(value(z.head(m)).transpose() * z.tail(n));
      },
      [value, m, n, d](const VectorXd& z) {
        const VectorXd q = z.head(m);
        const VectorXd y = z.tail(n);
        MatrixXd j(m, d);
        j.rightCols(n) = value(q).transpose();
        const MatrixXd dq = jacobian_fd(
            [&](const VectorXd& at) { return VectorXd(value(at).transpose() * y); }, q);
        j.leftCols(m) = dq;
        return j;
      });
  p.contracted = a;
  return p;
}

MatrixXd LinearGaugePotential::operator()(const VectorXd& q) const {
  contracted.check_domain(q);
  return value(q);
}

std::vector<MatrixXd> LinearGaugePotential::derivative(const VectorXd& q) const {
  contracted.check_domain(q);
  if (dq) return dq(q);
  std::vector<MatrixXd> out(m);
  VectorXd qp = q;
  const DiffScheme scheme;
  for (int k = 0; k < m; ++k) {
    const double h = scheme.h(q(k));
    qp(k) = q(k) + h;
    const MatrixXd fp = value(qp);
    qp(k) = q(k) - h;
    const MatrixXd fm = value(qp);
    qp(k) = q(k);
    if (!all_finite(fp) || !all_finite(fm))
      throw EvaluationError("non-finite potential near sample", q);
    out[k] = (fp - fm) / (2.0 * h);
  }
  return out;
}

namespace {

MatrixXd field_from_jacobian(const MatrixXd& jac, const MatrixXd& psi, int m) {
  const MatrixXd a = jac.rightCols(jac.cols() - m);  // row i = dA_i/dy
  MatrixXd f = jac.leftCols(m).transpose() - jac.leftCols(m) + a * psi * a.transpose();
  return 0.5 * (f - f.transpose());
}

}  // namespace

MatrixXd field_strength(const GaugeForm& a, const PoissonFiber& fiber, const VectorXd& q,
                        const VectorXd& y) {
  if (a.n != fiber.n) throw DimensionError("gauge form and fiber disagree on fiber dimension");
  return field_from_jacobian(a.jacobian(q, y), fiber.psi(q, y), a.m);
}

std::vector<MatrixXd> linear_field_strength(const LinearGaugePotential& p,
                                            const LieAlgebraStructure& algebra,
                                            const VectorXd& q) {
  if (algebra.dim() != p.n) throw DimensionError("potential and algebra disagree on dimension");
  const MatrixXd a = p(q);
  const std::vector<MatrixXd> d = p.derivative(q);
  std::vector<MatrixXd> f(p.n, MatrixXd::Zero(p.m, p.m));
  for (int i = 0; i < p.m; ++i)
    for (int j = i + 1; j < p.m; ++j) {
      const VectorXd v = d[i].col(j) - d[j].col(i) + algebra.bracket(a.col(i), a.col(j));
      for (int al = 0; al < p.n; ++al) {
        f[al](i, j) = v(al);
        f[al](j, i) = -v(al);
      }
    }
  return f;
}

VectorXd horizontal_lift(const GaugeForm& a, const PoissonFiber& fiber, int i, const VectorXd& q,
                         const VectorXd& y) {
  if (i < 0 || i >= a.m) throw DimensionError("horizontal_lift: base index out of range");
  const MatrixXd jac = a.jacobian(q, y);
  VectorXd out = VectorXd::Zero(a.m + a.n);
  out(i) = 1.0;
  out.tail(a.n) = fiber.psi(q, y).transpose() * jac.row(i).tail(a.n).transpose();
  return out;
}

VectorXd pack_state(const VectorXd& p, const VectorXd& q, const VectorXd& y) {
  VectorXd x(p.size() + q.size() + y.size());
  x << p, q, y;
  return x;
}

GaugePoissonStructure::GaugePoissonStructure(PoissonFiber f, GaugeForm a)
    : m(a.m), fiber(std::move(f)), gauge(std::move(a)) {
  if (gauge.n != fiber.n) throw DimensionError("gauge form and fiber disagree on fiber dimension");
}

MatrixXd GaugePoissonStructure::field(const VectorXd& q, const VectorXd& y) const {
  if (field_override) {
    gauge.check_domain(q);
    const MatrixXd f = field_override(q, y);
    return 0.5 * (f - f.transpose());
  }
  return field_strength(gauge, fiber, q, y);
}

MatrixXd assemble_bracket_matrix(const GaugePoissonStructure& s, const VectorXd& x) {
  const int m = s.m;
  const int n = s.n();
  if (x.size() != s.dim()) throw DimensionError("phase point has wrong dimension");
  const VectorXd q = s.q_of(x);
  const VectorXd y = s.y_of(x);
  const MatrixXd psi = s.fiber.psi(q, y);
  const MatrixXd jac = s.gauge.jacobian(q, y);
  const MatrixXd a = jac.rightCols(n);  // row i = dA_i/dy

  MatrixXd mat = MatrixXd::Zero(s.dim(), s.dim());
  mat.block(0, 0, m, m) =
      s.field_override ? s.field(q, y) : field_from_jacobian(jac, psi, m);
  mat.block(0, m, m, m) = MatrixXd::Identity(m, m);
  mat.block(m, 0, m, m) = -MatrixXd::Identity(m, m);
  const MatrixXd py = -(psi * a.transpose()).transpose();  // row i = -(Psi a_i)^T
  mat.block(0, 2 * m, m, n) = py;
  mat.block(2 * m, 0, n, m) = -py.transpose();
  mat.block(2 * m, 2 * m, n, n) = 0.5 * (psi - psi.transpose());
  if (!all_finite(mat)) throw EvaluationError("non-finite bracket matrix", x);
  return mat;
}

std::vector<MatrixXd> bracket_matrix_derivative(const GaugePoissonStructure& s, const VectorXd& x) {
  const int m = s.m;
  const int n = s.n();
  const int d = s.dim();
  if (x.size() != d) throw DimensionError("phase point has wrong dimension");
  const VectorXd q = s.q_of(x);
  const VectorXd y = s.y_of(x);
  const MatrixXd psi = s.fiber.psi(q, y);
  const std::vector<MatrixXd> dpsi_q = s.fiber.psi_dq(q, y);
  const std::vector<MatrixXd> dpsi_y = s.fiber.psi_dy(q, y);
  const MatrixXd jac = s.gauge.jacobian(q, y);
  const std::vector<MatrixXd> hess = s.gauge.hessians(q, y);
  const MatrixXd a = jac.rightCols(n);

  // Override fields are differentiated numerically in z = (q, y).
  MatrixXd field_dz;
  if (s.field_override) {
    const VectorXd z = join(q, y);
    field_dz = jacobian_fd(
        [&](const VectorXd& at) {
          const MatrixXd f = s.field(at.head(m), at.tail(n));
          return VectorXd(Eigen::Map<const VectorXd>(f.data(), f.size()));
        },
        z);
  }

  std::vector<MatrixXd> out(d, MatrixXd::Zero(d, d));
  for (int l = 0; l < m + n; ++l) {
    MatrixXd& dm = out[m + l];
    const MatrixXd& dpsi = l < m ? dpsi_q[l] : dpsi_y[l - m];
    MatrixXd da(m, n);  // row i = d(dA_i/dy)/dz^l
    for (int i = 0; i < m; ++i) da.row(i) = hess[i].col(l).tail(n).transpose();

    MatrixXd df(m, m);
    if (s.field_override) {
      df = Eigen::Map<const MatrixXd>(field_dz.col(l).data(), m, m);
    } else {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) df(i, j) = hess[j](i, l) - hess[i](j, l);
      df += da * psi * a.transpose() + a * dpsi * a.transpose() + a * psi * da.transpose();
      df = 0.5 * (df - df.transpose()).eval();
    }
    dm.block(0, 0, m, m) = df;
    const MatrixXd dpy = -(dpsi * a.transpose() + psi * da.transpose()).transpose();
    dm.block(0, 2 * m, m, n) = dpy;
    dm.block(2 * m, 0, n, m) = -dpy.transpose();
    dm.block(2 * m, 2 * m, n, n) = dpsi;
  }
  return out;
}

double poisson_bracket(const GaugePoissonStructure& s, const ScalarFunction& f,
                       const ScalarFunction& g, const VectorXd& x) {
  const MatrixXd mat = assemble_bracket_matrix(s, x);
  return f.gradient(x).dot(mat * g.gradient(x));
}

int rank_at(const GaugePoissonStructure& s, const VectorXd& x, double tol) {
  return matrix_rank(assemble_bracket_matrix(s, x), tol);
}

double jacobiator(const GaugePoissonStructure& s, const ScalarFunction& f, const ScalarFunction& g,
                  const ScalarFunction& h, const VectorXd& x) {
  const MatrixXd mat = assemble_bracket_matrix(s, x);
  const std::vector<MatrixXd> dm = bracket_matrix_derivative(s, x);
  const ScalarFunction* fs[3] = {&f, &g, &h};
  VectorXd grad[3];
  MatrixXd hess[3];
  for (int k = 0; k < 3; ++k) {
    grad[k] = fs[k]->gradient(x);
    hess[k] = fs[k]->hessian(x);
  }
  // d{u, v}/dx^l = (H_u M grad v)_l + grad u . dM_l . grad v + (H_v M^T grad u)_l
  auto grad_bracket = [&](int u, int v) {
    VectorXd out = hess[u] * (mat * grad[v]) + hess[v] * (mat.transpose() * grad[u]);
    for (std::size_t l = 0; l < dm.size(); ++l) out(l) += grad[u].dot(dm[l] * grad[v]);
    return out;
  };
  return grad[0].dot(mat * grad_bracket(1, 2)) + grad[1].dot(mat * grad_bracket(2, 0)) +
         grad[2].dot(mat * grad_bracket(0, 1));
}

double coordinate_jacobiator(const GaugePoissonStructure& s, const VectorXd& x) {
  const MatrixXd mat = assemble_bracket_matrix(s, x);
  const std::vector<MatrixXd> dm = bracket_matrix_derivative(s, x);
  const int d = s.dim();
  // t[a](b, c) = sum_l M_al dM_bc/dx^l
  std::vector<MatrixXd> t(d, MatrixXd::Zero(d, d));
  for (int a = 0; a < d; ++a)
    for (int l = 0; l < d; ++l)
      if (mat(a, l) != 0.0) t[a] += mat(a, l) * dm[l];
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = b + 1; c < d; ++c)
        worst = std::max(worst, std::abs(t[a](b, c) + t[b](c, a) + t[c](a, b)));
  return worst;
}

}  // namespace gpb
