#include "gpb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gpb {

namespace {

MatrixXd checked_inverse(const MatrixXd& g, const VectorXd& q) {
  Eigen::FullPivLU<MatrixXd> lu(g);
  if (!g.allFinite() || !lu.isInvertible()) {
    std::ostringstream msg;
    msg << "singular metric at q = (" << q.transpose() << ")";
    throw DomainError(msg.str());
  }
  return lu.inverse();
}

}  // namespace

Metric::Metric(int m, MatrixFn g, DerivativeFn dg, bool constant)
    : m_(m), g_(std::move(g)), dg_(std::move(dg)) {
  if (constant) {
    const VectorXd origin = VectorXd::Zero(m);
    inverse_ = std::make_shared<const MatrixXd>(checked_inverse((*this)(origin), origin));
    if (!dg_) dg_ = [m](const VectorXd&) { return std::vector<MatrixXd>(m, MatrixXd::Zero(m, m)); };
  }
}

Metric Metric::identity(int m) { return constant_matrix(MatrixXd::Identity(m, m)); }

Metric Metric::constant_matrix(const MatrixXd& g) {
  if (g.rows() != g.cols()) throw DimensionError("metric must be square");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 0.0) throw DomainError("metric must be symmetric");
  return Metric(static_cast<int>(g.rows()), [g](const VectorXd&) { return g; }, {}, true);
}

MatrixXd Metric::operator()(const VectorXd& q) const {
  if (q.size() != m_) throw DimensionError("metric evaluated at point of wrong dimension");
  MatrixXd g = g_(q);
  if (g.rows() != m_ || g.cols() != m_) throw DimensionError("metric field has wrong shape");
  return 0.5 * (g + g.transpose());
}

MatrixXd Metric::inverse(const VectorXd& q) const {
  if (inverse_) return *inverse_;
  return checked_inverse((*this)(q), q);
}

std::vector<MatrixXd> Metric::derivative(const VectorXd& q) const {
  if (dg_) return dg_(q);
  std::vector<MatrixXd> out(m_);
  VectorXd qp = q;
  const DiffScheme scheme;
  for (int k = 0; k < m_; ++k) {
    const double h = scheme.h(q(k));
    qp(k) = q(k) + h;
    const MatrixXd fp = (*this)(qp);
    qp(k) = q(k) - h;
    const MatrixXd fm = (*this)(qp);
    qp(k) = q(k);
    out[k] = (fp - fm) / (2.0 * h);
  }
  return out;
}

std::vector<MatrixXd> Metric::inverse_derivative(const VectorXd& q) const {
  std::vector<MatrixXd> d = derivative(q);
  if (is_constant()) return d;  // all zero
  const MatrixXd gi = inverse(q);
  for (auto& dk : d) dk = -gi * dk * gi;
  return d;
}

ScalarFunction kinetic_hamiltonian(const Metric& g, int n) {
  const int m = g.dim();
  const int d = 2 * m + n;
  auto value = [g, m](const VectorXd& x) {
    const VectorXd p = x.head(m);
    return 0.5 * p.dot(g.inverse(x.segment(m, m)) * p);
  };
  auto gradient = [g, m, d](const VectorXd& x) {
    const VectorXd p = x.head(m);
    const VectorXd q = x.segment(m, m);
    VectorXd out = VectorXd::Zero(d);
    out.head(m) = g.inverse(q) * p;
    if (!g.is_constant()) {
      const auto dgi = g.inverse_derivative(q);
      for (int k = 0; k < m; ++k) out(m + k) = 0.5 * p.dot(dgi[k] * p);
    }
    return out;
  };
  if (g.is_constant()) {
    const MatrixXd gi = g.inverse(VectorXd::Zero(m));
    auto hessian = [gi, m, d](const VectorXd&) {
      MatrixXd h = MatrixXd::Zero(d, d);
      h.topLeftCorner(m, m) = gi;
      return h;
    };
    return ScalarFunction(d, value, gradient, hessian);
  }
  return ScalarFunction(d, value, gradient);
}

VectorField hamiltonian_rhs(const GaugePoissonStructure& s, const ScalarFunction& h) {
  return [s, h](const VectorXd& x) {
    const int m = s.m;
    const int n = s.n();
    const VectorXd q = s.q_of(x);
    const VectorXd y = s.y_of(x);
    const VectorXd grad = h.gradient(x);
    const VectorXd hp = grad.head(m);
    const VectorXd hq = grad.segment(m, m);
    const VectorXd hy = grad.tail(n);
    const MatrixXd psi = s.fiber.psi(q, y);
    const MatrixXd a = s.gauge.jacobian(q, y).rightCols(n);  // row i = dA_i/dy
    const MatrixXd f = s.field(q, y);
    VectorXd out(s.dim());
    out.head(m) = -hq - a * (psi * hy) + f.transpose() * hp;
    out.segment(m, m) = hp;
    out.tail(n) = psi.transpose() * (hy + a.transpose() * hp);
    return out;
  };
}

VectorField hamiltonian_rhs_matrix(const GaugePoissonStructure& s, const ScalarFunction& h) {
  return [s, h](const VectorXd& x) {
    return VectorXd(assemble_bracket_matrix(s, x).transpose() * h.gradient(x));
  };
}

VectorField wong_rhs(const LinearGaugePotential& p, const LieAlgebraStructure& algebra,
                     const Metric& g) {
  if (algebra.dim() != p.n || g.dim() != p.m) throw DimensionError("wong_rhs: inconsistent dimensions");
  return [p, algebra, g](const VectorXd& x) {
    const int m = p.m;
    const int n = p.n;
    const VectorXd mom = x.head(m);
    const VectorXd q = x.segment(m, m);
    const VectorXd y = x.tail(n);
    const MatrixXd gi = g.inverse(q);
    const VectorXd v = gi * mom;
    const MatrixXd a = p(q);
    const auto f = linear_field_strength(p, algebra, q);
    VectorXd out(2 * m + n);
    VectorXd pdot = VectorXd::Zero(m);
    if (!g.is_constant()) {
      const auto dgi = g.inverse_derivative(q);
      for (int i = 0; i < m; ++i) pdot(i) = -0.5 * mom.dot(dgi[i] * mom);
    }
    for (int al = 0; al < n; ++al) pdot -= y(al) * (f[al] * v);
    out.head(m) = pdot;
    out.segment(m, m) = v;
    VectorXd ydot = VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) ydot += v(i) * (algebra.ad_star(a.col(i)) * y);
    out.tail(n) = ydot;
    return out;
  };
}

DomainPredicate min_radius_domain(int m, double radius) {
  return [m, radius](const VectorXd& x) { return x.segment(m, m).norm() >= radius; };
}

Trajectory integrate(const VectorField& rhs, const VectorXd& x0, double t_end, double h,
                     const DomainPredicate& in_domain) {
  if (!(h > 0.0)) throw DomainError("integration step must be positive");
  if (!(t_end >= 0.0)) throw DomainError("integration end time must be non-negative");
  if (in_domain && !in_domain(x0)) throw IntegrationError("initial state outside the domain", 0.0, x0);
  const long steps = static_cast<long>(std::ceil(t_end / h - 1e-9));
  Trajectory traj;
  traj.step = h;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  VectorXd x = x0;
  for (long k = 1; k <= steps; ++k) {
    const double t_prev = traj.times.back();
    const double t = k == steps ? t_end : k * h;
    VectorXd next;
    try {
      next = rk4_step(rhs, x, t - t_prev);
    } catch (const IntegrationError&) {
      throw IntegrationError("non-finite RK4 stage", t_prev, x);
    } catch (const DomainError& e) {
      throw IntegrationError(std::string("left the domain: ") + e.what(), t_prev, x);
    } catch (const EvaluationError& e) {
      throw IntegrationError(std::string("evaluation failed: ") + e.what(), t_prev, x);
    }
    if (!all_finite(next)) throw IntegrationError("non-finite state", t_prev, x);
    if (in_domain && !in_domain(next)) throw IntegrationError("left the domain", t_prev, x);
    x = std::move(next);
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

const DriftEntry& ConservationReport::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("no monitored function named " + name);
}

ConservationReport monitor(const Trajectory& traj, const std::vector<NamedFunction>& functions) {
  ConservationReport report;
  for (const auto& nf : functions) {
    DriftEntry e;
    e.name = nf.name;
    if (traj.states.empty()) {
      report.entries.push_back(e);
      continue;
    }
    e.initial = nf.f(traj.states.front());
    for (const auto& x : traj.states) e.max_abs_drift = std::max(e.max_abs_drift, std::abs(nf.f(x) - e.initial));
    e.max_rel_drift = std::abs(e.initial) < 1e-12 ? e.max_abs_drift : e.max_abs_drift / std::abs(e.initial);
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace gpb
