#include "gpb/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gpb {

namespace {

constexpr double kPi = std::numbers::pi;

// Fourth-order central difference in q^k; wide enough that differencing data which
// is itself differenced stays well above roundoff.
std::vector<MatrixXd> diff_q(const ConnectionPair::MatricesFn& f, const VectorXd& q, int k) {
  const double h = 1e-3 * std::max(1.0, std::abs(q(k)));
  auto at = [&](double shift) {
    VectorXd qq = q;
    qq(k) += shift;
    return f(qq);
  };
  const auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
  std::vector<MatrixXd> out(p1.size());
  for (std::size_t r = 0; r < p1.size(); ++r) out[r] = (-p2[r] + 8.0 * p1[r] - 8.0 * m1[r] + m2[r]) / (12.0 * h);
  return out;
}

MatrixXd diff_q(const std::function<MatrixXd(const VectorXd&)>& f, const VectorXd& q, int k) {
  return diff_q([&f](const VectorXd& x) { return std::vector<MatrixXd>{f(x)}; }, q, k)[0];
}

/// F_ij as an algebra vector.
VectorXd field_vector(const std::vector<MatrixXd>& f, int i, int j) {
  VectorXd v(f.size());
  for (std::size_t a = 0; a < f.size(); ++a) v(a) = f[a](i, j);
  return v;
}

MatrixXd ad_star_of(const LieAlgebraStructure& l, const VectorXd& x) { return l.ad_star(x); }

/// exp(t ad_x) w.
VectorXd adjoint_flow(const LieAlgebraStructure& l, bool so3, const VectorXd& x, double t, const VectorXd& w) {
  if (so3) {
    const double r = x.norm();
    return r == 0.0 ? w : rotate(w, x / r, t * r);
  }
  return matrix_exp_action(l.ad(x), t, w);
}

double operator_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

std::vector<MatrixXd> zero_field(int n, int m) { return std::vector<MatrixXd>(n, MatrixXd::Zero(m, m)); }

}  // namespace

ConnectionPair ConnectionPair::flat(int m, const LieAlgebraStructure& algebra) {
  const int n = algebra.dim();
  ConnectionPair c = from_potential(LinearGaugePotential::zero(n, m), algebra);
  c.curvature = [n, m](const VectorXd&) { return zero_field(n, m); };
  return c;
}

ConnectionPair ConnectionPair::from_potential(const LinearGaugePotential& p, const LieAlgebraStructure& algebra) {
  if (algebra.dim() != p.n) throw DimensionError("potential and algebra disagree on dimension");
  ConnectionPair c;
  c.m = p.m;
  c.n = p.n;
  c.algebra = [algebra](const VectorXd&) { return algebra; };
  c.constant_algebra = true;
  c.potential = p;
  c.curvature = [p, algebra](const VectorXd& q) { return linear_field_strength(p, algebra, q); };
  c.min_q_norm = p.min_q_norm;
  return c;
}

ConnectionPair ConnectionPair::from_potential(const LinearGaugePotential& p, AlgebraFn algebra) {
  for (const auto& pt : spot_check_points(p.m, p.n)) {
    const LieAlgebraStructure l = algebra(pt.q);
    if (l.dim() != p.n) throw DimensionError("potential and algebra disagree on dimension");
    const StructureReport r = check_structure_constants(l, 1e-10);
    if (!r.pass) {
      std::ostringstream msg;
      msg << "structure constants fail at q = (" << pt.q.transpose() << "): antisymmetry " << r.antisymmetry
          << ", jacobi " << r.jacobi;
      throw DomainError(msg.str());
    }
  }
  ConnectionPair c;
  c.m = p.m;
  c.n = p.n;
  c.algebra = algebra;
  c.constant_algebra = false;
  c.potential = p;
  c.curvature = [p, algebra](const VectorXd& q) { return linear_field_strength(p, algebra(q), q); };
  c.min_q_norm = p.min_q_norm;
  return c;
}

void ConnectionPair::check_domain(const VectorXd& q) const {
  if (q.size() != m) throw DimensionError("connection evaluated at base point of wrong dimension");
  if (min_q_norm > 0.0 && q.norm() < min_q_norm) throw DomainError("connection evaluated inside the singular radius");
}

LieAlgebraStructure ConnectionPair::algebra_at(const VectorXd& q) const { return algebra(q); }

MatrixXd ConnectionPair::coefficients(const VectorXd& q) const {
  check_domain(q);
  return potential.value(q);
}

std::vector<MatrixXd> ConnectionPair::gamma(const VectorXd& q) const {
  check_domain(q);
  if (gamma_override) return gamma_override(q);
  const LieAlgebraStructure l = algebra(q);
  const MatrixXd a = potential.value(q);
  std::vector<MatrixXd> out(m);
  for (int i = 0; i < m; ++i) out[i] = -l.ad_star(a.col(i));
  return out;
}

std::vector<MatrixXd> ConnectionPair::field(const VectorXd& q) const {
  check_domain(q);
  return curvature(q);
}

VectorXd SectionFamily::operator()(const VectorXd& a, const VectorXd& q) const {
  if (a.size() != rank()) throw DimensionError("section family evaluated with wrong coefficient count");
  VectorXd out = VectorXd::Zero(basis.front().n);
  for (int k = 0; k < rank(); ++k) out += a(k) * basis[k](q);
  return out;
}

VectorXd dual_derivative(const ConnectionPair& c, const SectionField& eta, int i, const VectorXd& q) {
  return eta.jacobian(q).col(i) - c.gamma(q)[i].transpose() * eta(q);
}

CheckReport check_lpvh1(const ConnectionPair& c, const std::vector<VectorXd>& samples, double tol) {
  double worst = 0.0;
  for (const auto& q : samples) {
    const auto gam = c.gamma(q);
    const LieAlgebraStructure l = c.algebra_at(q);
    for (int al = 0; al < c.n; ++al) {
      const VectorXd e = VectorXd::Unit(c.n, al);
      const MatrixXd k = l.ad_star(e);
      for (int i = 0; i < c.m; ++i) {
        MatrixXd r = gam[i] * k - k * gam[i] - l.ad_star(-gam[i].transpose() * e);
        if (!c.constant_algebra)
          r += diff_q([&c, &e](const VectorXd& x) { return ad_star_of(c.algebra_at(x), e); }, q, i);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
    }
  }
  return CheckReport::from_residual("lpvh1", worst, tol);
}

CheckReport check_lpvh2(const ConnectionPair& c, const std::vector<VectorXd>& samples, double tol) {
  const ConnectionPair::MatricesFn gam = [&c](const VectorXd& x) { return c.gamma(x); };
  double worst = 0.0;
  for (const auto& q : samples) {
    const auto g = c.gamma(q);
    const auto f = c.field(q);
    const LieAlgebraStructure l = c.algebra_at(q);
    std::vector<std::vector<MatrixXd>> dg(c.m);
    for (int k = 0; k < c.m; ++k) dg[k] = diff_q(gam, q, k);
    for (int i = 0; i < c.m; ++i)
      for (int j = i + 1; j < c.m; ++j) {
        const MatrixXd curv = dg[i][j] - dg[j][i] + g[i] * g[j] - g[j] * g[i];
        worst = std::max(worst, (curv + l.ad_star(field_vector(f, i, j))).cwiseAbs().maxCoeff());
      }
  }
  return CheckReport::from_residual("lpvh2", worst, tol);
}

CheckReport check_lpvh3(const ConnectionPair& c, const std::vector<VectorXd>& samples, double tol) {
  const ConnectionPair::MatricesFn field = [&c](const VectorXd& x) { return c.field(x); };
  double worst = 0.0;
  for (const auto& q : samples) {
    const auto g = c.gamma(q);
    const auto f = c.field(q);
    std::vector<std::vector<MatrixXd>> df(c.m);
    for (int k = 0; k < c.m; ++k) df[k] = diff_q(field, q, k);
    auto cov = [&](int k, int i, int j) {
      return VectorXd(field_vector(df[k], i, j) - g[k].transpose() * field_vector(f, i, j));
    };
    for (int i = 0; i < c.m; ++i)
      for (int j = i + 1; j < c.m; ++j)
        for (int k = j + 1; k < c.m; ++k)
          worst = std::max(worst, (cov(k, i, j) + cov(i, j, k) + cov(j, k, i)).cwiseAbs().maxCoeff());
  }
  return CheckReport::from_residual("lpvh3", worst, tol);
}

CheckReport check_ico(const ConnectionPair& c, const SectionFamily& s, const std::vector<VectorXd>& samples,
                      double tol) {
  double ad_norm = 0.0;
  double plain = 0.0;
  for (const auto& q : samples) {
    const LieAlgebraStructure l = c.algebra_at(q);
    for (const auto& sa : s.basis)
      for (int i = 0; i < c.m; ++i) {
        const VectorXd w = dual_derivative(c, sa, i, q);
        ad_norm = std::max(ad_norm, operator_norm(l.ad(w)));
        plain = std::max(plain, w.norm());
      }
  }
  std::ostringstream detail;
  detail << "max |nabla* s| = " << plain;
  return CheckReport::from_residual("ico", ad_norm, tol, detail.str());
}

LinearGaugePotential solve_ae_so3(const SectionField& s) {
  if (s.n != 3) throw DimensionError("solve_ae_so3 needs an so(3) section");
  const auto points = spot_check_points(s.m, s.n);
  for (const auto& pt : points)
    if (std::abs(s(pt.q).norm() - 1.0) > 1e-12)
      throw InvalidActionError("solve_ae_so3: section must have unit norm");
  const int m = s.m;
  LinearGaugePotential p;
  p.n = 3;
  p.m = m;
  p.min_q_norm = s.min_q_norm;
  p.value = [s, m](const VectorXd& q) {
    const VectorXd sq = s(q);
    const MatrixXd d = s.jacobian(q);
    MatrixXd a(3, m);
    for (int i = 0; i < m; ++i) a.col(i) = -cross<double>(sq, d.col(i));
    return a;
  };
  p.dq = [s, m](const VectorXd& q) {
    const VectorXd sq = s(q);
    const MatrixXd d = s.jacobian(q);
    const auto h = s.hessians(q);
    std::vector<MatrixXd> out(m, MatrixXd(3, m));
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i) {
        VectorXd hik(3);
        for (int al = 0; al < 3; ++al) hik(al) = h[al](i, k);
        out[k].col(i) = -cross<double>(d.col(k), d.col(i)) - cross<double>(sq, hik);
      }
    return out;
  };
  p.contracted = so3_section_closed_form(s);
  for (const auto& pt : points) {
    const MatrixXd a = p.value(pt.q);
    const MatrixXd d = s.jacobian(pt.q);
    for (int i = 0; i < m; ++i)
      if ((cross<double>(s(pt.q), a.col(i)) - d.col(i)).norm() > 1e-10)
        throw InvalidActionError("solve_ae_so3: s x A != ds at a spot point");
  }
  return p;
}

ConnectionPair averaged_connection(const ConnectionPair& c0, const SectionFamily& s, GroupKind kind,
                                   const AveragingOptions& opts) {
  if (s.basis.empty()) throw InvalidActionError("averaged_connection: empty section family");
  for (const auto& sa : s.basis)
    if (sa.m != c0.m || sa.n != c0.n) throw DimensionError("sections and connection disagree on dimensions");
  const int rank = s.rank();
  switch (kind) {
    case GroupKind::Circle:
    case GroupKind::So3Rotations:
      if (rank != 1) throw InvalidActionError("circle averaging takes exactly one section");
      break;
    case GroupKind::Torus: break;
    case GroupKind::So3Group:
      if (rank != 3) throw InvalidActionError("SO(3) averaging takes three sections");
      break;
    case GroupKind::Identity:
      throw InvalidActionError("averaged_connection: unsupported group kind " + to_string(kind));
  }

  // Spot checks: periodic circle factors, commuting torus factors.
  for (const auto& pt : spot_check_points(c0.m, c0.n)) {
    if (c0.min_q_norm > 0.0 && pt.q.norm() < c0.min_q_norm) continue;
    const LieAlgebraStructure l = c0.algebra_at(pt.q);
    const bool so3 = l == LieAlgebraStructure::so3();
    if (kind == GroupKind::So3Group) continue;
    for (int a = 0; a < rank; ++a) {
      const VectorXd sa = s.basis[a](pt.q);
      for (int b = 0; b < c0.n; ++b) {
        const VectorXd e = VectorXd::Unit(c0.n, b);
        if ((adjoint_flow(l, so3, sa, kTwoPi, e) - e).norm() > 1e-10)
          throw InvalidActionError("averaged_connection: exp(2pi ad_s) is not the identity");
      }
      for (int b = a + 1; b < rank; ++b)
        if (l.bracket(sa, s.basis[b](pt.q)).norm() > 1e-10)
          throw InvalidActionError("averaged_connection: torus sections do not commute");
    }
  }

  const auto correction = [c0, s, kind, opts, rank](const VectorXd& q) {
    const LieAlgebraStructure l = c0.algebra_at(q);
    const bool so3 = l == LieAlgebraStructure::so3();
    const auto g0 = c0.gamma(q);
    const int m = c0.m;
    const int n = c0.n;
    std::vector<VectorXd> sec(rank);
    std::vector<MatrixXd> w(rank, MatrixXd(n, m));  // column i = nabla_0*_i s_a
    for (int a = 0; a < rank; ++a) {
      sec[a] = s.basis[a](q);
      const MatrixXd d = s.basis[a].jacobian(q);
      for (int i = 0; i < m; ++i) w[a].col(i) = d.col(i) - g0[i].transpose() * sec[a];
    }
    MatrixXd out = MatrixXd::Zero(n, m);
    if (kind == GroupKind::Circle || kind == GroupKind::So3Rotations) {
      const int count = opts.circle_nodes;
      const QuadratureNodes saw = sawtooth_nodes(count);
      for (int j = 0; j < count; ++j) {
        const double coef = saw.weights[j];
        for (int i = 0; i < m; ++i) out.col(i) += coef * adjoint_flow(l, so3, sec[0], saw.nodes[j], w[0].col(i));
      }
      return out;
    }
    const QuadratureNodes inner = gauss_legendre_nodes(opts.inner_nodes, 0.0, 1.0);
    std::vector<GroupNode> nodes;
    if (kind == GroupKind::So3Group) {
      nodes = haar_rule(GroupKind::So3Group, 3, opts);
    } else {
      const QuadratureNodes outer = gauss_legendre_nodes(opts.torus_nodes, 0.0, kTwoPi);
      std::vector<int> idx(rank, 0);
      while (true) {
        GroupNode node{VectorXd(rank), 1.0};
        for (int d = 0; d < rank; ++d) {
          node.a(d) = outer.nodes[idx[d]];
          node.weight *= outer.weights[idx[d]] / kTwoPi;
        }
        nodes.push_back(std::move(node));
        int d = 0;
        while (d < rank && ++idx[d] == opts.torus_nodes) idx[d++] = 0;
        if (d == rank) break;
      }
    }
    for (const auto& node : nodes) {
      VectorXd x = VectorXd::Zero(n);
      MatrixXd wa = MatrixXd::Zero(n, m);
      for (int a = 0; a < rank; ++a) {
        x += node.a(a) * sec[a];
        wa += node.a(a) * w[a];
      }
      for (std::size_t t = 0; t < inner.size(); ++t)
        for (int i = 0; i < m; ++i)
          out.col(i) -= node.weight * inner.weights[t] * adjoint_flow(l, so3, x, inner.nodes[t], wa.col(i));
      if (kind == GroupKind::Torus)
        for (int a = 0; a < rank; ++a)
          for (int i = 0; i < m; ++i) out.col(i) += kPi * node.weight * adjoint_flow(l, so3, x, 1.0, w[a].col(i));
    }
    return out;
  };

  ConnectionPair c = c0;
  const auto a0 = c0.potential.value;
  const std::function<MatrixXd(const VectorXd&)> total = [a0, correction](const VectorXd& q) {
    return MatrixXd(a0(q) + correction(q));
  };
  c.potential = LinearGaugePotential::from_function(c0.n, c0.m, total, c0.min_q_norm);
  if (c0.gamma_override) {
    const auto g0 = c0.gamma_override;
    c.gamma_override = [g0, c0, correction](const VectorXd& q) {
      auto g = g0(q);
      const LieAlgebraStructure l = c0.algebra_at(q);
      const MatrixXd a = correction(q);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= l.ad_star(a.col(i));
      return g;
    };
  }
  c.curvature = [c0, correction](const VectorXd& q) {
    auto f = c0.field(q);
    const auto g0 = c0.gamma(q);
    const LieAlgebraStructure l = c0.algebra_at(q);
    const MatrixXd a = correction(q);
    std::vector<MatrixXd> da(c0.m);
    for (int k = 0; k < c0.m; ++k) da[k] = diff_q(correction, q, k);
    for (int i = 0; i < c0.m; ++i)
      for (int j = i + 1; j < c0.m; ++j) {
        const VectorXd v = da[i].col(j) - g0[i].transpose() * a.col(j) - da[j].col(i) +
                           g0[j].transpose() * a.col(i) + l.bracket(a.col(i), a.col(j));
        for (int al = 0; al < c0.n; ++al) {
          f[al](i, j) += v(al);
          f[al](j, i) -= v(al);
        }
      }
    return f;
  };
  return c;
}

VectorField generalized_wong_rhs(const ConnectionPair& c, const Metric& g) {
  if (g.dim() != c.m) throw DimensionError("generalized_wong_rhs: metric and connection disagree on dimension");
  return [c, g](const VectorXd& x) {
    const int m = c.m;
    const int n = c.n;
    const VectorXd mom = x.head(m);
    const VectorXd q = x.segment(m, m);
    const VectorXd y = x.tail(n);
    const VectorXd v = g.inverse(q) * mom;
    const auto f = c.field(q);
    const auto gam = c.gamma(q);
    VectorXd pdot = VectorXd::Zero(m);
    if (!g.is_constant()) {
      const auto dgi = g.inverse_derivative(q);
      for (int i = 0; i < m; ++i) pdot(i) = -0.5 * mom.dot(dgi[i] * mom);
    }
    for (int al = 0; al < n; ++al) pdot -= y(al) * (f[al] * v);
    VectorXd ydot = VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) ydot -= v(i) * (gam[i] * y);
    VectorXd out(2 * m + n);
    out << pdot, v, ydot;
    return out;
  };
}

GaugePoissonStructure induced_structure(const ConnectionPair& c) {
  if (!c.coadjoint_type())
    throw DomainError("induced_structure needs a connection of coadjoint type");
  PoissonFiber fiber;
  if (c.constant_algebra) {
    const LieAlgebraStructure l = c.algebra_at(VectorXd::Zero(c.m));
    fiber = PoissonFiber::lie_poisson(c.m, l);
    if (l == LieAlgebraStructure::so3()) fiber.add_casimir("|y|^2", squared_norm_casimir(c.m, 3));
  } else {
    const auto algebra = c.algebra;
    fiber = PoissonFiber::general(c.m, c.n, [algebra](const VectorXd& q, const VectorXd& y) {
      return algebra(q).poisson_tensor(y);
    });
  }
  GaugePoissonStructure s(fiber, c.potential.contracted);
  const auto curvature = c.curvature;
  const int n = c.n;
  s.field_override = [curvature, n](const VectorXd& q, const VectorXd& y) {
    const auto f = curvature(q);
    MatrixXd out = MatrixXd::Zero(f[0].rows(), f[0].cols());
    for (int al = 0; al < n; ++al) out += y(al) * f[al];
    return out;
  };
  return s;
}

}  // namespace gpb
