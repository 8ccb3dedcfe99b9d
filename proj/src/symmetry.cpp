#include "gpb/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace gpb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExactPeriodTol = 1e-10;
constexpr double kIntegratedPeriodTol = 1e-8;
constexpr double kCommuteTol = 1e-8;
constexpr int kFlowStepsPerPeriod = 2048;

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

// Outer step for a difference of a form whose own partials are differences.
DiffScheme outer_scheme(const GaugeForm& a) {
  return a.components.has_jacobian() ? DiffScheme{} : DiffScheme{3e-4};
}

bool is_circle(GroupKind k) { return k == GroupKind::Circle || k == GroupKind::So3Rotations; }

std::vector<std::vector<int>> multi_indices(int rank, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(rank, 0);
  while (true) {
    out.push_back(idx);
    int d = 0;
    while (d < rank && ++idx[d] == n) idx[d++] = 0;
    if (d == rank) break;
  }
  return out;
}

}  // namespace

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Circle: return "circle";
    case GroupKind::Torus: return "torus";
    case GroupKind::So3Rotations: return "so3-rotations";
    case GroupKind::So3Group: return "so3-group";
    case GroupKind::Identity: return "identity";
  }
  return "unknown";
}

void SectionField::check_domain(const VectorXd& q) const {
  if (q.size() != m) throw DimensionError("section evaluated at base point of wrong dimension");
  if (min_q_norm > 0.0 && q.norm() < min_q_norm) throw DomainError("section evaluated inside the singular radius");
}

VectorXd SectionField::operator()(const VectorXd& q) const {
  check_domain(q);
  return value(q);
}

MatrixXd SectionField::jacobian(const VectorXd& q) const {
  check_domain(q);
  return value.jacobian(q);
}

std::vector<MatrixXd> SectionField::hessians(const VectorXd& q) const {
  check_domain(q);
  return value.hessians(q);
}

std::vector<FiberPoint> spot_check_points(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  std::vector<FiberPoint> pts;
  for (int k = 0; k < 5; ++k) {
    VectorXd q(m);
    do {
      for (int i = 0; i < m; ++i) q(i) = u(rng);
    } while (q.norm() < 1e-3);
    q = q.normalized() * radius(rng);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = u(rng);
    pts.push_back({q, y});
  }
  return pts;
}

VectorXd infinitesimal_generator(const ScalarFunction& j, const PoissonFiber& fiber,
                                 const VectorXd& q, const VectorXd& y) {
  const VectorXd dy = j.gradient(join(q, y)).tail(fiber.n);
  return -fiber.psi(q, y) * dy;
}

double periodicity_defect(const FiberwiseAction& action, const std::vector<FiberPoint>& points) {
  double worst = 0.0;
  if (!is_circle(action.kind) && action.kind != GroupKind::Torus) return worst;
  for (const auto& pt : points)
    for (int k = 0; k < action.rank; ++k) {
      const VectorXd a = VectorXd::Unit(action.rank, k);
      worst = std::max(worst, (action.flow(pt.q, a, kTwoPi, pt.y) - pt.y).norm());
    }
  return worst;
}

FiberwiseAction section_circle_action(const SectionField& s, const LieAlgebraStructure& algebra) {
  if (s.n != algebra.dim()) throw DimensionError("section and algebra disagree on dimension");
  const bool so3 = algebra == LieAlgebraStructure::so3();
  const auto points = spot_check_points(s.m, s.n);
  if (so3) {
    for (const auto& pt : points) {
      const double norm = s(pt.q).norm();
      if (std::abs(norm - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "so(3) section must have unit norm; |s| = " << norm << " at q = (" << pt.q.transpose() << ")";
        throw InvalidActionError(msg.str());
      }
    }
  }
  FiberwiseAction act;
  act.kind = so3 ? GroupKind::So3Rotations : GroupKind::Circle;
  act.m = s.m;
  act.n = s.n;
  act.rank = 1;
  act.fiber = PoissonFiber::lie_poisson(s.m, algebra);
  if (so3) act.fiber.add_casimir("|y|^2", squared_norm_casimir(s.m, 3));
  act.section = s;
  act.min_q_norm = s.min_q_norm;
  const int m = s.m;
  const int n = s.n;
  act.momentum.push_back(ScalarFunction(
      m + n, [s, m, n](const VectorXd& z) { return s(z.head(m)).dot(z.tail(n)); },
      [s, m, n](const VectorXd& z) {
        const VectorXd q = z.head(m);
        const VectorXd y = z.tail(n);
        VectorXd g(m + n);
        g.head(m) = s.jacobian(q).transpose() * y;
        g.tail(n) = s(q);
        return g;
      }));
  if (so3) {
    act.flow = [s](const VectorXd& q, const VectorXd& a, double t, const VectorXd& y) {
      return rotate(y, s(q), -t * a(0));
    };
  } else {
    act.flow = [s, algebra](const VectorXd& q, const VectorXd& a, double t, const VectorXd& y) {
      return coad_flow(algebra, a(0) * s(q), t, y);
    };
  }
  const double defect = periodicity_defect(act, points);
  if (defect > kExactPeriodTol) {
    std::ostringstream msg;
    msg << "section flow is not 2pi-periodic (defect " << defect << ")";
    throw InvalidActionError(msg.str());
  }
  return act;
}

FiberwiseAction momentum_circle_action(const ScalarFunction& j, const PoissonFiber& fiber,
                                       double min_q_norm) {
  const int m = fiber.m;
  const int n = fiber.n;
  if (j.dim() != m + n) throw DimensionError("momentum map must be a function of (q, y)");
  FiberwiseAction act;
  act.kind = GroupKind::Circle;
  act.m = m;
  act.n = n;
  act.rank = 1;
  act.fiber = fiber;
  act.momentum.push_back(j);
  act.min_q_norm = min_q_norm;
  act.flow = [j, fiber](const VectorXd& q, const VectorXd& a, double t, const VectorXd& y) {
    const double span = t * a(0);
    if (span == 0.0) return y;
    const VectorField gen = [&](const VectorXd& yy) {
      return VectorXd(infinitesimal_generator(j, fiber, q, yy) * (span < 0 ? -1.0 : 1.0));
    };
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / kTwoPi * kFlowStepsPerPeriod)));
    const double h = std::abs(span) / steps;
    VectorXd yy = y;
    for (int k = 0; k < steps; ++k) yy = rk4_step(gen, yy, h);
    return yy;
  };
  const double defect = periodicity_defect(act, spot_check_points(m, n));
  if (defect > kIntegratedPeriodTol) {
    std::ostringstream msg;
    msg << "momentum flow is not 2pi-periodic (defect " << defect << ")";
    throw InvalidActionError(msg.str());
  }
  return act;
}

FiberwiseAction torus_action(const std::vector<FiberwiseAction>& circles) {
  if (circles.empty()) throw InvalidActionError("torus action needs at least one circle factor");
  for (const auto& c : circles) {
    if (!is_circle(c.kind) || c.rank != 1) throw InvalidActionError("torus factors must be circle actions");
    if (c.m != circles[0].m || c.n != circles[0].n) throw DimensionError("torus factors disagree on dimensions");
  }
  FiberwiseAction act;
  act.kind = GroupKind::Torus;
  act.m = circles[0].m;
  act.n = circles[0].n;
  act.rank = static_cast<int>(circles.size());
  act.fiber = circles[0].fiber;
  for (const auto& c : circles) {
    act.momentum.push_back(c.momentum[0]);
    act.min_q_norm = std::max(act.min_q_norm, c.min_q_norm);
  }
  const auto points = spot_check_points(act.m, act.n);
  for (std::size_t a = 0; a < circles.size(); ++a)
    for (std::size_t b = a + 1; b < circles.size(); ++b)
      for (const auto& pt : points) {
        const VectorXd one = scalar(1.0);
        const VectorXd ab = circles[a].flow(pt.q, one, 0.7, circles[b].flow(pt.q, one, 1.9, pt.y));
        const VectorXd ba = circles[b].flow(pt.q, one, 1.9, circles[a].flow(pt.q, one, 0.7, pt.y));
        if ((ab - ba).norm() > kCommuteTol) {
          std::ostringstream msg;
          msg << "circle factors " << a << " and " << b << " do not commute (defect " << (ab - ba).norm() << ")";
          throw InvalidActionError(msg.str());
        }
      }
  act.flow = [circles](const VectorXd& q, const VectorXd& a, double t, const VectorXd& y) {
    VectorXd out = y;
    for (std::size_t k = 0; k < circles.size(); ++k) out = circles[k].flow(q, scalar(a(k)), t, out);
    return out;
  };
  return act;
}

FiberwiseAction identity_action(const PoissonFiber& fiber) {
  FiberwiseAction act;
  act.kind = GroupKind::Identity;
  act.m = fiber.m;
  act.n = fiber.n;
  act.rank = 0;
  act.fiber = fiber;
  act.flow = [](const VectorXd&, const VectorXd&, double, const VectorXd& y) { return y; };
  return act;
}

std::vector<GroupNode> haar_rule(GroupKind kind, int rank, const AveragingOptions& opts) {
  std::vector<GroupNode> out;
  switch (kind) {
    case GroupKind::Circle:
    case GroupKind::So3Rotations:
    case GroupKind::Torus: {
      const int n = kind == GroupKind::Torus ? opts.torus_nodes : opts.circle_nodes;
      const int r = kind == GroupKind::Torus ? rank : 1;
      const QuadratureNodes p = periodic_trapezoid_nodes(n);
      for (const auto& idx : multi_indices(r, n)) {
        GroupNode node{VectorXd(r), 1.0};
        for (int d = 0; d < r; ++d) {
          node.a(d) = p.nodes[idx[d]];
          node.weight /= n;
        }
        out.push_back(std::move(node));
      }
      break;
    }
    case GroupKind::So3Group: {
      const int n = opts.so3_nodes;
      const QuadratureNodes rr = gauss_legendre_nodes(n, 0.0, kPi);
      const QuadratureNodes cc = gauss_legendre_nodes(n, -1.0, 1.0);
      const QuadratureNodes pp = periodic_trapezoid_nodes(n);
      for (int i = 0; i < n; ++i) {
        // r^2 from the volume element cancels the 1/|a|^2 of the density.
        const double radial = rr.weights[i] * std::pow(std::sin(0.5 * rr.nodes[i]), 2) / (2.0 * kPi * kPi);
        for (int j = 0; j < n; ++j) {
          const double st = std::sqrt(std::max(0.0, 1.0 - cc.nodes[j] * cc.nodes[j]));
          for (int k = 0; k < n; ++k) {
            VectorXd a(3);
            a << st * std::cos(pp.nodes[k]), st * std::sin(pp.nodes[k]), cc.nodes[j];
            out.push_back({rr.nodes[i] * a, radial * cc.weights[j] * pp.weights[k]});
          }
        }
      }
      break;
    }
    case GroupKind::Identity:
      out.push_back({VectorXd(0), 1.0});
      break;
  }
  return out;
}

double group_average(const FiberwiseAction& action, const ScalarFunction& f, const VectorXd& q,
                     const VectorXd& y, const AveragingOptions& opts) {
  double sum = 0.0;
  for (const auto& node : haar_rule(action.kind, action.rank, opts))
    sum += node.weight * f(join(q, action.act(q, node.a, y)));
  return sum;
}

namespace {

VectorXd base_gradient(const ScalarFunction& j, const VectorXd& q, const VectorXd& y) {
  return j.gradient(join(q, y)).head(q.size());
}

VectorXd circle_average_at(const FiberwiseAction& action, const VectorXd& q, const VectorXd& y,
                           const AveragingOptions& opts) {
  const int n = opts.circle_nodes;
  const QuadratureNodes saw = sawtooth_nodes(n);
  // The weights sum to zero, so subtracting the t = 0 value changes nothing except
  // making orbit-constant gradients cancel exactly. The (t - pi) kernel already has
  // zero circle mean, so the normalizing offset is zero.
  const VectorXd g0 = base_gradient(action.momentum[0], q, y);
  VectorXd sawtooth = VectorXd::Zero(action.m);
  for (int k = 1; k < n; ++k)
    sawtooth += saw.weights[k] * (base_gradient(action.momentum[0], q, action.flow(q, scalar(1.0), saw.nodes[k], y)) - g0);
  return sawtooth;
}

VectorXd torus_average_at(const FiberwiseAction& action, const VectorXd& q, const VectorXd& y,
                          const AveragingOptions& opts) {
  const int r = action.rank;
  const QuadratureNodes outer = gauss_legendre_nodes(opts.torus_nodes, 0.0, kTwoPi);
  const QuadratureNodes inner = gauss_legendre_nodes(opts.inner_nodes, 0.0, 1.0);
  VectorXd integral = VectorXd::Zero(action.m);
  VectorXd mean = VectorXd::Zero(action.m);
  for (const auto& idx : multi_indices(r, opts.torus_nodes)) {
    VectorXd a(r);
    double w = 1.0;
    for (int d = 0; d < r; ++d) {
      a(d) = outer.nodes[idx[d]];
      w *= outer.weights[idx[d]] / kTwoPi;
    }
    for (std::size_t l = 0; l < inner.size(); ++l) {
      const VectorXd yt = action.flow(q, a, inner.nodes[l], y);
      for (int k = 0; k < r; ++k)
        integral += w * inner.weights[l] * a(k) * base_gradient(action.momentum[k], q, yt);
    }
    const VectorXd y1 = action.flow(q, a, 1.0, y);
    for (int k = 0; k < r; ++k) mean += w * base_gradient(action.momentum[k], q, y1);
  }
  return -integral + kPi * mean;
}

VectorXd so3_average_at(const FiberwiseAction& action, const VectorXd& q, const VectorXd& y,
                        const AveragingOptions& opts) {
  const QuadratureNodes inner = gauss_legendre_nodes(opts.inner_nodes, 0.0, 1.0);
  VectorXd integral = VectorXd::Zero(action.m);
  for (const auto& node : haar_rule(GroupKind::So3Group, 3, opts)) {
    for (std::size_t l = 0; l < inner.size(); ++l) {
      const VectorXd yt = action.flow(q, node.a, inner.nodes[l], y);
      for (int k = 0; k < 3; ++k)
        integral += node.weight * inner.weights[l] * node.a(k) * base_gradient(action.momentum[k], q, yt);
    }
  }
  return -integral;
}

AveragedGaugeForm wrap(const FiberwiseAction& action, const AveragingOptions& opts,
                       std::vector<int> counts) {
  AveragedGaugeForm out;
  out.kind = action.kind;
  out.node_counts = std::move(counts);
  out.normalized = action.kind != GroupKind::So3Group;
  out.form.m = action.m;
  out.form.n = action.n;
  out.form.min_q_norm = action.min_q_norm;
  const int m = action.m;
  out.form.components = VectorFunction(m + action.n, m, [action, opts, m](const VectorXd& z) {
    return average_at(action, z.head(m), z.tail(z.size() - m), opts);
  });
  return out;
}

void require_kind(const FiberwiseAction& action, bool ok, const char* op) {
  if (!ok) throw InvalidActionError(std::string(op) + ": unsupported group kind " + to_string(action.kind));
}

}  // namespace

VectorXd average_at(const FiberwiseAction& action, const VectorXd& q, const VectorXd& y,
                    const AveragingOptions& opts) {
  if (q.size() != action.m || y.size() != action.n) throw DimensionError("average_at: wrong dimensions");
  if (action.min_q_norm > 0.0 && q.norm() < action.min_q_norm)
    throw DomainError("averaging evaluated inside the singular radius");
  switch (action.kind) {
    case GroupKind::Circle:
    case GroupKind::So3Rotations: return circle_average_at(action, q, y, opts);
    case GroupKind::Torus: return torus_average_at(action, q, y, opts);
    case GroupKind::So3Group: return so3_average_at(action, q, y, opts);
    case GroupKind::Identity: break;
  }
  throw InvalidActionError("averaging: unsupported group kind " + to_string(action.kind));
}

AveragedGaugeForm s1_average(const FiberwiseAction& action, const AveragingOptions& opts) {
  require_kind(action, is_circle(action.kind), "s1_average");
  if (periodicity_defect(action, spot_check_points(action.m, action.n)) > kIntegratedPeriodTol)
    throw InvalidActionError("s1_average: flow is not 2pi-periodic");
  return wrap(action, opts, {opts.circle_nodes});
}

AveragedGaugeForm torus_average(const FiberwiseAction& action, const AveragingOptions& opts) {
  require_kind(action, action.kind == GroupKind::Torus, "torus_average");
  return wrap(action, opts, {opts.torus_nodes, opts.inner_nodes});
}

AveragedGaugeForm so3_group_average(const FiberwiseAction& action, const AveragingOptions& opts) {
  require_kind(action, action.kind == GroupKind::So3Group, "so3_group_average");
  return wrap(action, opts, {opts.so3_nodes, opts.so3_nodes, opts.so3_nodes, opts.inner_nodes});
}

AveragedGaugeForm general_average_gauge_form(const FiberwiseAction& action,
                                             const AveragingOptions& opts) {
  switch (action.kind) {
    case GroupKind::Circle:
    case GroupKind::So3Rotations: return s1_average(action, opts);
    case GroupKind::Torus: return torus_average(action, opts);
    case GroupKind::So3Group: return so3_group_average(action, opts);
    case GroupKind::Identity: break;
  }
  throw InvalidActionError("averaging: unsupported group kind " + to_string(action.kind));
}

AveragedGaugeForm average_gauge_form(const FiberwiseAction& action, const GaugeForm& base,
                                     const AveragingOptions& opts) {
  if (base.m != action.m || base.n != action.n) throw DimensionError("base form and action disagree on dimensions");
  AveragedGaugeForm out = general_average_gauge_form(action, opts);
  const auto rule = haar_rule(action.kind, action.rank, opts);
  const VectorFunction generated = out.form.components;
  const int m = action.m;
  out.form.min_q_norm = std::max(out.form.min_q_norm, base.min_q_norm);
  out.form.components = VectorFunction(m + action.n, m, [action, base, rule, generated, m](const VectorXd& z) {
    const VectorXd q = z.head(m);
    const VectorXd y = z.tail(z.size() - m);
    VectorXd sum = generated(z);
    for (const auto& node : rule) sum += node.weight * base(q, action.act(q, node.a, y));
    return sum;
  });
  return out;
}

GaugeForm so3_section_closed_form(const SectionField& s) {
  if (s.n != 3) throw DimensionError("closed form needs an so(3) section");
  const int m = s.m;
  GaugeForm a;
  a.m = m;
  a.n = 3;
  a.min_q_norm = s.min_q_norm;
  a.components = VectorFunction(
      m + 3, m,
      [s, m](const VectorXd& z) {
        const VectorXd q = z.head(m);
        const VectorXd sy = cross<double>(s(q), z.tail(3));
        return VectorXd(s.jacobian(q).transpose() * sy);
      },
      [s, m](const VectorXd& z) {
        const VectorXd q = z.head(m);
        const VectorXd y = z.tail(3);
        const VectorXd sq = s(q);
        const MatrixXd d = s.jacobian(q);
        const auto h = s.hessians(q);
        const VectorXd sy = cross<double>(sq, y);
        MatrixXd j(m, m + 3);
        for (int i = 0; i < m; ++i) {
          for (int k = 0; k < m; ++k) {
            double second = 0.0;
            for (int al = 0; al < 3; ++al) second += sy(al) * h[al](i, k);
            j(i, k) = cross<double>(d.col(k), y).dot(d.col(i)) + second;
          }
          j.block(i, m, 1, 3) = cross<double>(d.col(i), sq).transpose();
        }
        return j;
      });
  return a;
}

CheckReport check_ic1(const GaugeForm& a, const std::vector<ScalarFunction>& momenta,
                      const PoissonFiber& fiber, const std::vector<FiberPoint>& samples, double tol) {
  const int m = a.m;
  const int n = a.n;
  double worst = 0.0;
  for (const auto& pt : samples) {
    const MatrixXd psi = fiber.psi(pt.q, pt.y);
    for (const auto& j : momenta) {
      auto r = [&](const VectorXd& y) {
        const VectorXd gj = j.gradient(join(pt.q, y));
        const MatrixXd ay = a.jacobian(pt.q, y).rightCols(n);
        return VectorXd(gj.head(m) + ay * (fiber.psi(pt.q, y) * gj.tail(n)));
      };
      const MatrixXd dr = jacobian_fd(r, pt.y, outer_scheme(a));  // m x n, row i = grad_y R_i
      worst = std::max(worst, (psi * dr.transpose()).cwiseAbs().maxCoeff());
    }
  }
  return CheckReport::from_residual("ic1", worst, tol);
}

CheckReport check_hor_commutator(const GaugeForm& a, const std::vector<ScalarFunction>& momenta,
                                 const PoissonFiber& fiber, const std::vector<FiberPoint>& samples,
                                 double tol) {
  const int m = a.m;
  const int n = a.n;
  double worst = 0.0;
  for (const auto& pt : samples) {
    const VectorXd z = join(pt.q, pt.y);
    for (const auto& j : momenta) {
      const VectorField ups = [&](const VectorXd& w) {
        VectorXd v = VectorXd::Zero(m + n);
        v.tail(n) = infinitesimal_generator(j, fiber, w.head(m), w.tail(n));
        return v;
      };
      const MatrixXd dups = jacobian_fd(ups, z);
      for (int i = 0; i < m; ++i) {
        const VectorField hor = [&](const VectorXd& w) {
          return horizontal_lift(a, fiber, i, w.head(m), w.tail(n));
        };
        const VectorXd bracket = dups * hor(z) - jacobian_fd(hor, z, outer_scheme(a)) * ups(z);
        worst = std::max(worst, bracket.cwiseAbs().maxCoeff());
      }
    }
  }
  return CheckReport::from_residual("hor-commutator", worst, tol);
}

CheckReport check_ac(const FiberwiseAction& action, const std::vector<FiberPoint>& samples,
                     const AveragingOptions& opts, double tol) {
  const auto rule = haar_rule(action.kind, action.rank, opts);
  double worst = 0.0;
  for (const auto& pt : samples)
    for (const auto& j : action.momentum) {
      VectorXd mean = VectorXd::Zero(action.m);
      for (const auto& node : rule) mean += node.weight * base_gradient(j, pt.q, action.act(pt.q, node.a, pt.y));
      worst = std::max(worst, mean.cwiseAbs().maxCoeff());
    }
  return CheckReport::from_residual("ac", worst, tol);
}

CheckReport check_action_poisson(const FiberwiseAction& action,
                                 const std::vector<VectorXd>& group_samples,
                                 const std::vector<FiberPoint>& samples, double tol) {
  double worst = 0.0;
  for (const auto& g : group_samples)
    for (const auto& pt : samples) {
      const VectorXd moved = action.act(pt.q, g, pt.y);
      const MatrixXd d = jacobian_fd([&](const VectorXd& y) { return action.act(pt.q, g, y); }, pt.y);
      const MatrixXd lhs = action.fiber.psi(pt.q, moved);
      const MatrixXd rhs = d * action.fiber.psi(pt.q, pt.y) * d.transpose();
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  return CheckReport::from_residual("action-poisson", worst, tol);
}

namespace {

VectorXd lift(const GaugePoissonStructure& s, const FiberwiseAction& action, const VectorXd& g,
              const VectorXd& x) {
  VectorXd out = x;
  out.tail(s.n()) = action.act(s.q_of(x), g, s.y_of(x));
  return out;
}

}  // namespace

InvarianceReport check_invariance(const GaugePoissonStructure& s, const FiberwiseAction& action,
                                  const std::vector<VectorXd>& group_samples,
                                  const std::vector<VectorXd>& phase_samples,
                                  const AveragingOptions& opts, double tol) {
  if (action.m != s.m || action.n != s.n()) throw DimensionError("action and structure disagree on dimensions");
  double push = 0.0;
  for (const auto& g : group_samples)
    for (const auto& x : phase_samples) {
      const MatrixXd d = jacobian_fd([&](const VectorXd& w) { return lift(s, action, g, w); }, x);
      const MatrixXd lhs = d * assemble_bracket_matrix(s, x) * d.transpose();
      const MatrixXd rhs = assemble_bracket_matrix(s, lift(s, action, g, x));
      push = std::max(push, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  const auto rule = haar_rule(action.kind, action.rank, opts);
  double curv = 0.0;
  for (const auto& x : phase_samples) {
    const VectorXd q = s.q_of(x);
    const VectorXd y = s.y_of(x);
    MatrixXd mean = MatrixXd::Zero(s.m, s.m);
    for (const auto& node : rule) mean += node.weight * s.field(q, action.act(q, node.a, y));
    curv = std::max(curv, (mean - s.field(q, y)).cwiseAbs().maxCoeff());
  }
  return {CheckReport::from_residual("invariance", push, tol),
          CheckReport::from_residual("curvature-invariance", curv, tol)};
}

CheckReport first_integral_check(const GaugePoissonStructure& s, const ScalarFunction& h,
                                 const ScalarFunction& j, const Trajectory& traj,
                                 const FiberwiseAction& action, const AveragingOptions& opts,
                                 double tol) {
  if (traj.states.empty()) throw DimensionError("first_integral_check: empty trajectory");
  const ScalarFunction jx = j.dim() == s.dim() ? j : j.pullback_tail(s.dim());
  const std::size_t stride = std::max<std::size_t>(1, traj.states.size() / 50);
  const auto rule = haar_rule(action.kind, action.rank, opts);
  double h_defect = 0.0;
  double bracket = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); k += stride) {
    const VectorXd& x = traj.states[k];
    double mean = 0.0;
    for (const auto& node : rule) mean += node.weight * h(lift(s, action, node.a, x));
    h_defect = std::max(h_defect, std::abs(mean - h(x)));
    bracket = std::max(bracket, std::abs(poisson_bracket(s, h, jx, x)));
  }
  const double drift = monitor(traj, {{"J", jx}}).at("J").max_rel_drift;
  std::ostringstream detail;
  detail << "bracket " << bracket << ", drift " << drift << ", H invariance defect " << h_defect;
  CheckReport r = CheckReport::from_residual("first-integrals", std::max(bracket, drift), tol, detail.str());
  if (h_defect > 1e-10) r.pass = false;
  return r;
}

std::vector<VectorXd> sample_group(GroupKind kind, int rank, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorXd> out;
  for (int c = 0; c < count; ++c) {
    VectorXd a;
    switch (kind) {
      case GroupKind::Circle:
      case GroupKind::So3Rotations: a = scalar(angle(rng)); break;
      case GroupKind::Torus:
        a.resize(rank);
        for (int k = 0; k < rank; ++k) a(k) = angle(rng);
        break;
      case GroupKind::So3Group:
        a.resize(3);
        do {
          for (int k = 0; k < 3; ++k) a(k) = u(rng);
        } while (a.norm() >= 1.0);
        a *= kPi;
        break;
      case GroupKind::Identity: a.resize(0); break;
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace gpb
