#ifndef GPB_SYMMETRY_HPP
#define GPB_SYMMETRY_HPP

#include <optional>
#include <string>
#include <vector>

#include "gpb/dynamics.hpp"
#include "gpb/gauge.hpp"

namespace gpb {

/// Identity is representable so that averaging can reject it explicitly.
enum class GroupKind { Circle, Torus, So3Rotations, So3Group, Identity };

std::string to_string(GroupKind kind);

/// Fiber-algebra-valued field s(q) on Q.
struct SectionField {
  int m = 0;
  int n = 0;
  VectorFunction value;
  double min_q_norm = 0.0;

  /// f(const VectorX<S>& q) -> VectorX<S> of length n.
  template <typename F>
  static SectionField from_template(int m, int n, F f, double min_q_norm = 0.0) {
    SectionField s;
    s.m = m;
    s.n = n;
    s.value = VectorFunction::from_template(m, n, std::move(f));
    s.min_q_norm = min_q_norm;
    return s;
  }

  void check_domain(const VectorXd& q) const;
  VectorXd operator()(const VectorXd& q) const;
  /// n x m matrix ds/dq.
  MatrixXd jacobian(const VectorXd& q) const;
  /// Per component, the m x m Hessian in q.
  std::vector<MatrixXd> hessians(const VectorXd& q) const;
};

/// Base points used for construction-time spot checks: 5 points with 0.5 <= |q| <= 2.
std::vector<FiberPoint> spot_check_points(int m, int n, std::uint64_t seed = 0x5eedULL);

/// Fiberwise action of a compact group with momentum map J.
struct FiberwiseAction {
  using Flow = std::function<VectorXd(const VectorXd& q, const VectorXd& a, double t,
                                      const VectorXd& y)>;

  GroupKind kind = GroupKind::Circle;
  int m = 0;
  int n = 0;
  /// Dimension of the group's Lie algebra.
  int rank = 1;
  PoissonFiber fiber;
  /// J_a as functions of z = (q, y), one per algebra basis element.
  std::vector<ScalarFunction> momentum;
  /// Phi^q_{exp(t a)}(y) for algebra coordinates a.
  Flow flow;
  std::optional<SectionField> section;
  double min_q_norm = 0.0;

  /// Phi^q_{exp a}(y).
  VectorXd act(const VectorXd& q, const VectorXd& a, const VectorXd& y) const {
    return flow(q, a, 1.0, y);
  }
};

/// Upsilon = -Psi grad_y J at (q, y).
VectorXd infinitesimal_generator(const ScalarFunction& j, const PoissonFiber& fiber,
                                 const VectorXd& q, const VectorXd& y);

/// Circle action y -> Ad*_{exp t s(q)} y with J = <s(q), y>. Rejects sections whose
/// flow is not 2pi-periodic (for so(3): |s| != 1).
FiberwiseAction section_circle_action(const SectionField& s, const LieAlgebraStructure& algebra);

/// Circle action generated by an arbitrary momentum function, flowed with RK4.
FiberwiseAction momentum_circle_action(const ScalarFunction& j, const PoissonFiber& fiber,
                                       double min_q_norm = 0.0);

/// Product of commuting circle actions.
FiberwiseAction torus_action(const std::vector<FiberwiseAction>& circles);

/// SO(3) acting on so(3)* by y -> exp(ad*_{R(q) a}) y, J_a = <R(q) e_a, y>,
/// for a rotation-valued frame R given as f(const VectorX<S>& q) -> MatrixX<S>.
template <typename Frame>
FiberwiseAction so3_group_action(int m, Frame frame, double min_q_norm = 0.0);

/// Trivial action; averaging rejects it.
FiberwiseAction identity_action(const PoissonFiber& fiber);

/// Largest periodicity defect |Phi_{2pi}(y) - y| of each circle factor at the points.
double periodicity_defect(const FiberwiseAction& action, const std::vector<FiberPoint>& points);

struct AveragingOptions {
  int circle_nodes = 64;
  int torus_nodes = 32;
  int inner_nodes = 24;
  int so3_nodes = 16;
  /// Requests zero circle or torus mean of A. The centred kernels already satisfy it,
  /// so this only affects the reported flag.
  bool normalize = false;
};

struct AveragedGaugeForm {
  GaugeForm form;
  GroupKind kind = GroupKind::Circle;
  std::vector<int> node_counts;
  bool normalized = false;
};

/// A group element in algebra coordinates and its normalized Haar weight.
struct GroupNode {
  VectorXd a;
  double weight = 0.0;
};

/// Nodes with weights summing to 1: periodic trapezoid on the circle and torus,
/// a spherical product rule on the ball |a| < pi for SO(3).
std::vector<GroupNode> haar_rule(GroupKind kind, int rank, const AveragingOptions& opts = {});

/// <f o Phi_g>_G at (q, y) for a function f of z = (q, y).
double group_average(const FiberwiseAction& action, const ScalarFunction& f, const VectorXd& q,
                     const VectorXd& y, const AveragingOptions& opts = {});

/// A_i = (1/2pi) int_0^2pi (t - pi) dJ/dq^i(q, Fl^t y) dt; its circle mean is zero.
AveragedGaugeForm s1_average(const FiberwiseAction& action, const AveragingOptions& opts = {});

/// A_i = -(2pi)^-r int_{[0,2pi]^r} int_0^1 a^k dJ_k/dq^i(q, Phi_{exp ta} y) dt da + pi <dJ_k/dq^i>_G.
AveragedGaugeForm torus_average(const FiberwiseAction& action, const AveragingOptions& opts = {});

/// Ball integral over |a| < pi against the normalized Haar density sin^2(|a|/2)/(2 pi^2 |a|^2).
AveragedGaugeForm so3_group_average(const FiberwiseAction& action, const AveragingOptions& opts = {});

/// Dispatch by group kind.
AveragedGaugeForm general_average_gauge_form(const FiberwiseAction& action,
                                             const AveragingOptions& opts = {});

/// Averages an existing form: <A0_i o Phi_g>_G plus the generated form above. Forms
/// satisfying the invariance condition are fixed points up to Casimirs.
AveragedGaugeForm average_gauge_form(const FiberwiseAction& action, const GaugeForm& base,
                                     const AveragingOptions& opts = {});

/// Evaluates the averaged form at one point; the entry point behind the GaugeForm.
VectorXd average_at(const FiberwiseAction& action, const VectorXd& q, const VectorXd& y,
                    const AveragingOptions& opts = {});

/// A_i(q, y) = <s(q) x y, ds/dq^i(q)> for a unit so(3) section.
GaugeForm so3_section_closed_form(const SectionField& s);

/// R_i = dJ_a/dq^i + {A_i, J_a}_N must be a fiber Casimir: max |Psi grad_y R_i|.
CheckReport check_ic1(const GaugeForm& a, const std::vector<ScalarFunction>& momenta,
                      const PoissonFiber& fiber, const std::vector<FiberPoint>& samples,
                      double tol = 1e-6);

/// max |[hor_i, Upsilon_a]| over the samples.
CheckReport check_hor_commutator(const GaugeForm& a, const std::vector<ScalarFunction>& momenta,
                                 const PoissonFiber& fiber, const std::vector<FiberPoint>& samples,
                                 double tol = 1e-6);

/// max |<dJ_a/dq^j>_G| over the samples.
CheckReport check_ac(const FiberwiseAction& action, const std::vector<FiberPoint>& samples,
                     const AveragingOptions& opts = {}, double tol = 1e-8);

/// Psi(Phi(y)) = DPhi Psi(y) DPhi^T at sampled group elements and points.
CheckReport check_action_poisson(const FiberwiseAction& action,
                                 const std::vector<VectorXd>& group_samples,
                                 const std::vector<FiberPoint>& samples, double tol = 1e-8);

struct InvarianceReport {
  CheckReport pushforward;
  CheckReport curvature;
  bool pass() const { return pushforward.pass && curvature.pass; }
};

/// Lifted action x = (p, q, y) -> (p, q, Phi^q_g(y)) must preserve the bracket matrix,
/// and the field strength must equal its own group average.
InvarianceReport check_invariance(const GaugePoissonStructure& s, const FiberwiseAction& action,
                                  const std::vector<VectorXd>& group_samples,
                                  const std::vector<VectorXd>& phase_samples,
                                  const AveragingOptions& opts = {}, double tol = 1e-8);

/// {H, J} vanishes at the trajectory states and J does not drift along the trajectory.
/// Requires H to be invariant under the lifted action.
CheckReport first_integral_check(const GaugePoissonStructure& s, const ScalarFunction& h,
                                 const ScalarFunction& j, const Trajectory& traj,
                                 const FiberwiseAction& action, const AveragingOptions& opts = {},
                                 double tol = 1e-8);

/// Random group elements in algebra coordinates (uniform angles or points of the ball).
std::vector<VectorXd> sample_group(GroupKind kind, int rank, int count, std::uint64_t seed);

// ---------------------------------------------------------------------------

template <typename Frame>
FiberwiseAction so3_group_action(int m, Frame frame, double min_q_norm) {
  FiberwiseAction act;
  act.kind = GroupKind::So3Group;
  act.m = m;
  act.n = 3;
  act.rank = 3;
  act.fiber = PoissonFiber::lie_poisson(m, LieAlgebraStructure::so3());
  act.fiber.add_casimir("|y|^2", squared_norm_casimir(m, 3));
  act.min_q_norm = min_q_norm;
  for (int k = 0; k < 3; ++k) {
    act.momentum.push_back(ScalarFunction::from_template(m + 3, [frame, m, k](const auto& z) {
      using S = typename std::decay_t<decltype(z)>::Scalar;
      const VectorX<S> q = z.head(m);
      const MatrixX<S> r = frame(q);
      return S(r.col(k).dot(z.tail(3)));
    }));
  }
  act.flow = [frame](const VectorXd& q, const VectorXd& a, double t, const VectorXd& y) {
    const VectorXd axis = MatrixXd(frame(q)) * a;
    const double angle = axis.norm();
    if (angle == 0.0) return y;
    return rotate(y, axis / angle, -t * angle);
  };
  return act;
}

}  // namespace gpb

#endif  // GPB_SYMMETRY_HPP
