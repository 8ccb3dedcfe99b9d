#ifndef GPB_BUNDLE_HPP
#define GPB_BUNDLE_HPP

#include <functional>
#include <vector>

#include "gpb/dynamics.hpp"
#include "gpb/symmetry.hpp"

namespace gpb {

/// Chart data (nabla, F) of a Lie-Poisson bundle over Q.
///
/// On sections zeta of the coadjoint bundle, nabla_i = d_i + Gamma_i with
/// Gamma_i = -ad*_{A_i} unless overridden. The dual connection on algebra-valued
/// sections is nabla*_i eta = d_i eta - Gamma_i^T eta, i.e. d_i eta + [A_i, eta].
struct ConnectionPair {
  using AlgebraFn = std::function<LieAlgebraStructure(const VectorXd&)>;
  using MatricesFn = std::function<std::vector<MatrixXd>(const VectorXd&)>;

  int m = 0;
  int n = 0;
  AlgebraFn algebra;
  bool constant_algebra = true;
  LinearGaugePotential potential;
  /// Replaces -ad*_{A_i}; used for connections that are not of coadjoint type.
  MatricesFn gamma_override;
  /// F_{a ij}: one m x m matrix per algebra index a.
  MatricesFn curvature;
  double min_q_norm = 0.0;

  static ConnectionPair flat(int m, const LieAlgebraStructure& algebra);
  /// nabla^A with F = dA + [A, A] from the potential.
  static ConnectionPair from_potential(const LinearGaugePotential& p, const LieAlgebraStructure& algebra);
  /// As above with structure constants lambda(q); checked at spot points.
  static ConnectionPair from_potential(const LinearGaugePotential& p, AlgebraFn algebra);

  void check_domain(const VectorXd& q) const;
  LieAlgebraStructure algebra_at(const VectorXd& q) const;
  /// A_{ai}(q), n x m.
  MatrixXd coefficients(const VectorXd& q) const;
  std::vector<MatrixXd> gamma(const VectorXd& q) const;
  std::vector<MatrixXd> field(const VectorXd& q) const;
  bool coadjoint_type() const { return !gamma_override; }
};

/// Basis images a -> s_a of the symmetry algebra in algebra-valued fields on Q.
struct SectionFamily {
  std::vector<SectionField> basis;

  int rank() const { return static_cast<int>(basis.size()); }
  VectorXd operator()(const VectorXd& a, const VectorXd& q) const;
};

/// nabla*_i eta at q for an algebra-valued field eta.
VectorXd dual_derivative(const ConnectionPair& c, const SectionField& eta, int i, const VectorXd& q);

/// [nabla_i, ad*_eta] - ad*_{nabla*_i eta} on basis sections eta = e^a.
CheckReport check_lpvh1(const ConnectionPair& c, const std::vector<VectorXd>& samples, double tol = 1e-6);

/// Curv_ij = d_i Gamma_j - d_j Gamma_i + [Gamma_i, Gamma_j] against -ad*_{F_ij}.
CheckReport check_lpvh2(const ConnectionPair& c, const std::vector<VectorXd>& samples, double tol = 1e-6);

/// Covariant closedness of F: sum over cyclic (i, j, k) of nabla*_k F_ij.
CheckReport check_lpvh3(const ConnectionPair& c, const std::vector<VectorXd>& samples, double tol = 1e-6);

/// max |ad_{nabla* s_a}| over the samples; the detail also reports max |nabla* s_a|.
CheckReport check_ico(const ConnectionPair& c, const SectionFamily& s, const std::vector<VectorXd>& samples,
                      double tol = 1e-6);

/// A_i = -s x ds/dq^i, the solution of s x A_i = ds/dq^i for a unit so(3) section.
LinearGaugePotential solve_ae_so3(const SectionField& s);

/// nabla = nabla_0 - ad*_A with A = -<int_0^1 Ad_{exp(t s_a)} nabla_0* s_a dt>_G and
/// F = F_0 + nabla_0* A + [A, A]. Circle (one section), torus and SO(3) families; circles
/// and tori add pi <Ad_g nabla_0* s_a>_G so that A has zero group mean.
ConnectionPair averaged_connection(const ConnectionPair& c0, const SectionFamily& s, GroupKind kind,
                                   const AveragingOptions& opts = {});

/// Wong's equations for (nabla, F): p_dot = -1/2 p dg^-1 p - y.F(v), q_dot = v, y_dot = -Gamma(v) y.
VectorField generalized_wong_rhs(const ConnectionPair& c, const Metric& g);

/// Gauge Poisson structure of a coadjoint-type pair: fiber tensor lambda(q).y,
/// contracted potential, and y.F(q) in the {p, p} block.
GaugePoissonStructure induced_structure(const ConnectionPair& c);

}  // namespace gpb

#endif  // GPB_BUNDLE_HPP
