#ifndef GPB_GAUGE_HPP
#define GPB_GAUGE_HPP

#include <functional>
#include <vector>

#include "gpb/functions.hpp"
#include "gpb/lie_poisson.hpp"
#include "gpb/report.hpp"

namespace gpb {

/// Gauge 1-form A = A_i(q, y) dq^i on Q x N, stored as a map z = (q, y) -> R^m.
struct GaugeForm {
  int m = 0;
  int n = 0;
  VectorFunction components;
  /// Evaluations with |q| below this radius raise DomainError (0 disables the guard).
  double min_q_norm = 0.0;

  static GaugeForm zero(int m, int n);

  /// f(const VectorX<S>& z) -> VectorX<S> of length m, differentiated exactly.
  template <typename F>
  static GaugeForm from_template(int m, int n, F f, double min_q_norm = 0.0) {
    GaugeForm a;
    a.m = m;
    a.n = n;
    a.components = VectorFunction::from_template(m + n, m, std::move(f));
    a.min_q_norm = min_q_norm;
    return a;
  }

  void check_domain(const VectorXd& q) const;
  VectorXd operator()(const VectorXd& q, const VectorXd& y) const;
  /// m x (m+n) matrix of dA_i/dz.
  MatrixXd jacobian(const VectorXd& q, const VectorXd& y) const;
  /// Per component, the (m+n) x (m+n) Hessian in z.
  std::vector<MatrixXd> hessians(const VectorXd& q, const VectorXd& y) const;
  bool analytic() const { return components.has_jacobian() && components.has_hessians(); }
};

/// Compares supplied partials with central differences at the given points.
CheckReport check_partials(const GaugeForm& a, const std::vector<FiberPoint>& samples,
                           double tol = 1e-6);

/// Linear potential A_i(q, y) = y^a A_{ai}(q) with coefficient matrix A(q) of size n x m.
struct LinearGaugePotential {
  int n = 0;
  int m = 0;
  std::function<MatrixXd(const VectorXd&)> value;
  /// Optional analytic dA/dq^k, k = 0..m-1.
  std::function<std::vector<MatrixXd>(const VectorXd&)> dq;
  GaugeForm contracted;
  double min_q_norm = 0.0;

  static LinearGaugePotential zero(int n, int m);
  /// Coefficients given numerically; derivatives by finite differences.
  static LinearGaugePotential from_function(int n, int m,
                                            std::function<MatrixXd(const VectorXd&)> value,
                                            double min_q_norm = 0.0);

  /// f(const VectorX<S>& q) -> MatrixX<S> of size n x m.
  template <typename F>
  static LinearGaugePotential from_template(int n, int m, F f, double min_q_norm = 0.0) {
    LinearGaugePotential p;
    p.n = n;
    p.m = m;
    p.min_q_norm = min_q_norm;
    p.value = [f](const VectorXd& q) { return MatrixXd(f(q)); };
    p.dq = [f, n, m](const VectorXd& q) {
      const MatrixX<Jet1> r = f(detail::seed_jet1(q));
      std::vector<MatrixXd> out(m, MatrixXd(n, m));
      for (int k = 0; k < m; ++k)
        for (int a = 0; a < n; ++a)
          for (int i = 0; i < m; ++i) out[k](a, i) = detail::jet_gradient_entry(r(a, i), k);
      return out;
    };
    p.contracted = GaugeForm::from_template(
        m, n,
        [f, m, n](const auto& z) {
          using S = typename std::decay_t<decltype(z)>::Scalar;
          const VectorX<S> q = z.head(m);
          const VectorX<S> y = z.tail(n);
          const MatrixX<S> c = f(q);
          return VectorX<S>(c.transpose() * y);
        },
        min_q_norm);
    return p;
  }

  MatrixXd operator()(const VectorXd& q) const;
  std::vector<MatrixXd> derivative(const VectorXd& q) const;
};

/// F_ij = dA_j/dq^i - dA_i/dq^j + Psi^{ab} dA_i/dy^a dA_j/dy^b, antisymmetrized.
MatrixXd field_strength(const GaugeForm& a, const PoissonFiber& fiber, const VectorXd& q,
                        const VectorXd& y);

/// F_{aij} = d_i A_{aj} - d_j A_{ai} + [A_i, A_j]_a, returned as one m x m matrix per a.
std::vector<MatrixXd> linear_field_strength(const LinearGaugePotential& p,
                                            const LieAlgebraStructure& algebra,
                                            const VectorXd& q);

/// hor_i at (q, y) as an (m+n)-vector: (e_i, Psi^{ab} dA_i/dy^a).
VectorXd horizontal_lift(const GaugeForm& a, const PoissonFiber& fiber, int i, const VectorXd& q,
                         const VectorXd& y);

/// Phase-space coordinates x = (p, q, y).
VectorXd pack_state(const VectorXd& p, const VectorXd& q, const VectorXd& y);

/// Gauge Poisson structure on T*Q x N.
struct GaugePoissonStructure {
  int m = 0;
  PoissonFiber fiber;
  GaugeForm gauge;
  /// Replaces the {p, p} block when set (connection data or negative controls).
  std::function<MatrixXd(const VectorXd& q, const VectorXd& y)> field_override;

  GaugePoissonStructure() = default;
  GaugePoissonStructure(PoissonFiber f, GaugeForm a);

  int n() const { return fiber.n; }
  int dim() const { return 2 * m + fiber.n; }
  VectorXd p_of(const VectorXd& x) const { return x.head(m); }
  VectorXd q_of(const VectorXd& x) const { return x.segment(m, m); }
  VectorXd y_of(const VectorXd& x) const { return x.tail(fiber.n); }

  MatrixXd field(const VectorXd& q, const VectorXd& y) const;
};

/// Bracket matrix M with {f, g} = grad f . M . grad g in the order (p, q, y).
MatrixXd assemble_bracket_matrix(const GaugePoissonStructure& s, const VectorXd& x);

/// dM/dx^l for every phase coordinate l. Exact when the gauge form and fiber
/// carry analytic second derivatives.
std::vector<MatrixXd> bracket_matrix_derivative(const GaugePoissonStructure& s, const VectorXd& x);

double poisson_bracket(const GaugePoissonStructure& s, const ScalarFunction& f,
                       const ScalarFunction& g, const VectorXd& x);

int rank_at(const GaugePoissonStructure& s, const VectorXd& x, double tol = 1e-10);

/// {f,{g,h}} + {g,{h,f}} + {h,{f,g}} at x.
double jacobiator(const GaugePoissonStructure& s, const ScalarFunction& f, const ScalarFunction& g,
                  const ScalarFunction& h, const VectorXd& x);

/// Largest |Jacobiator| over all coordinate triples at x.
double coordinate_jacobiator(const GaugePoissonStructure& s, const VectorXd& x);

}  // namespace gpb

#endif  // GPB_GAUGE_HPP
