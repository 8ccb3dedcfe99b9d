#ifndef GPB_DYNAMICS_HPP
#define GPB_DYNAMICS_HPP

#include <memory>
#include <string>
#include <vector>

#include "gpb/gauge.hpp"

namespace gpb {

/// Pseudo-Riemannian metric g_ij(q) on Q.
class Metric {
 public:
  using MatrixFn = std::function<MatrixXd(const VectorXd&)>;
  using DerivativeFn = std::function<std::vector<MatrixXd>(const VectorXd&)>;

  Metric() = default;
  /// constant = true memoizes the inverse (the field is evaluated once at q = 0).
  Metric(int m, MatrixFn g, DerivativeFn dg = {}, bool constant = false);

  static Metric identity(int m);
  static Metric constant_matrix(const MatrixXd& g);

  /// f(const VectorX<S>& q) -> MatrixX<S>; derivatives exact.
  template <typename F>
  static Metric from_template(int m, F f) {
    MatrixFn g = [f](const VectorXd& q) { return MatrixXd(f(q)); };
    DerivativeFn dg = [f, m](const VectorXd& q) {
      const MatrixX<Jet1> r = f(detail::seed_jet1(q));
      std::vector<MatrixXd> out(m, MatrixXd(m, m));
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) out[k](i, j) = detail::jet_gradient_entry(r(i, j), k);
      return out;
    };
    return Metric(m, std::move(g), std::move(dg));
  }

  int dim() const { return m_; }
  bool is_constant() const { return static_cast<bool>(inverse_); }

  MatrixXd operator()(const VectorXd& q) const;
  /// g^{ij}(q); DomainError when singular.
  MatrixXd inverse(const VectorXd& q) const;
  /// dg/dq^k.
  std::vector<MatrixXd> derivative(const VectorXd& q) const;
  /// dg^{-1}/dq^k = -g^{-1} (dg/dq^k) g^{-1}.
  std::vector<MatrixXd> inverse_derivative(const VectorXd& q) const;

 private:
  int m_ = 0;
  MatrixFn g_;
  DerivativeFn dg_;
  std::shared_ptr<const MatrixXd> inverse_;
};

/// H = 1/2 g^{ij}(q) p_i p_j on phase space (p, q, y) with fiber dimension n.
ScalarFunction kinetic_hamiltonian(const Metric& g, int n);

/// The Hamiltonian equations of a gauge Poisson structure, written out blockwise.
VectorField hamiltonian_rhs(const GaugePoissonStructure& s, const ScalarFunction& h);

/// Same field as grad H^T . M (x_dot^k = {H, x^k}); an independent matrix path.
VectorField hamiltonian_rhs_matrix(const GaugePoissonStructure& s, const ScalarFunction& h);

/// Wong's equations for a linear potential, kinetic Hamiltonian and Lie-Poisson fiber.
VectorField wong_rhs(const LinearGaugePotential& p, const LieAlgebraStructure& algebra,
                     const Metric& g);

struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXd> states;
  std::string scenario;
  double step = 0.0;
  std::string method = "rk4";
};

/// Returns false for states outside the domain of the vector field.
using DomainPredicate = std::function<bool(const VectorXd&)>;

/// |q| >= radius for states (p, q, y) with base dimension m.
DomainPredicate min_radius_domain(int m, double radius = 1e-6);

/// Fixed-step RK4 from t = 0 to t_end. Throws IntegrationError carrying the last
/// valid time and state on a domain exit or a non-finite stage.
Trajectory integrate(const VectorField& rhs, const VectorXd& x0, double t_end, double h,
                     const DomainPredicate& in_domain = {});

struct NamedFunction {
  std::string name;
  ScalarFunction f;
};

struct DriftEntry {
  std::string name;
  double initial = 0.0;
  double max_abs_drift = 0.0;
  /// Absolute drift divided by |initial|; equal to the absolute drift when |initial| < 1e-12.
  double max_rel_drift = 0.0;
};

struct ConservationReport {
  std::vector<DriftEntry> entries;
  const DriftEntry& at(const std::string& name) const;
};

ConservationReport monitor(const Trajectory& traj, const std::vector<NamedFunction>& functions);

}  // namespace gpb

#endif  // GPB_DYNAMICS_HPP
