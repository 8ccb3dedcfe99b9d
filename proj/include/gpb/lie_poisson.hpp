#ifndef GPB_LIE_POISSON_HPP
#define GPB_LIE_POISSON_HPP

#include <optional>
#include <string>
#include <vector>

#include "gpb/functions.hpp"
#include "gpb/report.hpp"

namespace gpb {

/// Structure constants lambda^{ab}_c of an n-dimensional Lie algebra, stored densely.
///
/// The fiber Lie-Poisson tensor is Psi^{ab}(y) = lambda^{ab}_c y^c. The coadjoint
/// operator is fixed by requiring that the vertical Hamiltonian field of the
/// linear function <x, y> equals ad*_x y:
///
///   (ad*_x y)_a = -lambda^{ab}_c y^c x^b,
///
/// which for so(3) with lambda^{ab}_c = eps_{abc} gives ad*_x y = y x x. With this
/// choice ad*_x is the transpose of ad_x, so [ad*_x, ad*_z] = -ad*_{[x,z]}.
class LieAlgebraStructure {
 public:
  LieAlgebraStructure() = default;
  explicit LieAlgebraStructure(int n);

  /// Cyclic so(3): {y1,y2} = y3, {y2,y3} = y1, {y3,y1} = y2.
  static LieAlgebraStructure so3();
  static LieAlgebraStructure abelian(int n);
  static LieAlgebraStructure direct_sum(const LieAlgebraStructure& a, const LieAlgebraStructure& b);

  int dim() const { return n_; }

  double operator()(int a, int b, int c) const { return c_[index(a, b, c)]; }
  double& operator()(int a, int b, int c) { return c_[index(a, b, c)]; }

  /// Psi^{ab} = lambda^{ab}_c y^c.
  MatrixXd poisson_tensor(const VectorXd& y) const;
  /// d Psi / d y^c = lambda^{..}_c.
  MatrixXd poisson_tensor_derivative(int c) const;

  /// [x, z]_c = lambda^{ab}_c x_a z_b.
  VectorXd bracket(const VectorXd& x, const VectorXd& z) const;
  /// Matrix of z -> [x, z].
  MatrixXd ad(const VectorXd& x) const;
  /// Matrix of y -> ad*_x y (the transpose of ad(x)).
  MatrixXd ad_star(const VectorXd& x) const;

  bool operator==(const LieAlgebraStructure& other) const = default;

 private:
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * n_ + b) * n_ + c;
  }
  int n_ = 0;
  std::vector<double> c_;
};

struct StructureReport {
  double antisymmetry = 0.0;
  double jacobi = 0.0;
  bool pass = false;
};

StructureReport check_structure_constants(const LieAlgebraStructure& algebra, double tol = 1e-12);

MatrixXd lie_poisson_tensor(const LieAlgebraStructure& algebra, const VectorXd& y);
VectorXd ad_star(const LieAlgebraStructure& algebra, const VectorXd& x, const VectorXd& y);
/// exp(t ad*_x) y0.
VectorXd coad_flow(const LieAlgebraStructure& algebra, const VectorXd& x, double t,
                   const VectorXd& y0);

/// Rotation of y about the unit vector axis by angle; the so(3) coadjoint flow
/// exp(t ad*_s) y equals rotate(y, s, -t) when |s| = 1.
VectorXd rotate(const VectorXd& y, const VectorXd& axis, double angle);

/// A point (q, y) of Q x N.
struct FiberPoint {
  VectorXd q;
  VectorXd y;
};

/// z = (q, y) as one vector.
VectorXd join(const VectorXd& q, const VectorXd& y);

/// Poisson manifold N = R^n with a (possibly q-dependent) tensor Psi(q, y).
/// Casimirs are functions of z = (q, y).
struct PoissonFiber {
  enum class Kind { LiePoisson, General };

  int m = 0;  ///< base dimension (for Casimirs defined on Q x N)
  int n = 0;
  Kind kind = Kind::LiePoisson;
  std::optional<LieAlgebraStructure> algebra;
  std::function<MatrixXd(const VectorXd& q, const VectorXd& y)> psi_fn;
  std::vector<ScalarFunction> casimirs;
  std::vector<std::string> casimir_names;

  static PoissonFiber lie_poisson(int m, const LieAlgebraStructure& algebra);
  static PoissonFiber general(int m, int n,
                              std::function<MatrixXd(const VectorXd&, const VectorXd&)> psi);

  void add_casimir(std::string name, ScalarFunction c);

  MatrixXd psi(const VectorXd& q, const VectorXd& y) const;
  /// d Psi / d y^c for c = 0..n-1.
  std::vector<MatrixXd> psi_dy(const VectorXd& q, const VectorXd& y) const;
  /// d Psi / d q^i for i = 0..m-1 (zero for Lie-Poisson fibers).
  std::vector<MatrixXd> psi_dq(const VectorXd& q, const VectorXd& y) const;
};

/// |y|^2 as a function of z = (q, y).
ScalarFunction squared_norm_casimir(int m, int n);

/// {f, g}_N(q, y) = Psi^{ab} d_a f d_b g for f, g functions of z = (q, y).
double fiber_bracket(const ScalarFunction& f, const ScalarFunction& g, const PoissonFiber& fiber,
                     const VectorXd& q, const VectorXd& y);

/// max over samples of |Psi grad_y C|.
CheckReport is_casimir(const ScalarFunction& c, const PoissonFiber& fiber,
                       const std::vector<FiberPoint>& samples,
                       double tol = 1e-8);

}  // namespace gpb

#endif  // GPB_LIE_POISSON_HPP
