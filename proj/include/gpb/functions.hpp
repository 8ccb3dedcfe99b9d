#ifndef GPB_FUNCTIONS_HPP
#define GPB_FUNCTIONS_HPP

#include <functional>
#include <vector>

#include "gpb/numerics.hpp"

#include <unsupported/Eigen/AutoDiff>

namespace gpb {

/// First- and second-order forward-mode scalars used to differentiate the
/// scalar-templated builtin fields exactly.
using Jet1 = Eigen::AutoDiffScalar<VectorXd>;
using Jet2 = Eigen::AutoDiffScalar<VectorX<Jet1>>;

namespace detail {

inline VectorX<Jet1> seed_jet1(const VectorXd& x) {
  const Eigen::Index d = x.size();
  VectorX<Jet1> out(d);
  for (Eigen::Index i = 0; i < d; ++i) out(i) = Jet1(x(i), d, i);
  return out;
}

inline VectorX<Jet2> seed_jet2(const VectorXd& x) {
  const Eigen::Index d = x.size();
  VectorX<Jet2> out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    VectorX<Jet1> outer(d);
    for (Eigen::Index j = 0; j < d; ++j) outer(j) = Jet1(i == j ? 1.0 : 0.0, VectorXd::Zero(d));
    out(i) = Jet2(Jet1(x(i), d, i), outer);
  }
  return out;
}

inline double jet_gradient_entry(const Jet1& v, Eigen::Index i) {
  return v.derivatives().size() > i ? v.derivatives()(i) : 0.0;
}

inline double jet_hessian_entry(const Jet2& v, Eigen::Index i, Eigen::Index j) {
  if (v.derivatives().size() <= i) return 0.0;
  const Jet1& di = v.derivatives()(i);
  return di.derivatives().size() > j ? di.derivatives()(j) : 0.0;
}

}  // namespace detail

/// Scalar field on R^dim with optional analytic gradient and Hessian; missing
/// derivatives fall back to central differences.
class ScalarFunction {
 public:
  using ValueFn = std::function<double(const VectorXd&)>;
  using GradientFn = std::function<VectorXd(const VectorXd&)>;
  using HessianFn = std::function<MatrixXd(const VectorXd&)>;

  ScalarFunction() = default;
  ScalarFunction(int dim, ValueFn value, GradientFn gradient = {}, HessianFn hessian = {});

  /// Wraps a generic callable `f(const VectorX<S>&) -> S`; gradient and Hessian
  /// come from forward-mode differentiation.
  template <typename F>
  static ScalarFunction from_template(int dim, F f) {
    ValueFn value = [f](const VectorXd& x) { return static_cast<double>(f(x)); };
    GradientFn grad = [f, dim](const VectorXd& x) {
      const Jet1 r = f(detail::seed_jet1(x));
      VectorXd g(dim);
      for (int i = 0; i < dim; ++i) g(i) = detail::jet_gradient_entry(r, i);
      return g;
    };
    HessianFn hess = [f, dim](const VectorXd& x) {
      const Jet2 r = f(detail::seed_jet2(x));
      MatrixXd h(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) h(i, j) = detail::jet_hessian_entry(r, i, j);
      return h;
    };
    return ScalarFunction(dim, std::move(value), std::move(grad), std::move(hess));
  }

  static ScalarFunction coordinate(int dim, int index);
  static ScalarFunction constant(int dim, double c);

  int dim() const { return dim_; }
  explicit operator bool() const { return static_cast<bool>(value_); }

  double operator()(const VectorXd& x) const;
  VectorXd gradient(const VectorXd& x, const DiffScheme& scheme = {}) const;
  MatrixXd hessian(const VectorXd& x, const DiffScheme& scheme = {}) const;

  bool has_gradient() const { return static_cast<bool>(gradient_); }
  bool has_hessian() const { return static_cast<bool>(hessian_); }

  /// x -> f(x.tail(dim)) on a space of dimension total_dim.
  ScalarFunction pullback_tail(int total_dim) const;

  ScalarFunction operator-() const;
  friend ScalarFunction operator+(const ScalarFunction& a, const ScalarFunction& b);

 private:
  int dim_ = 0;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

/// Vector field R^in -> R^out with optional analytic Jacobian and per-output Hessians.
class VectorFunction {
 public:
  using ValueFn = std::function<VectorXd(const VectorXd&)>;
  using JacobianFn = std::function<MatrixXd(const VectorXd&)>;
  using HessiansFn = std::function<std::vector<MatrixXd>(const VectorXd&)>;

  VectorFunction() = default;
  VectorFunction(int in_dim, int out_dim, ValueFn value, JacobianFn jacobian = {},
                 HessiansFn hessians = {});

  /// Wraps a generic callable `f(const VectorX<S>&) -> VectorX<S>`.
  template <typename F>
  static VectorFunction from_template(int in_dim, int out_dim, F f) {
    ValueFn value = [f](const VectorXd& x) { return VectorXd(f(x)); };
    JacobianFn jac = [f, in_dim, out_dim](const VectorXd& x) {
      const VectorX<Jet1> r = f(detail::seed_jet1(x));
      MatrixXd j(out_dim, in_dim);
      for (int k = 0; k < out_dim; ++k)
        for (int i = 0; i < in_dim; ++i) j(k, i) = detail::jet_gradient_entry(r(k), i);
      return j;
    };
    HessiansFn hess = [f, in_dim, out_dim](const VectorXd& x) {
      const VectorX<Jet2> r = f(detail::seed_jet2(x));
      std::vector<MatrixXd> out(out_dim, MatrixXd(in_dim, in_dim));
      for (int k = 0; k < out_dim; ++k)
        for (int i = 0; i < in_dim; ++i)
          for (int j = 0; j < in_dim; ++j) out[k](i, j) = detail::jet_hessian_entry(r(k), i, j);
      return out;
    };
    return VectorFunction(in_dim, out_dim, std::move(value), std::move(jac), std::move(hess));
  }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  explicit operator bool() const { return static_cast<bool>(value_); }

  VectorXd operator()(const VectorXd& x) const;
  MatrixXd jacobian(const VectorXd& x, const DiffScheme& scheme = {}) const;
  std::vector<MatrixXd> hessians(const VectorXd& x, const DiffScheme& scheme = {}) const;

  bool has_jacobian() const { return static_cast<bool>(jacobian_); }
  bool has_hessians() const { return static_cast<bool>(hessians_); }

  /// Component k as a scalar function.
  ScalarFunction component(int k) const;

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  ValueFn value_;
  JacobianFn jacobian_;
  HessiansFn hessians_;
};

}  // namespace gpb

#endif  // GPB_FUNCTIONS_HPP
