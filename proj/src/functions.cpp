#include "gpb/functions.hpp"

namespace gpb {

namespace {

// Nested differences lose roughly half the digits of the inner ones.
constexpr double kNestedStep = 1e-4;

}  // namespace

ScalarFunction::ScalarFunction(int dim, ValueFn value, GradientFn gradient, HessianFn hessian)
    : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {}

ScalarFunction ScalarFunction::coordinate(int dim, int index) {
  if (index < 0 || index >= dim) throw DimensionError("coordinate index out of range");
  return ScalarFunction(
      dim, [index](const VectorXd& x) { return x(index); },
      [dim, index](const VectorXd&) { return VectorXd(VectorXd::Unit(dim, index)); },
      [dim](const VectorXd&) { return MatrixXd(MatrixXd::Zero(dim, dim)); });
}

ScalarFunction ScalarFunction::constant(int dim, double c) {
  return ScalarFunction(
      dim, [c](const VectorXd&) { return c; },
      [dim](const VectorXd&) { return VectorXd(VectorXd::Zero(dim)); },
      [dim](const VectorXd&) { return MatrixXd(MatrixXd::Zero(dim, dim)); });
}

double ScalarFunction::operator()(const VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError("scalar function evaluated at point of wrong size");
  return value_(x);
}

VectorXd ScalarFunction::gradient(const VectorXd& x, const DiffScheme& scheme) const {
  if (x.size() != dim_) throw DimensionError("scalar function gradient at point of wrong size");
  if (gradient_) return gradient_(x);
  return gradient_fd(value_, x, scheme);
}

MatrixXd ScalarFunction::hessian(const VectorXd& x, const DiffScheme& scheme) const {
  if (x.size() != dim_) throw DimensionError("scalar function Hessian at point of wrong size");
  if (hessian_) return hessian_(x);
  if (gradient_) return hessian_fd(gradient_, x, scheme);
  const DiffScheme inner = scheme;
  const DiffScheme outer{std::max(scheme.step, kNestedStep)};
  auto grad = [this, inner](const VectorXd& at) { return gradient_fd(value_, at, inner); };
  return hessian_fd(grad, x, outer);
}

ScalarFunction ScalarFunction::pullback_tail(int total_dim) const {
  if (total_dim < dim_) throw DimensionError("pullback to a smaller space");
  const int offset = total_dim - dim_;
  const ScalarFunction self = *this;
  ValueFn value = [self, offset](const VectorXd& x) { return self(x.tail(self.dim())); };
  GradientFn grad = [self, offset, total_dim](const VectorXd& x) {
    VectorXd g = VectorXd::Zero(total_dim);
    g.tail(self.dim()) = self.gradient(x.tail(self.dim()));
    return g;
  };
  HessianFn hess;
  if (has_hessian() || has_gradient()) {
    hess = [self, offset, total_dim](const VectorXd& x) {
      MatrixXd h = MatrixXd::Zero(total_dim, total_dim);
      h.bottomRightCorner(self.dim(), self.dim()) = self.hessian(x.tail(self.dim()));
      return h;
    };
  }
  if (!has_gradient()) {
    // Keep the restricted finite-difference path (fewer samples, same accuracy).
    return ScalarFunction(total_dim, std::move(value), std::move(grad), {});
  }
  return ScalarFunction(total_dim, std::move(value), std::move(grad), std::move(hess));
}

ScalarFunction ScalarFunction::operator-() const {
  const ScalarFunction self = *this;
  GradientFn grad;
  HessianFn hess;
  if (has_gradient()) grad = [self](const VectorXd& x) { return VectorXd(-self.gradient(x)); };
  if (has_hessian()) hess = [self](const VectorXd& x) { return MatrixXd(-self.hessian(x)); };
  return ScalarFunction(
      dim_, [self](const VectorXd& x) { return -self(x); }, std::move(grad), std::move(hess));
}

ScalarFunction operator+(const ScalarFunction& a, const ScalarFunction& b) {
  if (a.dim() != b.dim()) throw DimensionError("sum of scalar functions of different dimension");
  ScalarFunction::GradientFn grad;
  ScalarFunction::HessianFn hess;
  if (a.has_gradient() && b.has_gradient())
    grad = [a, b](const VectorXd& x) { return VectorXd(a.gradient(x) + b.gradient(x)); };
  if (a.has_hessian() && b.has_hessian())
    hess = [a, b](const VectorXd& x) { return MatrixXd(a.hessian(x) + b.hessian(x)); };
  return ScalarFunction(
      a.dim(), [a, b](const VectorXd& x) { return a(x) + b(x); }, std::move(grad),
      std::move(hess));
}

VectorFunction::VectorFunction(int in_dim, int out_dim, ValueFn value, JacobianFn jacobian,
                               HessiansFn hessians)
    : in_dim_(in_dim), out_dim_(out_dim), value_(std::move(value)),
      jacobian_(std::move(jacobian)), hessians_(std::move(hessians)) {}

VectorXd VectorFunction::operator()(const VectorXd& x) const {
  if (x.size() != in_dim_) throw DimensionError("vector function evaluated at point of wrong size");
  VectorXd v = value_(x);
  if (v.size() != out_dim_) throw DimensionError("vector function returned value of wrong size");
  return v;
}

MatrixXd VectorFunction::jacobian(const VectorXd& x, const DiffScheme& scheme) const {
  if (x.size() != in_dim_) throw DimensionError("vector function Jacobian at point of wrong size");
  if (jacobian_) return jacobian_(x);
  return jacobian_fd(value_, x, scheme);
}

std::vector<MatrixXd> VectorFunction::hessians(const VectorXd& x, const DiffScheme& scheme) const {
  if (hessians_) return hessians_(x);
  // Differentiate the Jacobian rows; nested step when the Jacobian itself is FD.
  const DiffScheme outer = jacobian_ ? scheme : DiffScheme{std::max(scheme.step, kNestedStep)};
  const VectorFunction self = *this;
  auto flat_jac = [self, scheme](const VectorXd& at) {
    const MatrixXd j = self.jacobian(at, scheme);
    return VectorXd(Eigen::Map<const VectorXd>(j.data(), j.size()));
  };
  const MatrixXd d = jacobian_fd(flat_jac, x, outer);  // (out*in) x in, column-major rows
  std::vector<MatrixXd> out(out_dim_, MatrixXd(in_dim_, in_dim_));
  for (int k = 0; k < out_dim_; ++k) {
    for (int i = 0; i < in_dim_; ++i)
      for (int j = 0; j < in_dim_; ++j) out[k](i, j) = d(i * out_dim_ + k, j);
    out[k] = 0.5 * (out[k] + out[k].transpose()).eval();
  }
  return out;
}

ScalarFunction VectorFunction::component(int k) const {
  if (k < 0 || k >= out_dim_) throw DimensionError("component index out of range");
  const VectorFunction self = *this;
  ScalarFunction::GradientFn grad;
  ScalarFunction::HessianFn hess;
  if (has_jacobian())
    grad = [self, k](const VectorXd& x) { return VectorXd(self.jacobian(x).row(k).transpose()); };
  if (has_hessians()) hess = [self, k](const VectorXd& x) { return self.hessians(x)[k]; };
  return ScalarFunction(
      in_dim_, [self, k](const VectorXd& x) { return self(x)(k); }, std::move(grad),
      std::move(hess));
}

}  // namespace gpb
