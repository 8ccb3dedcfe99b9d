#ifndef GPB_BUILTINS_HPP
#define GPB_BUILTINS_HPP

#include <cmath>

#include "gpb/gauge.hpp"

namespace gpb::builtins {

/// Wu-Yang fields are singular at the origin.
inline constexpr double kSingularRadius = 1e-9;

struct RadialSection {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    using std::sqrt;
    const S r = sqrt(q.squaredNorm());
    return VectorX<S>(q / r);
  }
};

/// (cos q1, sin q1, 0).
struct PlanarSection {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    using std::cos;
    using std::sin;
    VectorX<S> s(3);
    s << cos(q(0)), sin(q(0)), S(0.0);
    return s;
  }
};

/// (sin q2 cos q1, sin q2 sin q1, cos q2).
struct SphericalSection {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    using std::cos;
    using std::sin;
    VectorX<S> s(3);
    s << sin(q(1)) * cos(q(0)), sin(q(1)) * sin(q(0)), cos(q(1));
    return s;
  }
};

/// Constant frame R(q) = I.
struct IdentityFrame {
  template <typename V>
  auto operator()(const V&) const {
    using S = typename V::Scalar;
    return MatrixX<S>(MatrixX<S>::Identity(3, 3));
  }
};

/// Rotation about the z-axis by q1.
struct ZTwistFrame {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    using std::cos;
    using std::sin;
    MatrixX<S> r = MatrixX<S>::Identity(3, 3);
    r(0, 0) = cos(q(0));
    r(0, 1) = -sin(q(0));
    r(1, 0) = sin(q(0));
    r(1, 1) = cos(q(0));
    return r;
  }
};

/// A_i(q, y) = (q x y)_i / |q|^2.
struct WuYangContracted {
  template <typename V>
  auto operator()(const V& z) const {
    using S = typename V::Scalar;
    const VectorX<S> q = z.head(3);
    const VectorX<S> y = z.tail(3);
    return VectorX<S>(cross<S>(q, y) / q.squaredNorm());
  }
};

/// A_{ai}(q) = (e_i x q)_a / |q|^2, so that y^a A_{ai} = (q x y)_i / |q|^2.
struct WuYangCoefficients {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    const S r2 = q.squaredNorm();
    MatrixX<S> a(3, 3);
    for (int i = 0; i < 3; ++i) {
      VectorX<S> e = VectorX<S>::Zero(3);
      e(i) = S(1.0);
      a.col(i) = cross<S>(e, VectorX<S>(q)) / r2;
    }
    return a;
  }
};

/// A smooth potential with no special structure, for Jacobi and consistency checks.
struct GenericSo3Coefficients {
  template <typename V>
  auto operator()(const V& q) const {
    using S = typename V::Scalar;
    using std::sin;
    MatrixX<S> a(3, 3);
    for (int al = 0; al < 3; ++al)
      for (int i = 0; i < 3; ++i)
        a(al, i) = 0.3 * sin(q(i) + double(al)) + 0.2 * q(al) * q((i + 1) % 3) +
                   S(0.1 * (al + 1 - i));
    return a;
  }
};

inline GaugeForm wu_yang_form() {
  return GaugeForm::from_template(3, 3, WuYangContracted{}, kSingularRadius);
}

inline LinearGaugePotential wu_yang_potential() {
  return LinearGaugePotential::from_template(3, 3, WuYangCoefficients{}, kSingularRadius);
}

inline LinearGaugePotential generic_so3_potential() {
  return LinearGaugePotential::from_template(3, 3, GenericSo3Coefficients{});
}

inline GaugePoissonStructure wu_yang_structure() {
  return GaugePoissonStructure(PoissonFiber::lie_poisson(3, LieAlgebraStructure::so3()),
                               wu_yang_form());
}

}  // namespace gpb::builtins

#endif  // GPB_BUILTINS_HPP
