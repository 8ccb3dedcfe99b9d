#ifndef GPB_ERRORS_HPP
#define GPB_ERRORS_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gpb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A field could not be evaluated (non-finite value, failed quadrature node).
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Eigen::VectorXd point = {})
      : Error(what), point_(std::move(point)) {}
  const Eigen::VectorXd& point() const { return point_; }

 private:
  Eigen::VectorXd point_;
};

/// A point lies outside the domain of a singular field (e.g. q = 0 for Wu-Yang).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Time stepping produced a non-finite state or left the domain.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t, Eigen::VectorXd last_state)
      : Error(what), t_(t), last_state_(std::move(last_state)) {}
  double time() const { return t_; }
  const Eigen::VectorXd& last_state() const { return last_state_; }

 private:
  double t_;
  Eigen::VectorXd last_state_;
};

/// An action or section violates a hypothesis (periodicity, commuting flows, unit norm).
class InvalidActionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpb

#endif  // GPB_ERRORS_HPP
