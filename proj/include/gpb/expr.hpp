#ifndef GPB_EXPR_HPP
#define GPB_EXPR_HPP

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gpb/errors.hpp"
#include "gpb/functions.hpp"

namespace gpb::expr {

struct Dims {
  int m = 0;
  int n = 0;
};

/// 1-based line and column in the source text.
struct Position {
  int line = 1;
  int column = 1;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, Position pos);
  Position position() const { return pos_; }

 private:
  Position pos_;
};

/// Domain fault during evaluation; carries the location and text of the failing sub-expression.
class EvalError : public EvaluationError {
 public:
  EvalError(const std::string& what, Position pos, std::string fragment);
  Position position() const { return pos_; }
  const std::string& fragment() const { return fragment_; }

 private:
  Position pos_;
  std::string fragment_;
};

enum class VarKind { Q, P, Y, T };

struct Node;

struct EvalContext {
  Dims dims;
  VectorXd q;
  VectorXd p;
  VectorXd y;
  double t = 0.0;

  /// Throws DimensionError when a binding length differs from the declaration.
  void validate() const;
};

/// Immutable parsed expression; copies share the tree.
class Expression {
 public:
  Expression() = default;

  double evaluate(const EvalContext& ctx) const;
  /// Canonical text: minimal parentheses, literals printed with %.17g.
  std::string print() const;
  const std::string& source() const { return source_; }
  Dims dims() const { return dims_; }
  bool uses(VarKind kind) const;
  bool empty() const { return !root_; }

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  friend Expression parse(std::string_view src, Dims dims);
  std::shared_ptr<const Node> root_;
  std::string source_;
  Dims dims_;
};

Expression parse(std::string_view src, Dims dims);

inline double evaluate(const Expression& e, const EvalContext& ctx) { return e.evaluate(ctx); }

/// Which variables a scalar-function argument vector carries, in order.
enum class Layout {
  Base,   // q
  Fiber,  // (q, y)
  Phase,  // (p, q, y)
};

/// Wraps an expression as a scalar field; derivatives go through central differences.
ScalarFunction to_scalar_function(const Expression& e, Layout layout);

/// Component-wise wrapper for an array of expressions sharing one layout.
VectorFunction to_vector_function(const std::vector<Expression>& es, Layout layout);

}  // namespace gpb::expr

#endif  // GPB_EXPR_HPP
