#include "gpb/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gpb::expr {

namespace {

std::string at(Position p) { return std::to_string(p.line) + ":" + std::to_string(p.column); }

}  // namespace

ParseError::ParseError(const std::string& what, Position pos)
    : ConfigError("parse error at " + at(pos) + ": " + what), pos_(pos) {}

EvalError::EvalError(const std::string& what, Position pos, std::string fragment)
    : EvaluationError("evaluation error at " + at(pos) + " in '" + fragment + "': " + what),
      pos_(pos),
      fragment_(std::move(fragment)) {}

enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Atan2, Min, Max };

struct Node {
  Op op = Op::Num;
  double value = 0.0;
  VarKind var = VarKind::T;
  int index = 0;  // 0-based
  Fn fn = Fn::Sin;
  std::vector<std::shared_ptr<const Node>> args;
  Position pos;
  std::string fragment;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"sin", Fn::Sin, 1},   {"cos", Fn::Cos, 1},     {"tan", Fn::Tan, 1}, {"exp", Fn::Exp, 1},
    {"log", Fn::Log, 1},   {"sqrt", Fn::Sqrt, 1},   {"abs", Fn::Abs, 1}, {"atan2", Fn::Atan2, 2},
    {"min", Fn::Min, 2},   {"max", Fn::Max, 2},
};

const FnInfo& info(Fn fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f;
  return kFunctions[0];
}

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  Position pos;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t{Tok::End, {}, 0.0, pos_, i_};
      if (i_ >= s_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = s_[i_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        lex_number(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        t.kind = Tok::Ident;
        t.text = std::string(s_.substr(i_, j - i_));
        advance(j - i_);
      } else {
        switch (c) {
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          case '^': t.kind = Tok::Caret; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case ',': t.kind = Tok::Comma; break;
          default: throw ParseError(std::string("unexpected character '") + c + "'", pos_);
        }
        t.text = std::string(1, c);
        advance(1);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance(std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (s_[i_] == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else {
        ++pos_.column;
      }
      ++i_;
    }
  }

  void skip_space() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance(1);
  }

  void lex_number(Token& t) {
    std::size_t j = i_;
    auto digits = [&] {
      std::size_t k = 0;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j, ++k;
      return k;
    };
    std::size_t nd = digits();
    if (j < s_.size() && s_[j] == '.') {
      ++j;
      nd += digits();
    }
    if (nd == 0) throw ParseError("malformed number", pos_);
    if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      const std::size_t before = k;
      while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
      if (k == before) throw ParseError("malformed exponent in number", pos_);
      j = k;
    }
    t.kind = Tok::Num;
    t.text = std::string(s_.substr(i_, j - i_));
    t.value = std::strtod(t.text.c_str(), nullptr);
    if (!std::isfinite(t.value)) throw ParseError("numeric literal overflows", pos_);
    advance(j - i_);
  }

  std::string_view s_;
  std::size_t i_ = 0;
  Position pos_;
};

bool is_constant(const Node& n) {
  if (n.op == Op::Var) return false;
  for (const auto& a : n.args)
    if (!is_constant(*a)) return false;
  return true;
}

// Grammar, loosest first:
//   sum   := prod (('+' | '-') prod)*
//   prod  := unary (('*' | '/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?        right-assoc; exponent must be constant
//   atom  := number | ident | ident '(' args ')' | '(' sum ')'
class Parser {
 public:
  Parser(std::string_view src, Dims dims) : src_(src), dims_(dims), toks_(Lexer(src).run()) {}

  NodePtr run() {
    NodePtr e = sum();
    if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
    return e;
  }

 private:
  const Token& peek() const { return toks_[k_]; }
  const Token& take() { return toks_[k_++]; }
  std::size_t end_offset() const { return k_ > 0 ? toks_[k_ - 1].offset + toks_[k_ - 1].text.size() : 0; }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      const std::string got = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
      throw ParseError(std::string("expected ") + what + ", got " + got, peek().pos);
    }
    ++k_;
  }

  NodePtr make(Node n, const Token& first) {
    n.pos = first.pos;
    n.fragment = std::string(src_.substr(first.offset, end_offset() - first.offset));
    return std::make_shared<const Node>(std::move(n));
  }

  NodePtr binary(Op op, NodePtr l, NodePtr r, const Token& first) {
    Node n;
    n.op = op;
    n.args = {std::move(l), std::move(r)};
    return make(std::move(n), first);
  }

  NodePtr sum() {
    const Token& first = peek();
    NodePtr l = prod();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Op op = take().kind == Tok::Plus ? Op::Add : Op::Sub;
      l = binary(op, l, prod(), first);
    }
    return l;
  }

  NodePtr prod() {
    const Token& first = peek();
    NodePtr l = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Op op = take().kind == Tok::Star ? Op::Mul : Op::Div;
      l = binary(op, l, unary(), first);
    }
    return l;
  }

  NodePtr unary() {
    const Token& first = peek();
    if (first.kind == Tok::Minus) {
      ++k_;
      Node n;
      n.op = Op::Neg;
      n.args = {unary()};
      return make(std::move(n), first);
    }
    return power();
  }

  NodePtr power() {
    const Token& first = peek();
    NodePtr base = atom();
    if (peek().kind != Tok::Caret) return base;
    const Token& caret = take();
    NodePtr ex = unary();
    if (!is_constant(*ex)) throw ParseError("exponent must be a numeric constant", caret.pos);
    return binary(Op::Pow, base, ex, first);
  }

  NodePtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Num: {
        ++k_;
        Node n;
        n.op = Op::Num;
        n.value = t.value;
        return make(std::move(n), t);
      }
      case Tok::LParen: {
        ++k_;
        NodePtr e = sum();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        ++k_;
        return peek().kind == Tok::LParen ? call(t) : variable(t);
      case Tok::End:
        throw ParseError("unexpected end of input", t.pos);
      default:
        throw ParseError("unexpected '" + t.text + "'", t.pos);
    }
  }

  NodePtr call(const Token& name) {
    const FnInfo* f = nullptr;
    for (const auto& c : kFunctions)
      if (name.text == c.name) f = &c;
    if (!f) throw ParseError("unknown function '" + name.text + "'", name.pos);
    expect(Tok::LParen, "'('");
    Node n;
    n.op = Op::Call;
    n.fn = f->fn;
    if (peek().kind != Tok::RParen) {
      n.args.push_back(sum());
      while (peek().kind == Tok::Comma) {
        ++k_;
        n.args.push_back(sum());
      }
    }
    expect(Tok::RParen, "')'");
    if (static_cast<int>(n.args.size()) != f->arity)
      throw ParseError(name.text + " expects " + std::to_string(f->arity) + " argument(s), got " +
                           std::to_string(n.args.size()),
                       name.pos);
    return make(std::move(n), name);
  }

  NodePtr variable(const Token& t) {
    Node n;
    n.op = Op::Var;
    if (t.text == "t") {
      n.var = VarKind::T;
      return make(std::move(n), t);
    }
    const char c = t.text[0];
    const bool indexed = t.text.size() > 1 && (c == 'q' || c == 'p' || c == 'y') &&
                         t.text.find_first_not_of("0123456789", 1) == std::string::npos;
    if (!indexed) throw ParseError("unknown identifier '" + t.text + "'", t.pos);
    if (t.text[1] == '0' || t.text.size() > 9)
      throw ParseError("variable index out of range in '" + t.text + "'", t.pos);
    const int idx = std::stoi(t.text.substr(1));
    const int bound = c == 'y' ? dims_.n : dims_.m;
    if (idx > bound)
      throw ParseError("variable index out of range: '" + t.text + "' with " + (c == 'y' ? "n = " : "m = ") +
                           std::to_string(bound),
                       t.pos);
    n.var = c == 'q' ? VarKind::Q : c == 'p' ? VarKind::P : VarKind::Y;
    n.index = idx - 1;
    return make(std::move(n), t);
  }

  std::string_view src_;
  Dims dims_;
  std::vector<Token> toks_;
  std::size_t k_ = 0;
};

[[noreturn]] void fault(const Node& n, const std::string& what) { throw EvalError(what, n.pos, n.fragment); }

double checked(const Node& n, double v) {
  if (!std::isfinite(v)) fault(n, "non-finite result");
  return v;
}

double eval(const Node& n, const EvalContext& c) {
  switch (n.op) {
    case Op::Num:
      return n.value;
    case Op::Var:
      switch (n.var) {
        case VarKind::Q: return c.q(n.index);
        case VarKind::P: return c.p(n.index);
        case VarKind::Y: return c.y(n.index);
        case VarKind::T: return c.t;
      }
      return 0.0;
    case Op::Neg:
      return -eval(*n.args[0], c);
    case Op::Add:
      return checked(n, eval(*n.args[0], c) + eval(*n.args[1], c));
    case Op::Sub:
      return checked(n, eval(*n.args[0], c) - eval(*n.args[1], c));
    case Op::Mul:
      return checked(n, eval(*n.args[0], c) * eval(*n.args[1], c));
    case Op::Div: {
      const double a = eval(*n.args[0], c);
      const double b = eval(*n.args[1], c);
      if (b == 0.0) fault(n, "division by zero");
      return checked(n, a / b);
    }
    case Op::Pow: {
      const double a = eval(*n.args[0], c);
      const double b = eval(*n.args[1], c);
      if (a == 0.0 && b < 0.0) fault(n, "zero raised to a negative power");
      if (a < 0.0 && b != std::floor(b)) fault(n, "negative base with non-integer exponent");
      return checked(n, std::pow(a, b));
    }
    case Op::Call: {
      const double a = eval(*n.args[0], c);
      switch (n.fn) {
        case Fn::Sin: return checked(n, std::sin(a));
        case Fn::Cos: return checked(n, std::cos(a));
        case Fn::Tan: return checked(n, std::tan(a));
        case Fn::Exp: return checked(n, std::exp(a));
        case Fn::Log:
          if (a <= 0.0) fault(n, "logarithm of a non-positive number");
          return std::log(a);
        case Fn::Sqrt:
          if (a < 0.0) fault(n, "square root of a negative number");
          return std::sqrt(a);
        case Fn::Abs: return std::fabs(a);
        case Fn::Atan2: return std::atan2(a, eval(*n.args[1], c));
        case Fn::Min: return std::fmin(a, eval(*n.args[1], c));
        case Fn::Max: return std::fmax(a, eval(*n.args[1], c));
      }
      return 0.0;
    }
  }
  return 0.0;
}

int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, bool paren, std::string& out) {
  if (paren) out += '(';
  print_node(child, out);
  if (paren) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Num: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Op::Var:
      if (n.var == VarKind::T) {
        out += 't';
      } else {
        out += n.var == VarKind::Q ? 'q' : n.var == VarKind::P ? 'p' : 'y';
        out += std::to_string(n.index + 1);
      }
      return;
    case Op::Neg:
      out += '-';
      print_child(*n.args[0], precedence(*n.args[0]) < 3, out);
      return;
    case Op::Call:
      out += info(n.fn).name;
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ')';
      return;
    case Op::Pow:
      print_child(*n.args[0], precedence(*n.args[0]) <= 4, out);
      out += '^';
      print_child(*n.args[1], precedence(*n.args[1]) < 3, out);
      return;
    default: {
      const int p = precedence(n);
      const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
      print_child(*n.args[0], precedence(*n.args[0]) < p, out);
      out += sym;
      print_child(*n.args[1], precedence(*n.args[1]) <= p, out);
      return;
    }
  }
}

bool same(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  switch (a.op) {
    case Op::Num:
      if (std::memcmp(&a.value, &b.value, sizeof(double)) != 0) return false;
      break;
    case Op::Var:
      if (a.var != b.var || a.index != b.index) return false;
      break;
    case Op::Call:
      if (a.fn != b.fn) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same(*a.args[i], *b.args[i])) return false;
  return true;
}

bool uses_var(const Node& n, VarKind kind) {
  if (n.op == Op::Var) return n.var == kind;
  for (const auto& a : n.args)
    if (uses_var(*a, kind)) return true;
  return false;
}

}  // namespace

void EvalContext::validate() const {
  auto check = [](const char* name, Eigen::Index got, int want) {
    if (got != want)
      throw DimensionError(std::string("binding ") + name + " has length " + std::to_string(got) + ", expected " +
                           std::to_string(want));
  };
  check("q", q.size(), dims.m);
  check("p", p.size(), dims.m);
  check("y", y.size(), dims.n);
}

Expression parse(std::string_view src, Dims dims) {
  if (dims.m < 0 || dims.n < 0) throw ConfigError("negative dimension declaration");
  Expression e;
  e.root_ = Parser(src, dims).run();
  e.source_ = std::string(src);
  e.dims_ = dims;
  return e;
}

double Expression::evaluate(const EvalContext& ctx) const {
  if (!root_) throw ConfigError("evaluating an empty expression");
  if (ctx.dims.m != dims_.m || ctx.dims.n != dims_.n)
    throw DimensionError("context dimensions differ from the parse declaration");
  ctx.validate();
  return eval(*root_, ctx);
}

std::string Expression::print() const {
  std::string out;
  if (root_) print_node(*root_, out);
  return out;
}

bool Expression::uses(VarKind kind) const { return root_ && uses_var(*root_, kind); }

bool operator==(const Expression& a, const Expression& b) {
  if (!a.root_ || !b.root_) return !a.root_ && !b.root_;
  return same(*a.root_, *b.root_);
}

namespace {

int layout_dim(Layout layout, Dims d) {
  switch (layout) {
    case Layout::Base: return d.m;
    case Layout::Fiber: return d.m + d.n;
    case Layout::Phase: return 2 * d.m + d.n;
  }
  return 0;
}

void check_layout(const Expression& e, Layout layout) {
  if (e.uses(VarKind::T)) throw ConfigError("'" + e.source() + "': t is not allowed in a time-independent field");
  if (layout != Layout::Phase && e.uses(VarKind::P))
    throw ConfigError("'" + e.source() + "': momenta p are not available in this field");
  if (layout == Layout::Base && e.uses(VarKind::Y))
    throw ConfigError("'" + e.source() + "': fiber variables y are not available in this field");
}

EvalContext unpack(Layout layout, Dims d, const VectorXd& x) {
  EvalContext c{d, VectorXd::Zero(d.m), VectorXd::Zero(d.m), VectorXd::Zero(d.n), 0.0};
  switch (layout) {
    case Layout::Base:
      c.q = x;
      break;
    case Layout::Fiber:
      c.q = x.head(d.m);
      c.y = x.tail(d.n);
      break;
    case Layout::Phase:
      c.p = x.head(d.m);
      c.q = x.segment(d.m, d.m);
      c.y = x.tail(d.n);
      break;
  }
  return c;
}

}  // namespace

ScalarFunction to_scalar_function(const Expression& e, Layout layout) {
  check_layout(e, layout);
  const Dims d = e.dims();
  const int dim = layout_dim(layout, d);
  return ScalarFunction(dim, [e, layout, d, dim](const VectorXd& x) {
    if (x.size() != dim) throw DimensionError("expression field expects dimension " + std::to_string(dim));
    return e.evaluate(unpack(layout, d, x));
  });
}

VectorFunction to_vector_function(const std::vector<Expression>& es, Layout layout) {
  if (es.empty()) throw ConfigError("empty expression array");
  const Dims d = es.front().dims();
  for (const auto& e : es) {
    check_layout(e, layout);
    if (e.dims().m != d.m || e.dims().n != d.n) throw ConfigError("expression array with mixed dimensions");
  }
  const int dim = layout_dim(layout, d);
  const int out = static_cast<int>(es.size());
  return VectorFunction(dim, out, [es, layout, d, dim, out](const VectorXd& x) {
    if (x.size() != dim) throw DimensionError("expression field expects dimension " + std::to_string(dim));
    const EvalContext c = unpack(layout, d, x);
    VectorXd v(out);
    for (int k = 0; k < out; ++k) v(k) = es[k].evaluate(c);
    return v;
  });
}

}  // namespace gpb::expr
