#include <doctest.h>

#include <cmath>
#include <cstring>

#include "gpb/expr.hpp"
#include "test_util.hpp"

using namespace gpb;
using namespace gpb::expr;
using testutil::v3;

namespace {

EvalContext ctx(Dims d, Eigen::VectorXd q = {}, Eigen::VectorXd y = {}, double t = 0.0) {
  EvalContext c{d, Eigen::VectorXd::Zero(d.m), Eigen::VectorXd::Zero(d.m), Eigen::VectorXd::Zero(d.n), t};
  if (q.size()) c.q = q;
  if (y.size()) c.y = y;
  return c;
}

double eval0(const std::string& s) { return parse(s, {0, 0}).evaluate(ctx({0, 0})); }

Position parse_error_at(const std::string& s, Dims d) {
  try {
    parse(s, d);
  } catch (const ParseError& e) {
    return e.position();
  }
  FAIL("expected a parse error for '" << s << "'");
  return {};
}

}  // namespace

TEST_CASE("antisymmetric bilinear form") {
  const Dims d{2, 2};
  const auto e = parse("q1*y2 - q2*y1", d);
  const Eigen::VectorXd q = (Eigen::VectorXd(2) << 1, 2).finished();
  const Eigen::VectorXd y = (Eigen::VectorXd(2) << 3, 4).finished();
  CHECK(e.evaluate(ctx(d, q, y)) == -2.0);
}

TEST_CASE("trig identity at random points") {
  const auto e = parse("sin(q1)^2 + cos(q1)^2", {1, 0});
  testutil::Sampler s(7);
  for (int k = 0; k < 10; ++k) {
    const double x = s.uniform(-50.0, 50.0);
    CHECK(std::abs(e.evaluate(ctx({1, 0}, Eigen::VectorXd::Constant(1, x))) - 1.0) <= 1e-15);
  }
}

TEST_CASE("literals and norms") {
  CHECK(eval0("2.5") == 2.5);
  CHECK(eval0("1e-3") == 1e-3);
  CHECK(eval0(".5E+1") == 5.0);
  const auto e = parse("sqrt(q1^2+q2^2+q3^2)", {3, 0});
  CHECK(e.evaluate(ctx({3, 0}, v3(1, 2, 2))) == 3.0);
}

TEST_CASE("precedence goldens") {
  CHECK(eval0("2+3*4^2") == 50.0);
  CHECK(eval0("-2^2") == -4.0);
  CHECK(eval0("(-2)^2") == 4.0);
  CHECK(eval0("2^3^2") == 512.0);
  CHECK(eval0("2^-1") == 0.5);
  CHECK(eval0("8/4/2") == 1.0);
  CHECK(eval0("8-4-2") == 2.0);
  CHECK(eval0("--3") == 3.0);
  CHECK(eval0("2*-3") == -6.0);
  CHECK(eval0("atan2(1, 1)") == std::atan2(1.0, 1.0));
  CHECK(eval0("min(3, -1) + max(3, -1)") == 2.0);
  CHECK(eval0("abs(-4) + exp(0) + log(1) + tan(0)") == 5.0);
}

TEST_CASE("variable bindings") {
  const Dims d{2, 1};
  EvalContext c = ctx(d);
  c.p << 5, 7;
  c.t = 0.25;
  CHECK(parse("p2 - p1 + t", d).evaluate(c) == 2.25);
  CHECK(parse("q2", d).uses(VarKind::Q));
  CHECK_FALSE(parse("q2", d).uses(VarKind::Y));

  c.y = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(parse("y1", d).evaluate(c), DimensionError);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse("q4", {3, 3}), ParseError);
  CHECK_THROWS_WITH_AS(parse("q4", {3, 3}), doctest::Contains("out of range"), ParseError);
  CHECK_THROWS_AS(parse("y3", {3, 2}), ParseError);
  CHECK_THROWS_AS(parse("q0", {3, 2}), ParseError);
  CHECK_THROWS_WITH_AS(parse("foo + 1", {1, 1}), doctest::Contains("unknown identifier"), ParseError);
  CHECK_THROWS_WITH_AS(parse("frob(1)", {1, 1}), doctest::Contains("unknown function"), ParseError);
  CHECK_THROWS_WITH_AS(parse("sin(1, 2)", {1, 1}), doctest::Contains("argument"), ParseError);
  CHECK_THROWS_WITH_AS(parse("atan2(1)", {1, 1}), doctest::Contains("argument"), ParseError);
  CHECK_THROWS_WITH_AS(parse("q1^q1", {1, 1}), doctest::Contains("exponent"), ParseError);

  const Position a = parse_error_at("1 +\n  2 * )", {0, 0});
  CHECK(a.line == 2);
  CHECK(a.column == 7);
  const Position b = parse_error_at("(1 + 2", {0, 0});
  CHECK(b.line == 1);
  CHECK(b.column == 7);
  const Position c = parse_error_at("1 $ 2", {0, 0});
  CHECK(c.column == 3);
  CHECK_THROWS_AS(parse("", {0, 0}), ParseError);
  CHECK_THROWS_AS(parse("1e", {0, 0}), ParseError);
  CHECK_THROWS_AS(parse("1 2", {0, 0}), ParseError);
}

TEST_CASE("parse errors are config errors") { CHECK_THROWS_AS(parse("q9", {1, 0}), ConfigError); }

TEST_CASE("domain faults raise evaluation errors with location") {
  CHECK_THROWS_WITH_AS(eval0("1/0"), doctest::Contains("division by zero"), EvalError);
  CHECK_THROWS_AS(eval0("log(-1)"), EvalError);
  CHECK_THROWS_AS(eval0("log(0)"), EvalError);
  CHECK_THROWS_AS(eval0("sqrt(-1)"), EvalError);
  CHECK_THROWS_AS(eval0("0^-1"), EvalError);
  CHECK_THROWS_AS(eval0("(-8)^0.5"), EvalError);
  CHECK_THROWS_AS(eval0("exp(1000)"), EvalError);
  CHECK(eval0("(-2)^3") == -8.0);

  try {
    parse("q1 + 2 *\n (3 / (q1 - 1))", {1, 0}).evaluate(ctx({1, 0}, Eigen::VectorXd::Ones(1)));
    FAIL("expected an evaluation error");
  } catch (const EvalError& e) {
    CHECK(e.position().line == 2);
    CHECK(e.position().column == 3);
    CHECK(e.fragment() == "3 / (q1 - 1)");
  }
}

TEST_CASE("canonical printer round-trips") {
  const Dims d{3, 3};
  const char* cases[] = {
      "q1*y2 - q2*y1",       "2+3*4^2",          "-2^2",          "(-2)^2",          "2^3^2",
      "(2^3)^2",             "y1/(y2*y3)",       "8/(4/2)",       "8-(4-2)",         "-(q1+q2)*y3",
      "2^-1",                "--q1",             "q1*-q2",        "0.1+1e-300",      "atan2(q1, -y2)",
      "min(max(q1,q2),t)",   "sqrt(q1^2+q2^2+q3^2)",             "exp(-t/3)*sin(p1)", "1/3",
  };
  for (const char* s : cases) {
    const Expression e1 = parse(s, d);
    const std::string printed = e1.print();
    const Expression e2 = parse(printed, d);
    CAPTURE(s);
    CAPTURE(printed);
    CHECK(e1 == e2);
    CHECK(e2.print() == printed);
  }
  CHECK(parse("0.1", d).print() == "0.10000000000000001");
  CHECK(parse("2*(3+4)", d).print() == "2 * (3 + 4)");
  CHECK_FALSE(parse("1+2", d) == parse("2+1", d));
}

TEST_CASE("evaluation is bit-deterministic") {
  const Dims d{3, 3};
  const auto e = parse("exp(-t/3)*sin(q1*y2 - q2*y1) + log(1 + q3^2) / sqrt(1 + y1^2)", d);
  testutil::Sampler s(11);
  for (int k = 0; k < 20; ++k) {
    EvalContext c = ctx(d, s.box(3), s.box(3), s.uniform(0, 5));
    const double a = e.evaluate(c);
    const double b = parse(e.print(), d).evaluate(c);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }
}

TEST_CASE("expression fields") {
  const Dims d{3, 3};
  const auto f = to_scalar_function(parse("q1*y2 - q2*y1", d), Layout::Fiber);
  CHECK(f.dim() == 6);
  Eigen::VectorXd z(6);
  z << 1, 2, 0, 3, 4, 0;
  CHECK(f(z) == -2.0);
  Eigen::VectorXd g_ref(6);
  g_ref << 4, -3, 0, -2, 1, 0;
  CHECK((f.gradient(z) - g_ref).norm() <= 1e-8);

  const auto h = to_scalar_function(parse("(p1^2 + p2^2 + p3^2)/2 + y1", d), Layout::Phase);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
  x << 1, 2, 3, 0, 0, 0, 5, 0, 0;
  CHECK(h(x) == 12.0);

  const auto v = to_vector_function({parse("q2", d), parse("-q1", d), parse("0", d)}, Layout::Base);
  CHECK((v(v3(1, 2, 3)) - v3(2, -1, 0)).norm() == 0.0);
  CHECK((v.jacobian(v3(1, 2, 3)).row(0).transpose() - v3(0, 1, 0)).norm() <= 1e-8);

  CHECK_THROWS_AS(to_scalar_function(parse("t", d), Layout::Phase), ConfigError);
  CHECK_THROWS_AS(to_scalar_function(parse("p1", d), Layout::Fiber), ConfigError);
  CHECK_THROWS_AS(to_scalar_function(parse("y1", d), Layout::Base), ConfigError);
}
