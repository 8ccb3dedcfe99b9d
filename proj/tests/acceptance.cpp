// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// `acceptance N` runs criterion N only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "gpb/builtins.hpp"
#include "gpb/bundle.hpp"
#include "gpb/dynamics.hpp"
#include "gpb/expr.hpp"
#include "gpb/gauge.hpp"
#include "gpb/symmetry.hpp"
#include "scenario.hpp"

using namespace gpb;

namespace {

const LieAlgebraStructure kSo3 = LieAlgebraStructure::so3();

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Points {
 public:
  explicit Points(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Eigen::Vector3d box(double lo = -1.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Eigen::Vector3d shell(double lo, double hi) {
    Eigen::Vector3d v;
    do v = box(); while (v.norm() < 1e-3 || v.norm() > 1.0);
    return v.normalized() * uniform(lo, hi);
  }

 private:
  std::mt19937_64 rng_;
};

VectorXd vec(const Eigen::Vector3d& v) { return VectorXd(v); }

SectionField radial() { return SectionField::from_template(3, 3, builtins::RadialSection{}, builtins::kSingularRadius); }

Eigen::Vector3d wu_yang_closed(const Eigen::Vector3d& q, const Eigen::Vector3d& y) { return q.cross(y) / q.squaredNorm(); }

int cli_exit(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  return code;
}

// 1. Circle average of the hedgehog momentum reproduces the Wu-Yang potential.
Outcome wu_yang_reconstruction() {
  Outcome r;
  AveragingOptions opts;
  opts.circle_nodes = 256;
  const auto a = s1_average(section_circle_action(radial(), kSo3), opts).form;
  Points pts(101);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector3d q = pts.shell(0.5, 3.0);
    const Eigen::Vector3d y = pts.box(-2.0, 2.0);
    worst = std::max(worst, (a(vec(q), vec(y)) - vec(wu_yang_closed(q, y))).cwiseAbs().maxCoeff());
  }
  r.detail = "max componentwise error " + num(worst) + " at 100 points";
  r.require(worst <= 1e-10, "error above 1e-10");
  return r;
}

// 2. Jacobi identity over all coordinate triples.
Outcome jacobi() {
  Outcome r;
  const auto fiber = PoissonFiber::lie_poisson(3, kSo3);
  const GaugePoissonStructure wy = builtins::wu_yang_structure();
  const GaugePoissonStructure generic(fiber, builtins::generic_so3_potential().contracted);
  GaugeForm numeric;
  numeric.m = 3;
  numeric.n = 3;
  numeric.min_q_norm = builtins::kSingularRadius;
  numeric.components = VectorFunction(6, 3, [](const VectorXd& z) {
    return vec(wu_yang_closed(z.head(3), z.tail(3)));
  });
  const GaugePoissonStructure wy_fd(fiber, numeric);
  Points pts(202);
  double analytic = 0.0, fd = 0.0;
  for (int k = 0; k < 10; ++k) {
    const VectorXd x = pack_state(vec(pts.box()), vec(pts.shell(0.5, 3.0)), vec(pts.box(-2.0, 2.0)));
    analytic = std::max({analytic, coordinate_jacobiator(wy, x), coordinate_jacobiator(generic, x)});
    fd = std::max(fd, coordinate_jacobiator(wy_fd, x));
  }
  r.detail = "analytic " + num(analytic) + ", finite differences " + num(fd);
  r.require(analytic <= 1e-10, "analytic jacobiator above 1e-10");
  r.require(fd <= 1e-6, "finite-difference jacobiator above 1e-6");
  return r;
}

// 3. Rank 2m + rank Psi(y).
Outcome rank() {
  Outcome r;
  const auto s = builtins::wu_yang_structure();
  Points pts(303);
  int bad = 0;
  for (int k = 0; k < 20; ++k) {
    const VectorXd p = vec(pts.box()), q = vec(pts.shell(0.5, 3.0));
    Eigen::Vector3d y;
    do y = pts.box(-2.0, 2.0); while (y.norm() < 1e-2);
    if (rank_at(s, pack_state(p, q, vec(y))) != 8) ++bad;
    if (rank_at(s, pack_state(p, q, VectorXd::Zero(3))) != 6) ++bad;
  }
  r.detail = std::to_string(bad) + " mismatches over 20 points with y != 0 and 20 with y = 0";
  r.require(bad == 0, "rank mismatch");
  return r;
}

// 4. Invariance under the generating circle action; a fixed-axis action must fail.
Outcome invariance() {
  Outcome r;
  const auto s = builtins::wu_yang_structure();
  const auto wy = section_circle_action(radial(), kSo3);
  const auto group = sample_group(GroupKind::Circle, 1, 20, 404);
  Points pts(405);
  std::vector<VectorXd> phase;
  for (int k = 0; k < 20; ++k) phase.push_back(pack_state(vec(pts.box()), vec(pts.shell(0.5, 3.0)), vec(pts.box(-2.0, 2.0))));
  const auto good = check_invariance(s, wy, group, phase);
  const auto fixed_axis = section_circle_action(
      SectionField::from_template(3, 3, [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        VectorX<S> v(3);
        v << S(0.0) * q(0), S(0.0), S(1.0);
        return v;
      }),
      kSo3);
  const auto control = check_invariance(s, fixed_axis, group, phase);
  r.detail = "pushforward " + num(good.pushforward.residual) + ", fixed-axis control " +
             num(control.pushforward.residual);
  r.require(good.pushforward.pass && good.pushforward.residual <= 1e-8, "pushforward above 1e-8");
  r.require(!control.pass(), "fixed-axis control passed");
  return r;
}

// 5. First integrals along the pinned trajectory.
Outcome first_integrals() {
  Outcome r;
  const auto s = builtins::wu_yang_structure();
  const auto h = kinetic_hamiltonian(Metric::identity(3), 3);
  const VectorXd x0 = pack_state(Eigen::Vector3d(0.3, 0.1, -0.2), Eigen::Vector3d(1, 0.5, 0.8), Eigen::Vector3d(0.2, -0.4, 0.5));
  const auto traj = integrate(hamiltonian_rhs(s, h), x0, 10.0, 1e-3, min_radius_domain(3));
  const auto quantities = [](const VectorXd& x) {
    const Eigen::Vector3d p = x.head(3), q = x.segment(3, 3), y = x.tail(3);
    return std::array<double, 4>{0.5 * p.squaredNorm(), y.squaredNorm(), q.dot(y) / q.norm(), y(0)};
  };
  const auto first = quantities(traj.states.front());
  std::array<double, 4> drift{};
  for (const auto& x : traj.states) {
    const auto v = quantities(x);
    for (int k = 0; k < 4; ++k) drift[k] = std::max(drift[k], std::abs(v[k] - first[k]) / std::abs(first[k]));
  }
  r.detail = "relative drift H " + num(drift[0]) + ", |y|^2 " + num(drift[1]) + ", <q/|q|,y> " + num(drift[2]) +
             "; y1 " + num(drift[3]) + " over " + std::to_string(traj.states.size()) + " states";
  r.require(traj.states.size() == 10001, "wrong step count");
  r.require(drift[0] <= 1e-8 && drift[1] <= 1e-8 && drift[2] <= 1e-8, "first integral drift above 1e-8");
  r.require(drift[3] > 1e-3, "y1 control did not drift");
  return r;
}

// 6. Vanishing group average of the momentum gradient.
Outcome ac() {
  Outcome r;
  Points pts(606);
  std::vector<FiberPoint> samples;
  for (int k = 0; k < 50; ++k) samples.push_back({vec(pts.shell(0.5, 3.0)), vec(pts.box(-2.0, 2.0))});
  const auto rep = check_ac(section_circle_action(radial(), kSo3), samples);
  r.detail = "max |<dJ/dq>| " + num(rep.residual) + " at 50 samples";
  r.require(rep.pass && rep.residual <= 1e-8, "average above 1e-8");
  return r;
}

// 7. Wong's equations as specializations.
Outcome specialization() {
  Outcome r;
  const Metric curved = Metric::from_template(3, [](const auto& q) {
    using S = typename std::decay_t<decltype(q)>::Scalar;
    MatrixX<S> g = MatrixX<S>::Identity(3, 3);
    g(0, 0) = 1.0 + 0.2 * q(1) * q(1);
    g(1, 1) = 2.0 + 0.1 * q(2) * q(2);
    g(0, 2) = g(2, 0) = 0.1 * q(0);
    return g;
  });
  Points pts(707);
  double ham = 0.0, gen = 0.0;
  for (const auto& p : {builtins::wu_yang_potential(), builtins::generic_so3_potential()}) {
    const GaugePoissonStructure s(PoissonFiber::lie_poisson(3, kSo3), p.contracted);
    const auto c = ConnectionPair::from_potential(p, kSo3);
    for (const auto& g : {Metric::identity(3), curved}) {
      const auto wong = wong_rhs(p, kSo3, g);
      const auto h = hamiltonian_rhs(s, kinetic_hamiltonian(g, 3));
      const auto gw = generalized_wong_rhs(c, g);
      for (int k = 0; k < 100; ++k) {
        const VectorXd x = pack_state(vec(pts.box()), vec(pts.shell(0.5, 3.0)), vec(pts.box(-2.0, 2.0)));
        const VectorXd w = wong(x);
        ham = std::max(ham, (w - h(x)).cwiseAbs().maxCoeff());
        gen = std::max(gen, (w - gw(x)).cwiseAbs().maxCoeff());
      }
    }
  }
  r.detail = "wong vs hamiltonian " + num(ham) + ", generalized vs wong " + num(gen);
  r.require(ham <= 1e-8, "wong vs hamiltonian above 1e-8");
  r.require(gen <= 1e-12, "generalized wong above 1e-12");
  return r;
}

// 8. Averaged connection from a flat chart along the hedgehog section.
Outcome chart_chain() {
  Outcome r;
  const SectionFamily hedgehog{{radial()}};
  const auto c = averaged_connection(ConnectionPair::flat(3, kSo3), hedgehog, GroupKind::Circle);
  Points pts(808);
  std::vector<VectorXd> qs;
  for (int k = 0; k < 10; ++k) qs.push_back(vec(pts.shell(0.5, 3.0)));
  const auto l1 = check_lpvh1(c, qs), l2 = check_lpvh2(c, qs), l3 = check_lpvh3(c, qs);
  const auto ico = check_ico(c, hedgehog, qs);
  double contraction = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector3d q = pts.shell(0.5, 3.0), y = pts.box(-2.0, 2.0);
    contraction = std::max(contraction, (c.coefficients(vec(q)).transpose() * vec(y) - vec(wu_yang_closed(q, y))).norm());
  }
  const auto ae = solve_ae_so3(radial());
  double ae_err = 0.0;
  for (const auto& qv : qs) {
    const Eigen::Vector3d q = qv;
    const Eigen::Vector3d s = q.normalized();
    const MatrixXd a = ae.value(qv);
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d ds = (Eigen::Vector3d::Unit(i) - s * s(i)) / q.norm();
      ae_err = std::max(ae_err, (s.cross(Eigen::Vector3d(a.col(i))) - ds).norm());
    }
  }
  const double worst = std::max({l1.residual, l2.residual, l3.residual, ico.residual});
  r.detail = "lpvh1 " + num(l1.residual) + ", lpvh2 " + num(l2.residual) + ", lpvh3 " + num(l3.residual) + ", ico " +
             num(ico.residual) + ", contraction " + num(contraction) + ", ae " + num(ae_err);
  r.require(l1.pass && l2.pass && l3.pass && ico.pass && worst <= 1e-6, "chart check above 1e-6");
  r.require(contraction <= 1e-8, "contraction above 1e-8");
  r.require(ae_err <= 1e-10, "ae above 1e-10");
  return r;
}

// 9. Haar normalization.
Outcome haar() {
  Outcome r;
  const auto so3 = so3_group_action(3, builtins::IdentityFrame{});
  const auto one = ScalarFunction::from_template(6, [](const auto& z) { return z(0) * 0.0 + 1.0; });
  const double avg = group_average(so3, one, vec(Eigen::Vector3d(0.4, -0.7, 1.1)), vec(Eigen::Vector3d(0.3, 0.2, -0.5)));
  const auto wy = section_circle_action(radial(), kSo3);
  const auto torus = torus_average(torus_action({wy})).form;
  const auto circle = s1_average(wy).form;
  Points pts(909);
  double gap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const VectorXd q = vec(pts.shell(0.5, 3.0)), y = vec(pts.box(-2.0, 2.0));
    gap = std::max(gap, (torus(q, y) - circle(q, y)).cwiseAbs().maxCoeff());
  }
  r.detail = "so(3) average of 1 = " + num(avg) + " (|1 - avg| " + num(std::abs(avg - 1.0)) +
             "), torus r=1 vs circle " + num(gap);
  r.require(std::abs(avg - 1.0) <= 1e-6, "so(3) Haar average of 1 off by more than 1e-6");
  r.require(gap <= 1e-12, "torus r=1 differs from circle by more than 1e-12");
  return r;
}

// 10. Expression goldens and the exit-code contract.
Outcome parser_and_exit_codes() {
  Outcome r;
  const auto eval = [](const std::string& src, double q1 = 0.0) {
    expr::EvalContext ctx{{1, 0}, VectorXd::Constant(1, q1), VectorXd::Zero(1), VectorXd(), 0.0};
    return expr::parse(src, {1, 0}).evaluate(ctx);
  };
  r.require(eval("2+3*4^2") == 50.0, "2+3*4^2 != 50");
  r.require(eval("-2^2") == -4.0, "-2^2 != -4");
  double trig = 0.0;
  for (double x : {-2.3, -0.4, 0.0, 0.9, 1.7, 3.1}) trig = std::max(trig, std::abs(eval("sin(q1)^2 + cos(q1)^2", x) - 1.0));
  r.require(trig <= 1e-15, "trig identity off by " + num(trig));
  for (const std::string bad : {"1 +", "(2", "foo(1)", "q2", "2 ^ q1", "1 $ 2"}) {
    bool threw = false;
    try {
      expr::parse(bad, {1, 0});
    } catch (const expr::ParseError&) {
      threw = true;
    }
    r.require(threw, "no parse error for '" + bad + "'");
  }
  bool domain = false;
  try {
    eval("log(q1)", -1.0);
  } catch (const expr::EvalError&) {
    domain = true;
  }
  r.require(domain, "log of a negative value did not fault");

  const auto dir = std::filesystem::temp_directory_path() / ("gpb_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  cli::json q0 = cli::builtin_scenario("wu-yang");
  q0["simulation"]["initial"]["q"] = {0.0, 0.0, 0.0};
  const std::string parse_cfg = R"({"name": "x", "base_dim": 1, "fiber": {"type": "abelian", "dim": 1},
    "gauge": {"type": "zero"}, "hamiltonian": {"type": "expression", "expr": "p1^2 +"},
    "verification": {"checks": ["jacobi"]}})";
  const std::vector<std::pair<std::vector<std::string>, int>> cases{
      {{"verify", "--config", "wu-yang.json"}, 0},
      {{"verify", "--config", "broken-sign.json"}, 1},
      {{"verify", "--config", (dir / "missing.json").string()}, 2},
      {{"verify", "--config", write("parse.json", parse_cfg)}, 2},
      {{"average", "--config", "wu-yang", "--grid", "0.5:2:0"}, 2},
      {{"simulate", "--config", write("q0.json", q0.dump())}, 3},
  };
  int mismatches = 0;
  for (const auto& [args, expected] : cases) {
    const int got = cli_exit(args);
    if (got != expected) {
      ++mismatches;
      r.require(false, args[0] + " " + args[2] + " exited " + std::to_string(got) + ", expected " + std::to_string(expected));
    }
  }
  std::filesystem::remove_all(dir);
  r.detail = "goldens 50, -4, trig " + num(trig) + "; " + std::to_string(cases.size() - mismatches) + "/" +
             std::to_string(cases.size()) + " exit codes as specified" + (r.pass ? "" : "; " + r.detail);
  return r;
}

// 11. Byte-identical reports for identical config and seed.
Outcome determinism() {
  Outcome r;
  std::string a, b;
  const int ca = cli_exit({"verify", "--config", "wu-yang.json", "--seed", "42"}, &a);
  const int cb = cli_exit({"verify", "--config", "wu-yang.json", "--seed", "42"}, &b);
  r.detail = std::to_string(a.size()) + " bytes per report";
  r.require(ca == 0 && cb == 0, "verify did not pass");
  r.require(!a.empty() && a == b, "reports differ");
  return r;
}

struct Criterion {
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"Wu-Yang reconstruction", wu_yang_reconstruction},
      {"Jacobi identity", jacobi},
      {"rank formula", rank},
      {"invariance", invariance},
      {"first integrals", first_integrals},
      {"averaged momentum gradient", ac},
      {"Wong specializations", specialization},
      {"connection chart chain", chart_chain},
      {"Haar normalization", haar},
      {"parser goldens and exit codes", parser_and_exit_codes},
      {"determinism", determinism},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k) + 1 != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
