#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "scenario.hpp"

#ifndef GPB_VERSION
#define GPB_VERSION "unknown"
#endif

namespace gpb::cli {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string report;
  std::string grid;
  std::string points;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallel = 1;
};

/// Runs f(i) for i in [0, count) on up to `threads` workers. The exception of the
/// lowest failing index is rethrown so failures do not depend on scheduling.
template <typename F>
void parallel_for(int count, int threads, F f) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += threads) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

/// Evaluates a sample-wise check one sample at a time across workers and keeps the
/// worst report; max is exact, so the verdict does not depend on the thread count.
template <typename T, typename F>
CheckReport per_sample(const std::vector<T>& samples, int threads, F check) {
  std::vector<CheckReport> parts(samples.size());
  parallel_for(static_cast<int>(samples.size()), threads,
               [&](int k) { parts[k] = check(std::vector<T>{samples[k]}); });
  CheckReport worst = parts.front();
  for (const auto& r : parts)
    if (r.residual > worst.residual) worst = r;
  worst.pass = std::all_of(parts.begin(), parts.end(), [](const CheckReport& r) { return r.pass; });
  return worst;
}

json check_json(const CheckReport& r) {
  return json{{"name", r.name}, {"pass", r.pass}, {"residual", r.residual}, {"tolerance", r.tolerance}, {"detail", r.detail}};
}

json provenance(const Scenario& sc, std::uint64_t seed) {
  const AveragingOptions& o = sc.averaging;
  json p{{"config_hash", "fnv1a64:" + hex64(sc.hash)},
         {"seed", seed},
         {"rng", "mt19937_64"},
         {"gauge_evaluation", sc.gauge_evaluation},
         {"versions",
          {{"gpb", GPB_VERSION},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION)},
           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  if (sc.action)
    p["quadrature"] = {{"group", to_string(sc.action->kind)},
                       {"circle_nodes", o.circle_nodes},
                       {"torus_nodes", o.torus_nodes},
                       {"inner_nodes", o.inner_nodes},
                       {"so3_nodes", o.so3_nodes},
                       {"normalize", o.normalize}};
  return p;
}

// ---------------------------------------------------------------------------
// verify

struct Samples {
  std::vector<VectorXd> phase;
  std::vector<FiberPoint> fiber;
  std::vector<VectorXd> base;
};

Samples draw_samples(const Scenario& sc, std::uint64_t seed) {
  Sampler s(seed);
  Samples out;
  const auto& v = sc.verification;
  for (int k = 0; k < v.samples; ++k) {
    const VectorXd p = s.box(sc.m, -1.0, 1.0);
    const VectorXd q = s.shell(sc.m, v.r_lo, v.r_hi);
    const VectorXd y = s.box(sc.n, -1.0, 1.0);
    out.phase.push_back(pack_state(p, q, y));
    out.fiber.push_back({q, y});
    out.base.push_back(q);
  }
  return out;
}

const FiberwiseAction& need_action(const Scenario& sc, const std::string& check) {
  if (!sc.action) throw ConfigError("check '" + check + "' needs an averaged gauge source (a symmetry action)");
  return *sc.action;
}

const ConnectionPair& need_chart(const Scenario& sc, const std::string& check) {
  if (!sc.chart) throw ConfigError("check '" + check + "' needs a 'chart' block");
  return *sc.chart;
}

bool analytic_structure(const Scenario& sc) {
  return sc.structure.gauge.analytic() && !sc.structure.field_override;
}

CheckReport check_jacobi(const Scenario& sc, const Samples& s, int threads) {
  std::vector<double> r(s.phase.size());
  parallel_for(static_cast<int>(r.size()), threads,
               [&](int k) { r[k] = coordinate_jacobiator(sc.structure, s.phase[k]); });
  const double worst = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
  const bool analytic = analytic_structure(sc);
  return CheckReport::from_residual("jacobi", worst, analytic ? 1e-10 : 1e-6,
                                    std::string(analytic ? "analytic" : "finite-difference") +
                                        " partials, max over coordinate triples");
}

CheckReport check_rank(const Scenario& sc, const Samples& s, int threads) {
  std::vector<VectorXd> points = s.phase;
  for (std::size_t k = 0; k < s.phase.size(); ++k) {
    VectorXd x = s.phase[k];
    x.tail(sc.n).setZero();
    points.push_back(x);
  }
  std::vector<int> got(points.size()), want(points.size());
  parallel_for(static_cast<int>(points.size()), threads, [&](int k) {
    const VectorXd q = sc.structure.q_of(points[k]);
    const VectorXd y = sc.structure.y_of(points[k]);
    got[k] = rank_at(sc.structure, points[k]);
    want[k] = 2 * sc.m + matrix_rank(sc.fiber.psi(q, y));
  });
  int mismatches = 0;
  std::set<int> observed;
  for (std::size_t k = 0; k < points.size(); ++k) {
    mismatches += got[k] != want[k];
    observed.insert(got[k]);
  }
  std::string detail = "rank = 2m + rank Psi(y) at " + std::to_string(points.size()) + " points (half with y = 0); observed ranks";
  for (int r : observed) detail += " " + std::to_string(r);
  return CheckReport::from_residual("rank", mismatches, 0.0, detail);
}

CheckReport check_casimirs(const Scenario& sc, const Samples& s) {
  if (sc.fiber.casimirs.empty()) throw ConfigError("check 'casimirs' needs a fiber with registered Casimirs");
  CheckReport worst = CheckReport::from_residual("casimirs", 0.0, 1e-8);
  std::string names;
  for (std::size_t k = 0; k < sc.fiber.casimirs.size(); ++k) {
    const CheckReport r = is_casimir(sc.fiber.casimirs[k], sc.fiber, s.fiber);
    worst.residual = std::max(worst.residual, r.residual);
    names += (k ? ", " : "") + sc.fiber.casimir_names[k];
  }
  worst.pass = worst.residual <= worst.tolerance;
  worst.detail = "max |Psi grad C| for " + names;
  return worst;
}

CheckReport check_wong(const Scenario& sc, const Samples& s, int threads) {
  if (!sc.potential || !sc.algebra) throw ConfigError("check 'wong' needs a linear potential on a Lie-Poisson fiber");
  if (sc.config.value("hamiltonian", json{{"type", "kinetic"}})["type"] != "kinetic")
    throw ConfigError("check 'wong' needs the kinetic Hamiltonian");
  const VectorField wong = wong_rhs(*sc.potential, *sc.algebra, sc.metric);
  const GaugePoissonStructure linear(sc.fiber, sc.potential->contracted);
  const VectorField ham = hamiltonian_rhs(linear, kinetic_hamiltonian(sc.metric, sc.n));
  std::vector<double> r(s.phase.size());
  parallel_for(static_cast<int>(r.size()), threads,
               [&](int k) { r[k] = (wong(s.phase[k]) - ham(s.phase[k])).lpNorm<Eigen::Infinity>(); });
  const double worst = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
  return CheckReport::from_residual("wong", worst, 1e-8, "Wong's equations vs the Hamiltonian field of the kinetic energy");
}

CheckReport check_invariance_cli(const Scenario& sc, const Samples& s, std::uint64_t seed) {
  const FiberwiseAction& act = need_action(sc, "invariance");
  const auto group = sample_group(act.kind, act.rank, sc.verification.group_samples, seed);
  std::vector<VectorXd> phase;
  for (int k = 0; k < sc.verification.group_samples; ++k) phase.push_back(s.phase[k % s.phase.size()]);
  const InvarianceReport r = check_invariance(sc.structure, act, group, phase, sc.averaging);
  std::ostringstream detail;
  detail << "pushforward " << r.pushforward.residual << ", field strength vs its average " << r.curvature.residual
         << " at " << group.size() << " (g, x) pairs";
  CheckReport out = CheckReport::from_residual("invariance", std::max(r.pushforward.residual, r.curvature.residual),
                                               r.pushforward.tolerance, detail.str());
  out.pass = r.pass();
  return out;
}

CheckReport check_first_integrals(const Scenario& sc, json& conservation) {
  if (!sc.simulation) throw ConfigError("check 'first-integrals' needs a 'simulation' block");
  const FiberwiseAction& act = need_action(sc, "first-integrals");
  const SimulationSpec& sim = *sc.simulation;
  const DomainPredicate domain = sim.min_radius > 0.0 ? min_radius_domain(sc.m, sim.min_radius) : DomainPredicate{};
  const Trajectory traj =
      integrate(hamiltonian_rhs(sc.structure, sc.hamiltonian), sc.pack(sim.initial), sim.t_end, sim.step, domain);

  std::vector<NamedFunction> fs{{"H", sc.hamiltonian}};
  for (std::size_t k = 0; k < sc.fiber.casimirs.size(); ++k)
    fs.push_back({sc.fiber.casimir_names[k], sc.fiber.casimirs[k].pullback_tail(2 * sc.m + sc.n)});
  const ConservationReport cons = monitor(traj, fs);
  double worst = 0.0;
  std::ostringstream detail;
  detail << "t_end " << sim.t_end << ", h " << sim.step << ";";
  for (const auto& e : cons.entries) {
    worst = std::max(worst, e.max_rel_drift);
    detail << " " << e.name << " rel drift " << e.max_rel_drift << ";";
    conservation.push_back({{"name", e.name}, {"initial", e.initial}, {"max_abs_drift", e.max_abs_drift},
                            {"max_rel_drift", e.max_rel_drift}});
  }
  for (std::size_t a = 0; a < act.momentum.size(); ++a) {
    const ScalarFunction j = act.momentum[a].pullback_tail(2 * sc.m + sc.n);
    const CheckReport r = first_integral_check(sc.structure, sc.hamiltonian, j, traj, act, sc.averaging,
                                               sim.drift_tolerance);
    const std::string name = act.momentum.size() == 1 ? "J" : "J" + std::to_string(a + 1);
    const ConservationReport jd = monitor(traj, {{name, j}});
    worst = std::max({worst, r.residual, jd.entries[0].max_rel_drift});
    detail << " " << name << ": " << r.detail << ";";
    conservation.push_back({{"name", name}, {"initial", jd.entries[0].initial},
                            {"max_abs_drift", jd.entries[0].max_abs_drift},
                            {"max_rel_drift", jd.entries[0].max_rel_drift}, {"bracket_with_H", r.residual}});
  }
  return CheckReport::from_residual("first-integrals", worst, sim.drift_tolerance, detail.str());
}

CheckReport check_ae(const Scenario& sc, const Samples& s) {
  const SectionFamily* fam = sc.chart_sections ? &*sc.chart_sections : sc.sections ? &*sc.sections : nullptr;
  if (!fam || fam->basis.empty()) throw ConfigError("check 'ae' needs a section");
  const SectionField& sec = fam->basis.front();
  const LinearGaugePotential a = solve_ae_so3(sec);
  double worst = 0.0;
  for (const VectorXd& q : s.base) {
    const VectorXd sq = sec(q);
    const MatrixXd coef = a(q);
    const MatrixXd ds = sec.jacobian(q);
    for (int i = 0; i < sc.m; ++i)
      worst = std::max(worst, (cross<double>(sq, coef.col(i)) - ds.col(i)).lpNorm<Eigen::Infinity>());
  }
  return CheckReport::from_residual("ae", worst, 1e-10, "max |s x A_i - d_i s| for A = -s x ds");
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = build_scenario(load_config(opt.config));
  if (sc.verification.checks.empty()) throw ConfigError("no checks requested in /verification/checks");
  const std::uint64_t seed = opt.seed_set ? opt.seed : sc.verification.seed;
  const Samples samples = draw_samples(sc, seed);
  const int threads = opt.parallel;

  json checks = json::array();
  json conservation = json::array();
  bool all = true;
  for (const std::string& name : sc.verification.checks) {
    CheckReport r;
    if (name == "jacobi") r = check_jacobi(sc, samples, threads);
    else if (name == "rank") r = check_rank(sc, samples, threads);
    else if (name == "casimirs") r = check_casimirs(sc, samples);
    else if (name == "partials") r = check_partials(sc.structure.gauge, samples.fiber);
    else if (name == "wong") r = check_wong(sc, samples, threads);
    else if (name == "invariance") r = check_invariance_cli(sc, samples, seed);
    else if (name == "ac") {
      const FiberwiseAction& act = need_action(sc, name);
      r = per_sample(samples.fiber, threads, [&](const auto& s) { return check_ac(act, s, sc.averaging); });
    } else if (name == "ic1") {
      const FiberwiseAction& act = need_action(sc, name);
      r = per_sample(samples.fiber, threads,
                     [&](const auto& s) { return check_ic1(sc.structure.gauge, act.momentum, sc.fiber, s); });
    }
    else if (name == "first-integrals") r = check_first_integrals(sc, conservation);
    else if (name == "lpvh1") {
      const ConnectionPair& c = need_chart(sc, name);
      r = per_sample(samples.base, threads, [&](const auto& s) { return check_lpvh1(c, s); });
    } else if (name == "lpvh2") {
      const ConnectionPair& c = need_chart(sc, name);
      r = per_sample(samples.base, threads, [&](const auto& s) { return check_lpvh2(c, s); });
    } else if (name == "lpvh3") {
      const ConnectionPair& c = need_chart(sc, name);
      r = per_sample(samples.base, threads, [&](const auto& s) { return check_lpvh3(c, s); });
    }
    else if (name == "ico") {
      if (!sc.chart_sections) throw ConfigError("check 'ico' needs /chart/sections");
      const ConnectionPair& c = need_chart(sc, name);
      r = per_sample(samples.base, threads, [&](const auto& s) { return check_ico(c, *sc.chart_sections, s); });
    } else if (name == "ae") r = check_ae(sc, samples);
    else throw ConfigError("unknown check '" + name + "'");
    r.name = name;
    all = all && r.pass;
    err << (r.pass ? "PASS " : "FAIL ") << name << "  residual " << r.residual << " (tol " << r.tolerance << ")\n";
    checks.push_back(check_json(r));
  }

  json report{{"command", "verify"}, {"scenario", sc.name}, {"pass", all}, {"checks", checks}};
  if (!conservation.empty()) report["conservation"] = conservation;
  json prov = provenance(sc, seed);
  prov["samples"] = sc.verification.samples;
  prov["group_samples"] = sc.verification.group_samples;
  report["provenance"] = prov;
  Output o(opt.out, out);
  *o << report.dump(2) << "\n";
  return all ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// average

std::vector<double> parse_axis(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw ConfigError("grid axis '" + spec + "' must be lo:hi:count");
  double lo = 0.0, hi = 0.0;
  long count = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    count = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("grid axis '" + spec + "' must be lo:hi:count with numeric fields");
  }
  if (count <= 0) throw ConfigError("grid axis '" + spec + "' has no points");
  if (count > 10000) throw ConfigError("grid axis '" + spec + "' has too many points");
  std::vector<double> out;
  for (long k = 0; k < count; ++k) out.push_back(count == 1 ? lo : lo + (hi - lo) * k / double(count - 1));
  return out;
}

/// "lo:hi:count" for every axis, or one such spec per axis separated by commas.
std::vector<VectorXd> grid_points(const std::string& spec, int m) {
  std::vector<std::string> axes_spec;
  std::stringstream ss(spec);
  for (std::string a; std::getline(ss, a, ',');) axes_spec.push_back(a);
  if (axes_spec.size() == 1) axes_spec.assign(m, axes_spec[0]);
  if (static_cast<int>(axes_spec.size()) != m)
    throw ConfigError("grid '" + spec + "' must give 1 or " + std::to_string(m) + " axes");
  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (const auto& a : axes_spec) {
    axes.push_back(parse_axis(a));
    total *= axes.back().size();
  }
  if (total > 1000000) throw ConfigError("grid '" + spec + "' has too many points");
  std::vector<VectorXd> pts;
  for (std::size_t idx = 0; idx < total; ++idx) {
    VectorXd q(m);
    std::size_t r = idx;
    for (int i = m - 1; i >= 0; --i) {
      q(i) = axes[i][r % axes[i].size()];
      r /= axes[i].size();
    }
    pts.push_back(q);
  }
  return pts;
}

std::vector<FiberPoint> read_points(const std::string& path, int m, int n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read points file '" + path + "'");
  std::vector<FiberPoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && (line[0] == 'q' || line[0] == 'y')) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      double v = 0.0;
      const char* b = cell.data();
      while (b < cell.data() + cell.size() && *b == ' ') ++b;
      const auto r = std::from_chars(b, cell.data() + cell.size(), v);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number '" + cell + "'");
      vals.push_back(v);
    }
    if (static_cast<int>(vals.size()) != m + n)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(m + n) + " columns");
    pts.push_back({Eigen::Map<VectorXd>(vals.data(), m), Eigen::Map<VectorXd>(vals.data() + m, n)});
  }
  if (pts.empty()) throw ConfigError("points file '" + path + "' has no points");
  return pts;
}

void write_row(std::ostream& o, const std::vector<double>& row) {
  for (std::size_t k = 0; k < row.size(); ++k) o << (k ? "," : "") << format_double(row[k]);
  o << "\n";
}

int cmd_average(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = build_scenario(load_config(opt.config));
  if (!sc.averaged) throw ConfigError("the 'average' command needs an averaged gauge source");
  if (!opt.grid.empty() && !opt.points.empty()) throw ConfigError("give at most one of --grid and --points");

  std::vector<FiberPoint> pts;
  if (!opt.points.empty()) {
    pts = read_points(opt.points, sc.m, sc.n);
  } else {
    for (const VectorXd& q : grid_points(opt.grid.empty() ? sc.average_grid : opt.grid, sc.m))
      pts.push_back({q, sc.average_y});
  }

  const bool closed = sc.closed_form.has_value();
  const int m = sc.m;
  std::vector<std::vector<double>> rows(pts.size());
  parallel_for(static_cast<int>(pts.size()), opt.parallel, [&](int k) {
    const auto& [q, y] = pts[k];
    const VectorXd a = (*sc.averaged)(q, y);
    std::vector<double> row(q.data(), q.data() + q.size());
    row.insert(row.end(), y.data(), y.data() + y.size());
    row.insert(row.end(), a.data(), a.data() + m);
    if (closed) {
      const VectorXd c = (*sc.closed_form)(q, y);
      row.insert(row.end(), c.data(), c.data() + m);
      for (int i = 0; i < m; ++i) row.push_back(std::abs(a(i) - c(i)));
    }
    rows[k] = std::move(row);
  });

  Output o(opt.out, out);
  std::vector<std::string> header;
  for (int i = 1; i <= m; ++i) header.push_back("q" + std::to_string(i));
  for (int a = 1; a <= sc.n; ++a) header.push_back("y" + std::to_string(a));
  for (int i = 1; i <= m; ++i) header.push_back("A_" + std::to_string(i));
  if (closed) {
    for (int i = 1; i <= m; ++i) header.push_back("closed_A_" + std::to_string(i));
    for (int i = 1; i <= m; ++i) header.push_back("delta_" + std::to_string(i));
  }
  for (std::size_t k = 0; k < header.size(); ++k) *o << (k ? "," : "") << header[k];
  *o << "\n";
  double max_delta = 0.0;
  for (const auto& row : rows) {
    write_row(*o, row);
    if (closed)
      for (int i = 0; i < m; ++i) max_delta = std::max(max_delta, row[row.size() - m + i]);
  }
  err << "averaged " << rows.size() << " points (" << to_string(sc.action->kind) << ")";
  if (closed) err << "; max |delta| vs closed form = " << max_delta;
  err << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = build_scenario(load_config(opt.config));
  if (!sc.simulation) throw ConfigError("the 'simulate' command needs a 'simulation' block");
  const SimulationSpec& sim = *sc.simulation;
  const int dim = 2 * sc.m + sc.n;
  const DomainPredicate domain = sim.min_radius > 0.0 ? min_radius_domain(sc.m, sim.min_radius) : DomainPredicate{};
  Trajectory traj;
  try {
    traj = integrate(hamiltonian_rhs(sc.structure, sc.hamiltonian), sc.pack(sim.initial), sim.t_end, sim.step, domain);
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << " (last valid time " << e.time() << ")\n";
    return kExitRuntime;
  }

  std::vector<NamedFunction> fs{{"H", sc.hamiltonian}};
  for (std::size_t k = 0; k < sc.fiber.casimirs.size(); ++k)
    fs.push_back({sc.fiber.casimir_names[k], sc.fiber.casimirs[k].pullback_tail(dim)});
  if (sc.action)
    for (std::size_t a = 0; a < sc.action->momentum.size(); ++a)
      fs.push_back({sc.action->momentum.size() == 1 ? "J" : "J" + std::to_string(a + 1),
                    sc.action->momentum[a].pullback_tail(dim)});
  for (const auto& mon : sim.monitor) fs.push_back({mon.name, expr::to_scalar_function(mon.e, expr::Layout::Phase)});
  const ConservationReport cons = monitor(traj, fs);

  {
    Output o(opt.out, out);
    *o << "t";
    for (int i = 1; i <= sc.m; ++i) *o << ",p" << i;
    for (int i = 1; i <= sc.m; ++i) *o << ",q" << i;
    for (int a = 1; a <= sc.n; ++a) *o << ",y" << a;
    *o << "\n";
    std::vector<double> row(dim + 1);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      row[0] = traj.times[k];
      for (int i = 0; i < dim; ++i) row[i + 1] = traj.states[k](i);
      write_row(*o, row);
    }
  }

  json entries = json::array();
  for (const auto& e : cons.entries)
    entries.push_back({{"name", e.name}, {"initial", e.initial}, {"max_abs_drift", e.max_abs_drift},
                       {"max_rel_drift", e.max_rel_drift}});
  json report{{"command", "simulate"},
              {"scenario", sc.name},
              {"t_end", sim.t_end},
              {"step", sim.step},
              {"method", traj.method},
              {"rows", traj.states.size()},
              {"conservation", entries},
              {"provenance", provenance(sc, opt.seed_set ? opt.seed : sc.verification.seed)}};
  std::string report_path = opt.report;
  if (report_path.empty() && !opt.out.empty()) {
    std::filesystem::path p(opt.out);
    report_path = (p.parent_path() / p.stem()).string() + ".conservation.json";
  }
  if (report_path.empty()) {
    err << report.dump(2) << "\n";
  } else {
    Output o(report_path, out);
    *o << report.dump(2) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// scenarios

int cmd_scenarios(std::ostream& out) {
  for (const auto& name : builtin_scenario_names()) {
    const json cfg = builtin_scenario(name);
    out << name << "\t" << cfg.value("description", "") << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gauge Poisson structures: averaging, verification and simulation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "Scenario JSON file or builtin scenario name");
    if (needs_config) c->required();
    sub->add_option("--out", opt.out, "Output file (default: stdout)");
    sub->add_option("--seed", opt.seed, "Sampling seed (overrides the config)")->each([&](const std::string&) {
      opt.seed_set = true;
    });
    sub->add_option("--parallel", opt.parallel, "Worker threads for independent evaluations")->check(CLI::Range(1, 256));
  };
  auto* verify = app.add_subcommand("verify", "Run the configured checks and emit a JSON report");
  add_common(verify, true);
  auto* average = app.add_subcommand("average", "Tabulate the averaged gauge form as CSV");
  add_common(average, true);
  average->add_option("--grid", opt.grid, "q-grid: lo:hi:count, or one such spec per axis separated by commas");
  average->add_option("--points", opt.points, "CSV of points q1..qm,y1..yn");
  auto* simulate = app.add_subcommand("simulate", "Integrate the equations of motion; trajectory CSV and conservation JSON");
  add_common(simulate, true);
  simulate->add_option("--report", opt.report, "Conservation JSON (default: <out>.conservation.json, or stderr)");
  auto* scenarios = app.add_subcommand("scenarios", "List builtin scenarios");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*verify) return cmd_verify(opt, out, err);
    if (*average) return cmd_average(opt, out, err);
    if (*simulate) return cmd_simulate(opt, out, err);
    if (*scenarios) return cmd_scenarios(out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << " (last valid time " << e.time() << ")\n";
    return kExitRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace gpb::cli
