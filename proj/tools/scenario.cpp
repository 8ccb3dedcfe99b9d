#include "scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "embedded.hpp"
#include "gpb/builtins.hpp"
#include "schema.hpp"

namespace gpb::cli {

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& f : embedded::kScenarios) names.emplace_back(f.name);
  std::sort(names.begin(), names.end());
  return names;
}

json builtin_scenario(const std::string& name) {
  for (const auto& f : embedded::kScenarios)
    if (name == f.name) return json::parse(f.text);
  throw ConfigError("unknown builtin scenario '" + name + "'");
}

const json& scenario_schema() {
  static const json schema = json::parse(embedded::kSchema);
  return schema;
}

json load_config(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  json config;
  std::error_code ec;
  if (fs::is_regular_file(path_or_name, ec)) {
    std::ifstream in(path_or_name);
    if (!in) throw ConfigError("cannot read config file '" + path_or_name + "'");
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("malformed JSON in '" + path_or_name + "': " + e.what());
    }
  } else {
    std::string stem = fs::path(path_or_name).filename().string();
    if (stem.size() > 5 && stem.ends_with(".json")) stem.resize(stem.size() - 5);
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), stem) == names.end())
      throw ConfigError("config file '" + path_or_name + "' not found and not a builtin scenario name");
    config = builtin_scenario(stem);
  }
  const auto errors = validate_schema(scenario_schema(), config);
  if (!errors.empty()) {
    std::string msg = "config does not match the scenario schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return config;
}

double Sampler::uniform(double lo, double hi) {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

VectorXd Sampler::box(int dim, double lo, double hi) {
  VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = uniform(lo, hi);
  return v;
}

VectorXd Sampler::shell(int dim, double lo, double hi) {
  VectorXd v;
  do {
    v = box(dim, -1.0, 1.0);
  } while (v.norm() < 1e-3 || v.norm() > 1.0);
  return v.normalized() * uniform(lo, hi);
}

namespace {

std::string expr_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

expr::Expression parse_expr(const json& v, expr::Dims dims, const std::string& where) {
  try {
    return expr::parse(expr_text(v), dims);
  } catch (const expr::ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

VectorXd read_vector(const json& v, int expected, const std::string& where) {
  if (static_cast<int>(v.size()) != expected)
    throw ConfigError(where + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(expected));
  VectorXd out(expected);
  for (int i = 0; i < expected; ++i) out(i) = v[i].get<double>();
  return out;
}

LieAlgebraStructure custom_algebra(const json& f) {
  if (!f.contains("dim")) throw ConfigError("/fiber: custom fiber needs 'dim'");
  const int n = f["dim"].get<int>();
  LieAlgebraStructure l(n);
  for (const auto& e : f.value("structure_constants", json::array())) {
    const int a = e[0].get<int>() - 1;
    const int b = e[1].get<int>() - 1;
    const int c = e[2].get<int>() - 1;
    if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n)
      throw ConfigError("/fiber/structure_constants: index out of range in " + e.dump());
    l(a, b, c) = e[3].get<double>();
    l(b, a, c) = -e[3].get<double>();
  }
  const StructureReport r = check_structure_constants(l, 1e-12);
  if (!r.pass) {
    std::ostringstream msg;
    msg << "/fiber/structure_constants violate the Jacobi identity (residual " << r.jacobi << ")";
    throw ConfigError(msg.str());
  }
  return l;
}

void build_fiber(Scenario& sc, const json& f) {
  const std::string type = f["type"];
  const int m = sc.m;
  if (type == "so3") {
    if (f.value("dim", 3) != 3) throw ConfigError("/fiber: so3 has dimension 3");
    sc.algebra = LieAlgebraStructure::so3();
  } else if (type == "so3-sum") {
    const int k = f.value("copies", 2);
    LieAlgebraStructure l = LieAlgebraStructure::so3();
    for (int c = 1; c < k; ++c) l = LieAlgebraStructure::direct_sum(l, LieAlgebraStructure::so3());
    sc.algebra = l;
  } else if (type == "abelian") {
    if (!f.contains("dim")) throw ConfigError("/fiber: abelian fiber needs 'dim'");
    sc.algebra = LieAlgebraStructure::abelian(f["dim"].get<int>());
  } else {
    sc.algebra = custom_algebra(f);
  }
  sc.n = sc.algebra->dim();
  sc.fiber = PoissonFiber::lie_poisson(m, *sc.algebra);
  if (type == "so3") {
    sc.fiber.add_casimir("|y|^2", squared_norm_casimir(m, 3));
  } else if (type == "so3-sum") {
    for (int b = 0; b < sc.n / 3; ++b)
      sc.fiber.add_casimir("|y" + std::to_string(b + 1) + "|^2",
                           ScalarFunction::from_template(m + sc.n, [m, b](const auto& z) {
                             return z.segment(m + 3 * b, 3).squaredNorm();
                           }));
  } else if (type == "abelian") {
    for (int a = 0; a < sc.n; ++a) sc.fiber.add_casimir("y" + std::to_string(a + 1), ScalarFunction::coordinate(m + sc.n, m + a));
  }
}

Metric build_metric(const Scenario& sc, const json& g) {
  const std::string type = g["type"];
  const int m = sc.m;
  if (type == "identity") return Metric::identity(m);
  const json& entries = g.value("entries", json::array());
  const expr::Dims dims{m, sc.n};
  std::vector<std::vector<expr::Expression>> cells(m, std::vector<expr::Expression>(m));
  bool constant = true;
  std::vector<std::vector<bool>> present(m, std::vector<bool>(m, false));
  if (type == "diagonal") {
    if (static_cast<int>(entries.size()) != m) throw ConfigError("/metric/entries: need one entry per base dimension");
    for (int i = 0; i < m; ++i) {
      cells[i][i] = parse_expr(entries[i], dims, "/metric/entries/" + std::to_string(i));
      present[i][i] = true;
    }
  } else {
    if (static_cast<int>(entries.size()) != m) throw ConfigError("/metric/entries: need an m x m array");
    for (int i = 0; i < m; ++i) {
      if (!entries[i].is_array() || static_cast<int>(entries[i].size()) != m)
        throw ConfigError("/metric/entries/" + std::to_string(i) + ": need " + std::to_string(m) + " entries");
      for (int j = 0; j < m; ++j) {
        cells[i][j] = parse_expr(entries[i][j], dims, "/metric/entries/" + std::to_string(i) + "/" + std::to_string(j));
        present[i][j] = true;
      }
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (present[i][j]) {
        if (cells[i][j].uses(expr::VarKind::P) || cells[i][j].uses(expr::VarKind::Y) || cells[i][j].uses(expr::VarKind::T))
          throw ConfigError("/metric: entries may depend on q only");
        constant = constant && !cells[i][j].uses(expr::VarKind::Q);
      }
  auto eval = [cells, present, m, dims](const VectorXd& q) {
    expr::EvalContext c{dims, q, VectorXd::Zero(m), VectorXd::Zero(dims.n), 0.0};
    MatrixXd g = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (present[i][j]) g(i, j) = cells[i][j].evaluate(c);
    return g;
  };
  if (constant) {
    const MatrixXd g0 = eval(VectorXd::Zero(m));
    if ((g0 - g0.transpose()).norm() > 0.0) throw ConfigError("/metric: matrix must be symmetric");
    return Metric::constant_matrix(g0);
  }
  return Metric(m, eval);
}

/// Places an so(3) section into block components [offset, offset + 3) of an n-vector.
SectionField embed_block(const SectionField& inner, int n, int offset) {
  const int m = inner.m;
  SectionField s;
  s.m = m;
  s.n = n;
  s.min_q_norm = inner.min_q_norm;
  s.value = VectorFunction(
      m, n,
      [inner, n, offset](const VectorXd& q) {
        VectorXd out = VectorXd::Zero(n);
        out.segment(offset, 3) = inner(q);
        return out;
      },
      [inner, n, m, offset](const VectorXd& q) {
        MatrixXd out = MatrixXd::Zero(n, m);
        out.middleRows(offset, 3) = inner.jacobian(q);
        return out;
      },
      [inner, n, m, offset](const VectorXd& q) {
        std::vector<MatrixXd> out(n, MatrixXd::Zero(m, m));
        const auto h = inner.hessians(q);
        for (int a = 0; a < 3; ++a) out[offset + a] = h[a];
        return out;
      });
  return s;
}

SectionField build_section(const Scenario& sc, const json& v, const std::string& where) {
  if (v.is_string()) {
    std::string name = v.get<std::string>();
    if (const auto colon = name.find(':'); colon != std::string::npos) {
      int block = 0;
      try {
        block = std::stoi(name.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError(where + ": malformed block index in '" + name + "'");
      }
      if (sc.n % 3 != 0 || block < 1 || block > sc.n / 3)
        throw ConfigError(where + ": '" + name + "' names no so(3) block of the fiber");
      Scenario one;
      one.m = sc.m;
      one.n = 3;
      const SectionField inner = build_section(one, json(name.substr(0, colon)), where);
      return embed_block(inner, sc.n, 3 * (block - 1));
    }
    if (sc.n != 3) throw ConfigError(where + ": builtin sections need an so(3) fiber (use name:block for sums)");
    if (name == "radial") {
      if (sc.m != 3) throw ConfigError(where + ": the radial section needs base dimension 3");
      return SectionField::from_template(3, 3, builtins::RadialSection{}, builtins::kSingularRadius);
    }
    if (name == "planar") return SectionField::from_template(sc.m, 3, builtins::PlanarSection{});
    if (name == "spherical") {
      if (sc.m < 2) throw ConfigError(where + ": the spherical section needs base dimension >= 2");
      return SectionField::from_template(sc.m, 3, builtins::SphericalSection{});
    }
    if (name == "constant-e3")
      return SectionField::from_template(sc.m, 3, [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        VectorX<S> s = VectorX<S>::Zero(3);
        s(2) = S(1.0);
        return s;
      });
    throw ConfigError(where + ": unknown builtin section '" + name + "'");
  }
  if (static_cast<int>(v.size()) != sc.n)
    throw ConfigError(where + ": need one expression per fiber component (" + std::to_string(sc.n) + ")");
  std::vector<expr::Expression> es;
  for (std::size_t a = 0; a < v.size(); ++a) {
    es.push_back(parse_expr(v[a], {sc.m, sc.n}, where + "/" + std::to_string(a)));
    if (es.back().uses(expr::VarKind::P) || es.back().uses(expr::VarKind::Y) || es.back().uses(expr::VarKind::T))
      throw ConfigError(where + ": sections may depend on q only");
  }
  SectionField s;
  s.m = sc.m;
  s.n = sc.n;
  s.value = expr::to_vector_function(es, expr::Layout::Base);
  return s;
}

SectionFamily build_sections(const Scenario& sc, const json& arr, const std::string& where) {
  SectionFamily fam;
  for (std::size_t k = 0; k < arr.size(); ++k)
    fam.basis.push_back(build_section(sc, arr[k], where + "/" + std::to_string(k)));
  return fam;
}

SectionFamily frame_sections(const std::string& frame) {
  SectionFamily fam;
  for (int k = 0; k < 3; ++k) {
    if (frame == "z-twist")
      fam.basis.push_back(SectionField::from_template(3, 3, [k](const auto& q) {
        return VectorX<typename std::decay_t<decltype(q)>::Scalar>(builtins::ZTwistFrame{}(q).col(k));
      }));
    else
      fam.basis.push_back(SectionField::from_template(3, 3, [k](const auto& q) {
        return VectorX<typename std::decay_t<decltype(q)>::Scalar>(builtins::IdentityFrame{}(q).col(k));
      }));
  }
  return fam;
}

GroupKind group_kind(const std::string& g, bool so3_fiber) {
  if (g == "circle") return so3_fiber ? GroupKind::So3Rotations : GroupKind::Circle;
  if (g == "torus") return GroupKind::Torus;
  return GroupKind::So3Group;
}

void build_averaged_gauge(Scenario& sc, const json& g) {
  if (!g.contains("group")) throw ConfigError("/gauge: averaged gauge needs 'group'");
  const std::string group = g["group"];
  const bool so3_fiber = sc.n == 3 && sc.algebra && *sc.algebra == LieAlgebraStructure::so3();
  AveragingOptions& o = sc.averaging;
  if (g.contains("nodes")) o.circle_nodes = o.torus_nodes = o.so3_nodes = g["nodes"].get<int>();
  if (g.contains("inner_nodes")) o.inner_nodes = g["inner_nodes"].get<int>();
  o.normalize = g.value("normalize", false);

  const bool has_sections = g.contains("sections");
  const bool has_momenta = g.contains("momenta");
  if (group == "so3") {
    if (!so3_fiber || sc.m != 3) throw ConfigError("/gauge: the so3 group average needs an so3 fiber over a 3-dimensional base");
    if (has_sections || has_momenta) throw ConfigError("/gauge: the so3 group action is given by 'frame'");
    const std::string frame = g.value("frame", "identity");
    sc.action = frame == "z-twist" ? so3_group_action(3, builtins::ZTwistFrame{})
                                   : so3_group_action(3, builtins::IdentityFrame{});
    sc.sections = frame_sections(frame);
  } else {
    if (has_sections == has_momenta) throw ConfigError("/gauge: give exactly one of 'sections' or 'momenta'");
    std::vector<FiberwiseAction> circles;
    if (has_sections) {
      if (!sc.algebra) throw ConfigError("/gauge: section actions need a Lie-Poisson fiber");
      sc.sections = build_sections(sc, g["sections"], "/gauge/sections");
      for (const auto& s : sc.sections->basis) circles.push_back(section_circle_action(s, *sc.algebra));
    } else {
      const auto& ms = g["momenta"];
      for (std::size_t k = 0; k < ms.size(); ++k) {
        const auto e = parse_expr(ms[k], {sc.m, sc.n}, "/gauge/momenta/" + std::to_string(k));
        try {
          circles.push_back(momentum_circle_action(expr::to_scalar_function(e, expr::Layout::Fiber), sc.fiber));
        } catch (const ConfigError& err) {
          throw ConfigError("/gauge/momenta/" + std::to_string(k) + ": " + err.what());
        }
      }
    }
    if (group == "circle") {
      if (circles.size() != 1) throw ConfigError("/gauge: the circle group takes exactly one section or momentum");
      sc.action = circles.front();
    } else {
      sc.action = torus_action(circles);
    }
  }

  sc.averaged = general_average_gauge_form(*sc.action, o).form;
  if (group == "circle" && has_sections && so3_fiber) {
    const bool radial = g["sections"][0].is_string() && g["sections"][0] == "radial";
    sc.closed_form = radial ? builtins::wu_yang_form() : so3_section_closed_form(sc.sections->basis.front());
  }
  sc.min_q_norm = sc.action->min_q_norm;
  const bool use_closed = g.value("closed_form", true) && sc.closed_form;
  sc.structure = GaugePoissonStructure(sc.fiber, use_closed ? *sc.closed_form : *sc.averaged);
  sc.gauge_evaluation = use_closed ? "closed-form" : "quadrature";
}

void build_gauge(Scenario& sc, const json& g) {
  const std::string type = g["type"];
  const int m = sc.m;
  const int n = sc.n;
  const bool so3_fiber = n == 3 && sc.algebra && *sc.algebra == LieAlgebraStructure::so3();
  if (type == "zero") {
    sc.potential = LinearGaugePotential::zero(n, m);
    sc.structure = GaugePoissonStructure(sc.fiber, GaugeForm::zero(m, n));
    sc.gauge_evaluation = "explicit";
  } else if (type == "wu-yang" || type == "generic-so3") {
    if (!so3_fiber || m != 3) throw ConfigError("/gauge: " + type + " needs an so3 fiber over a 3-dimensional base");
    if (type == "wu-yang") {
      sc.potential = builtins::wu_yang_potential();
      sc.structure = GaugePoissonStructure(sc.fiber, builtins::wu_yang_form());
      sc.min_q_norm = builtins::kSingularRadius;
    } else {
      sc.potential = builtins::generic_so3_potential();
      sc.structure = GaugePoissonStructure(sc.fiber, sc.potential->contracted);
    }
    sc.gauge_evaluation = "analytic";
  } else if (type == "linear") {
    if (!g.contains("coefficients")) throw ConfigError("/gauge: linear gauge needs 'coefficients'");
    const json& c = g["coefficients"];
    if (static_cast<int>(c.size()) != n) throw ConfigError("/gauge/coefficients: need one row per fiber index");
    std::vector<std::vector<expr::Expression>> cells(n);
    for (int a = 0; a < n; ++a) {
      if (static_cast<int>(c[a].size()) != m)
        throw ConfigError("/gauge/coefficients/" + std::to_string(a) + ": need one expression per base index");
      for (int i = 0; i < m; ++i) {
        const std::string where = "/gauge/coefficients/" + std::to_string(a) + "/" + std::to_string(i);
        cells[a].push_back(parse_expr(c[a][i], {m, n}, where));
        if (cells[a].back().uses(expr::VarKind::P) || cells[a].back().uses(expr::VarKind::Y) ||
            cells[a].back().uses(expr::VarKind::T))
          throw ConfigError(where + ": coefficients may depend on q only");
      }
    }
    sc.potential = LinearGaugePotential::from_function(n, m, [cells, m, n](const VectorXd& q) {
      const expr::EvalContext ctx{{m, n}, q, VectorXd::Zero(m), VectorXd::Zero(n), 0.0};
      MatrixXd out(n, m);
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < m; ++i) out(a, i) = cells[a][i].evaluate(ctx);
      return out;
    });
    sc.structure = GaugePoissonStructure(sc.fiber, sc.potential->contracted);
    sc.gauge_evaluation = "explicit";
  } else {
    build_averaged_gauge(sc, g);
  }
  if (g.value("field_sign", 1) == -1) {
    const GaugePoissonStructure plain = sc.structure;
    sc.structure.field_override = [plain](const VectorXd& q, const VectorXd& y) { return MatrixXd(-plain.field(q, y)); };
  }
}

void build_chart(Scenario& sc, const json& c) {
  if (!sc.algebra) throw ConfigError("/chart: charts need a Lie-Poisson fiber");
  const std::string conn = c["connection"];
  const ConnectionPair flat = ConnectionPair::flat(sc.m, *sc.algebra);
  if (c.contains("sections")) sc.chart_sections = build_sections(sc, c["sections"], "/chart/sections");
  const std::string group = c.value("group", "circle");
  if (group == "so3" && !sc.chart_sections) {
    if (sc.m != 3 || sc.n != 3) throw ConfigError("/chart: so3 frames need an so3 fiber over a 3-dimensional base");
    sc.chart_sections = frame_sections(c.value("frame", "identity"));
  }
  if (conn == "flat") {
    sc.chart = flat;
  } else if (conn == "potential") {
    if (!sc.potential) throw ConfigError("/chart: a potential chart needs a linear, wu-yang or zero gauge");
    sc.chart = ConnectionPair::from_potential(*sc.potential, *sc.algebra);
    sc.chart->min_q_norm = sc.potential->min_q_norm;
  } else {
    if (!sc.chart_sections) throw ConfigError("/chart: an averaged chart needs 'sections' or an so3 frame");
    AveragingOptions o;
    if (c.contains("nodes")) o.circle_nodes = o.torus_nodes = o.so3_nodes = c["nodes"].get<int>();
    const bool so3_fiber = sc.n == 3 && *sc.algebra == LieAlgebraStructure::so3();
    sc.chart = averaged_connection(flat, *sc.chart_sections, group_kind(group, so3_fiber), o);
  }
}

}  // namespace

Scenario build_scenario(const json& config) {
  Scenario sc;
  sc.config = config;
  sc.name = config["name"];
  sc.hash = config_hash(config);
  sc.m = config["base_dim"];
  build_fiber(sc, config["fiber"]);
  sc.metric = build_metric(sc, config.value("metric", json{{"type", "identity"}}));
  build_gauge(sc, config["gauge"]);

  const json h = config.value("hamiltonian", json{{"type", "kinetic"}});
  if (h["type"] == "kinetic") {
    sc.hamiltonian = kinetic_hamiltonian(sc.metric, sc.n);
  } else {
    if (!h.contains("expr")) throw ConfigError("/hamiltonian: expression Hamiltonian needs 'expr'");
    const auto e = parse_expr(h["expr"], {sc.m, sc.n}, "/hamiltonian/expr");
    try {
      sc.hamiltonian = expr::to_scalar_function(e, expr::Layout::Phase);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string("/hamiltonian/expr: ") + err.what());
    }
  }

  if (config.contains("simulation")) {
    const json& s = config["simulation"];
    SimulationSpec spec;
    spec.t_end = s["t_end"];
    spec.step = s["step"];
    spec.min_radius = s.value("min_radius", sc.min_q_norm > 0.0 ? 1e-6 : 0.0);
    spec.drift_tolerance = s.value("drift_tolerance", 1e-8);
    spec.initial.p = read_vector(s["initial"]["p"], sc.m, "/simulation/initial/p");
    spec.initial.q = read_vector(s["initial"]["q"], sc.m, "/simulation/initial/q");
    spec.initial.y = read_vector(s["initial"]["y"], sc.n, "/simulation/initial/y");
    for (std::size_t k = 0; k < s.value("monitor", json::array()).size(); ++k) {
      const json& mon = s["monitor"][k];
      const auto e = parse_expr(mon["expr"], {sc.m, sc.n}, "/simulation/monitor/" + std::to_string(k));
      if (e.uses(expr::VarKind::T)) throw ConfigError("/simulation/monitor: monitored functions may not depend on t");
      spec.monitor.push_back({mon["name"], e});
    }
    sc.simulation = spec;
  }

  if (config.contains("verification")) {
    const json& v = config["verification"];
    for (const auto& c : v["checks"]) {
      const std::string name = c;
      if (std::find(sc.verification.checks.begin(), sc.verification.checks.end(), name) != sc.verification.checks.end())
        throw ConfigError("/verification/checks: '" + name + "' listed twice");
      sc.verification.checks.push_back(name);
    }
    sc.verification.samples = v.value("samples", 10);
    sc.verification.group_samples = v.value("group_samples", 20);
    sc.verification.seed = v.value("seed", std::uint64_t{0});
    if (v.contains("radius")) {
      sc.verification.r_lo = v["radius"][0];
      sc.verification.r_hi = v["radius"][1];
      if (sc.verification.r_lo > sc.verification.r_hi) throw ConfigError("/verification/radius: lower bound exceeds upper");
    }
  }

  if (config.contains("chart")) build_chart(sc, config["chart"]);

  sc.average_y = VectorXd::Zero(sc.n);
  sc.average_y(0) = 1.0;
  if (config.contains("average")) {
    const json& a = config["average"];
    sc.average_grid = a.value("grid", sc.average_grid);
    if (a.contains("y")) sc.average_y = read_vector(a["y"], sc.n, "/average/y");
  }
  return sc;
}

}  // namespace gpb::cli
