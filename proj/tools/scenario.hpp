#ifndef GPB_TOOLS_SCENARIO_HPP
#define GPB_TOOLS_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpb/bundle.hpp"
#include "gpb/expr.hpp"

namespace gpb::cli {

using json = nlohmann::json;

/// FNV-1a 64-bit over the canonical (sorted-key, compact) JSON text.
std::uint64_t config_hash(const json& config);
std::string hex64(std::uint64_t v);

std::vector<std::string> builtin_scenario_names();
/// Parsed config of a builtin scenario; ConfigError for unknown names.
json builtin_scenario(const std::string& name);
const json& scenario_schema();

/// Reads a config file, falling back to builtin names ("wu-yang" or "wu-yang.json")
/// when no such file exists. Validates against the schema.
json load_config(const std::string& path_or_name);

struct InitialState {
  VectorXd p, q, y;
};

struct MonitorSpec {
  std::string name;
  expr::Expression e;
};

struct SimulationSpec {
  double t_end = 0.0;
  double step = 0.0;
  double min_radius = 0.0;
  double drift_tolerance = 1e-8;
  InitialState initial;
  std::vector<MonitorSpec> monitor;
};

struct VerificationSpec {
  std::vector<std::string> checks;
  int samples = 10;
  int group_samples = 20;
  std::uint64_t seed = 0;
  double r_lo = 0.5;
  double r_hi = 3.0;
};

/// A fully built scenario: every structure the commands need.
struct Scenario {
  json config;
  std::string name;
  std::uint64_t hash = 0;
  int m = 0;
  int n = 0;

  std::optional<LieAlgebraStructure> algebra;
  PoissonFiber fiber;
  Metric metric;
  GaugePoissonStructure structure;
  /// How the gauge form entering the structure is evaluated.
  std::string gauge_evaluation;
  double min_q_norm = 0.0;

  /// Linear potential for linear, wu-yang and generic-so3 gauges.
  std::optional<LinearGaugePotential> potential;

  /// Symmetry of an averaged gauge source.
  std::optional<FiberwiseAction> action;
  std::optional<SectionFamily> sections;
  AveragingOptions averaging;
  /// Quadrature-built form (averaged gauges).
  std::optional<GaugeForm> averaged;
  /// Closed form of the average when one is known.
  std::optional<GaugeForm> closed_form;

  ScalarFunction hamiltonian;
  std::optional<SimulationSpec> simulation;
  VerificationSpec verification;

  std::optional<ConnectionPair> chart;
  std::optional<SectionFamily> chart_sections;

  std::string average_grid = "0.5:2:3";
  VectorXd average_y;

  VectorXd pack(const InitialState& s) const { return pack_state(s.p, s.q, s.y); }
};

/// Builds a scenario from a schema-valid config. ConfigError on inconsistent
/// dimensions or unparsable expressions; InvalidActionError on bad symmetries.
Scenario build_scenario(const json& config);

/// Portable sampler: mt19937_64 with explicit 53-bit mantissa conversion.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi);
  VectorXd box(int dim, double lo, double hi);
  /// Uniform direction scaled to a radius in [lo, hi].
  VectorXd shell(int dim, double lo, double hi);

 private:
  std::mt19937_64 rng_;
};

}  // namespace gpb::cli

#endif  // GPB_TOOLS_SCENARIO_HPP
