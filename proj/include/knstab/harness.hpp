#pragma once

#include "knstab/flow.hpp"
#include "knstab/stability.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace knstab {

/// A serializable problem instance: group, representation, central shift and
/// named points. Points keep document order so emitted reports are stable.
struct Instance {
  std::string id;
  Representation rep;
  RVec tau;
  std::vector<std::pair<std::string, Vec>> points;
  // named gl constructors round-trip through their name; explicit data does not
  std::string rep_name;  // "standard" | "sym^d" | "adjoint" | "" (torus/explicit)

  Symplectization symplectization() const { return Symplectization::make(rep, tau); }
  const Vec* find_point(const std::string& name) const;
};

/// Parses and validates a JSON document (throws std::runtime_error with a
/// field-level diagnostic on schema violations or invalid representations).
Instance parse_instance(const std::string& json_text);

std::string serialize_instance(const Instance& inst);

struct RandomParams {
  int max_rank = 3;    // torus rank k is drawn from [1, max_rank]
  int max_dim = 6;     // ambient dimension from [2, max_dim]
  int weight_bound = 5;
  std::vector<double> tau_set = {-1.0, 0.0, 1.0};
  int count = 200;
};

/// Deterministic torus instance stream; at least a quarter of the points have
/// forcibly sparsified support to hit degeneration boundaries.
std::vector<Instance> generate_random(std::uint64_t seed, const RandomParams& params);

/// Built-in reference instances (verdict goldens live with the tests).
std::vector<Instance> gallery();

// --- engine comparison --------------------------------------------------

enum EngineSelect : unsigned {
  engine_analytic = 1u,
  engine_flow = 2u,
  engine_bounded = 4u,
  engine_all = 7u,
};

struct CompareOptions {
  int budget = 64;
  std::uint64_t seed = 1;
  FlowOptions flow;
  bool include_timings = false;  // timings break byte-stability; off by default
};

struct AnalyticOutcome {
  bool ran = false;
  Verdict verdict;
  std::string certificate_status;  // "verified" or the failure reason
  double wall_time = 0.0;
};

struct FlowOutcome {
  bool ran = false;
  FlowClass classification = FlowClass::inconclusive;
  bool conclusive = false;
  bool semistable = false;
  Level level = Level::unstable;  // valid when conclusive
  double mu_final = 0.0;
  double wall_time = 0.0;
};

struct BoundedOutcome {
  bool ran = false;
  Boundedness kind = Boundedness::bounded_below;
  bool heuristic = false;
  double margin = 0.0;  // |weight| when unbounded, inf estimate when bounded
  double wall_time = 0.0;
};

struct PointComparison {
  std::string name;
  AnalyticOutcome analytic;
  FlowOutcome flow;
  BoundedOutcome bounded;
  // agreement[i][j] for engines (analytic, flow, bounded); diagonal true;
  // pairs with an engine that did not run or was inconclusive stay true and
  // are flagged through `inconclusive` instead.
  bool agreement[3][3] = {{true, true, true}, {true, true, true}, {true, true, true}};
  bool all_agree = true;
  bool inconclusive = false;
  bool certificates_ok = true;
};

struct Report {
  std::string instance_id;
  std::vector<PointComparison> points;
  bool all_agree = true;
  bool any_inconclusive = false;
  bool certificates_ok = true;
};

Report compare(const Instance& inst, unsigned engines = engine_all,
               const CompareOptions& opts = {});

std::string serialize_report(const Report& rep);

const char* flow_class_name(FlowClass c);

}  // namespace knstab
