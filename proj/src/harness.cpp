#include "knstab/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <random>
#include <stdexcept>

namespace knstab {

using json = nlohmann::ordered_json;

namespace {

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

cx parse_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(where + ": complex scalars are two-element arrays [re, im]");
  return cx(j[0].get<double>(), j[1].get<double>());
}

json dump_complex(cx z) { return json::array({z.real(), z.imag()}); }

Vec parse_cvector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected an array of complex scalars");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    v(int(i)) = parse_complex(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Mat parse_cmatrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where + ": expected a nested row-major array");
  int rows = int(j.size());
  int cols = -1;
  Mat m;
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array()) fail(where + ": rows must be arrays");
    if (cols < 0) {
      cols = int(j[i].size());
      m.resize(rows, cols);
    } else if (int(j[i].size()) != cols) {
      fail(where + ": ragged rows");
    }
    for (int c = 0; c < cols; ++c)
      m(i, c) = parse_complex(j[i][c], where + "[" + std::to_string(i) + "]");
  }
  return m;
}

}  // namespace

const Vec* Instance::find_point(const std::string& name) const {
  for (const auto& [n, v] : points)
    if (n == name) return &v;
  return nullptr;
}

Instance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");

  Instance inst;
  if (!doc.contains("id") || !doc["id"].is_string()) fail("missing or non-string field \"id\"");
  inst.id = doc["id"].get<std::string>();

  if (!doc.contains("group") || !doc["group"].is_object()) fail("missing object field \"group\"");
  const json& g = doc["group"];
  if (!g.contains("kind") || !g["kind"].is_string()) fail("group: missing string field \"kind\"");
  std::string kind = g["kind"].get<std::string>();
  if (kind != "torus" && kind != "gl") fail("group.kind must be \"torus\" or \"gl\"");
  if (!g.contains("rank") || !g["rank"].is_number_integer() || g["rank"].get<int>() < 1)
    fail("group: missing positive integer field \"rank\"");
  int rank = g["rank"].get<int>();

  if (!doc.contains("representation") || !doc["representation"].is_object())
    fail("missing object field \"representation\"");
  const json& r = doc["representation"];
  if (kind == "torus") {
    if (!r.contains("weights") || !r["weights"].is_array())
      fail("representation: torus actions need an integer array field \"weights\"");
    const json& w = r["weights"];
    int n = int(w.size());
    if (n == 0) fail("representation.weights: at least one weight row required");
    Eigen::MatrixXi chi(n, rank);
    for (int j = 0; j < n; ++j) {
      if (!w[j].is_array() || int(w[j].size()) != rank)
        fail("representation.weights[" + std::to_string(j) + "]: expected " +
             std::to_string(rank) + " integers");
      for (int i = 0; i < rank; ++i) {
        if (!w[j][i].is_number_integer())
          fail("representation.weights[" + std::to_string(j) + "]: entries must be integers");
        chi(j, i) = w[j][i].get<int>();
      }
    }
    inst.rep = Representation::torus_weights(chi);
  } else if (r.contains("name")) {
    std::string name = r["name"].get<std::string>();
    if (name == "standard") {
      inst.rep = Representation::gl_standard(rank);
    } else if (name == "adjoint") {
      inst.rep = Representation::gl_adjoint(rank);
    } else if (name.rfind("sym^", 0) == 0) {
      if (rank != 2) fail("representation: sym^d is provided for rank 2 only");
      int d = 0;
      try {
        d = std::stoi(name.substr(4));
      } catch (...) {
        fail("representation.name: malformed sym^d");
      }
      if (d < 1 || d > 12) fail("representation.name: sym^d needs 1 <= d <= 12");
      inst.rep = Representation::gl_sym(d);
    } else {
      fail("representation.name: unknown name \"" + name + "\"");
    }
    inst.rep_name = name;
  } else if (r.contains("images")) {
    const json& im = r["images"];
    if (!im.is_array() || int(im.size()) != rank * rank)
      fail("representation.images: need rank^2 matrices (row-major elementary order)");
    std::vector<Mat> images;
    for (size_t i = 0; i < im.size(); ++i)
      images.push_back(parse_cmatrix(im[i], "representation.images[" + std::to_string(i) + "]"));
    inst.rep = Representation::gl_explicit(rank, std::move(images));
  } else {
    fail("representation: gl actions need \"name\" or \"images\"");
  }

  if (auto diag = inst.rep.validate(1e-8)) fail("representation rejected: " + *diag);

  if (!doc.contains("tau")) fail("missing field \"tau\"");
  const json& t = doc["tau"];
  int tau_len = kind == "torus" ? rank : 1;
  if (!t.is_array() || int(t.size()) != tau_len)
    fail("tau: expected " + std::to_string(tau_len) + " real entries");
  inst.tau.resize(tau_len);
  for (int i = 0; i < tau_len; ++i) {
    if (!t[i].is_number()) fail("tau: entries must be numbers");
    inst.tau(i) = t[i].get<double>();
  }

  if (!doc.contains("points") || !doc["points"].is_object() || doc["points"].empty())
    fail("missing non-empty object field \"points\"");
  for (const auto& [name, val] : doc["points"].items()) {
    Vec v = parse_cvector(val, "points." + name);
    if (int(v.size()) != inst.rep.ambient_dim)
      fail("points." + name + ": expected " + std::to_string(inst.rep.ambient_dim) +
           " coordinates");
    inst.points.emplace_back(name, std::move(v));
  }
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  json doc;
  doc["id"] = inst.id;
  doc["group"] = {{"kind", inst.rep.kind == GroupKind::torus ? "torus" : "gl"},
                  {"rank", inst.rep.group_rank}};
  json r;
  if (inst.rep.kind == GroupKind::torus) {
    json rows = json::array();
    for (int j = 0; j < inst.rep.weights.rows(); ++j) {
      json row = json::array();
      for (int i = 0; i < inst.rep.weights.cols(); ++i) row.push_back(inst.rep.weights(j, i));
      rows.push_back(row);
    }
    r["weights"] = rows;
  } else if (!inst.rep_name.empty()) {
    r["name"] = inst.rep_name;
  } else {
    json ims = json::array();
    for (const auto& m : inst.rep.images) {
      json rows = json::array();
      for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(dump_complex(m(i, c)));
        rows.push_back(row);
      }
      ims.push_back(rows);
    }
    r["images"] = ims;
  }
  doc["representation"] = r;
  json tau = json::array();
  for (int i = 0; i < inst.tau.size(); ++i) tau.push_back(inst.tau(i));
  doc["tau"] = tau;
  json pts;
  for (const auto& [name, v] : inst.points) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(dump_complex(v(i)));
    pts[name] = arr;
  }
  doc["points"] = pts;
  return doc.dump(2) + "\n";
}

std::vector<Instance> generate_random(std::uint64_t seed, const RandomParams& params) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int idx = 0; idx < params.count; ++idx) {
    int k = 1 + int(rng() % std::uint64_t(params.max_rank));
    int n = 2 + int(rng() % std::uint64_t(params.max_dim - 1));
    Eigen::MatrixXi chi(n, k);
    std::uniform_int_distribution<int> wdist(-params.weight_bound, params.weight_bound);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < k; ++i) chi(j, i) = wdist(rng);
    RVec tau(k);
    for (int i = 0; i < k; ++i)
      tau(i) = params.tau_set[rng() % params.tau_set.size()];
    Vec v(n);
    for (int j = 0; j < n; ++j) v(j) = cx(gauss(rng), gauss(rng));
    // every other point gets sparsified support (>= 25% contract)
    if (idx % 2 == 1) {
      int zeros = 1 + int(rng() % std::uint64_t(n - 1));
      for (int z = 0; z < zeros; ++z) v(int(rng() % std::uint64_t(n))) = 0.0;
    }
    Instance inst;
    inst.id = "rnd-" + std::to_string(seed) + "-" + std::to_string(idx);
    inst.rep = Representation::torus_weights(chi);
    inst.tau = tau;
    inst.points.emplace_back("p0", std::move(v));
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> gallery() {
  std::vector<Instance> out;
  auto cvec = [](std::initializer_list<cx> vals) {
    Vec v(int(vals.size()));
    int i = 0;
    for (cx z : vals) v(i++) = z;
    return v;
  };
  {
    Instance a;
    a.id = "A";
    Eigen::MatrixXi chi(2, 1);
    chi << 1, -1;
    a.rep = Representation::torus_weights(chi);
    a.tau = RVec::Zero(1);
    a.points.emplace_back("balanced", cvec({1.0, 1.0}));
    a.points.emplace_back("first_only", cvec({1.0, 0.0}));
    a.points.emplace_back("origin", cvec({0.0, 0.0}));
    out.push_back(std::move(a));
  }
  for (double t : {-1.0, 0.0, 1.0}) {
    Instance b;
    b.id = t < 0 ? "B_minus" : (t > 0 ? "B_plus" : "B_zero");
    Eigen::MatrixXi chi(1, 1);
    chi << 1;
    b.rep = Representation::torus_weights(chi);
    b.tau = RVec::Constant(1, t);
    b.points.emplace_back("unit", cvec({1.0}));
    out.push_back(std::move(b));
  }
  {
    Instance c;
    c.id = "C";
    Eigen::MatrixXi chi(3, 2);
    chi << 1, 0, 0, 1, -1, -1;
    c.rep = Representation::torus_weights(chi);
    c.tau = RVec::Zero(2);
    c.points.emplace_back("full", cvec({1.0, 1.0, 1.0}));
    c.points.emplace_back("truncated", cvec({1.0, 1.0, 0.0}));
    out.push_back(std::move(c));
  }
  {
    Instance d;
    d.id = "D";
    d.rep = Representation::gl_standard(2);
    d.rep_name = "standard";
    d.tau = RVec::Zero(1);
    d.points.emplace_back("basis", cvec({1.0, 0.0}));
    d.points.emplace_back("origin", cvec({0.0, 0.0}));
    out.push_back(std::move(d));
  }
  {
    Instance e;
    e.id = "E";
    e.rep = Representation::gl_sym(2);
    e.rep_name = "sym^2";
    e.tau = RVec::Constant(1, -1.0);
    e.points.emplace_back("x2", cvec({1.0, 0.0, 0.0}));
    e.points.emplace_back("xy", cvec({0.0, 1.0, 0.0}));
    e.points.emplace_back("x2_plus_y2", cvec({1.0, 0.0, 1.0}));
    out.push_back(std::move(e));
  }
  return out;
}

const char* flow_class_name(FlowClass c) {
  switch (c) {
    case FlowClass::reached_zero: return "reached_zero";
    case FlowClass::stalled_positive: return "stalled_positive";
    case FlowClass::degenerating: return "degenerating";
    case FlowClass::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

Level level_from_flow(FlowClass c, bool trivial_stabilizer) {
  switch (c) {
    case FlowClass::reached_zero:
      return trivial_stabilizer ? Level::stable : Level::polystable_not_stable;
    case FlowClass::degenerating:
      return Level::semistable_not_polystable;
    default:
      return Level::unstable;
  }
}

}  // namespace

Report compare(const Instance& inst, unsigned engines, const CompareOptions& opts) {
  Report rep;
  rep.instance_id = inst.id;
  auto sp = inst.symplectization();

  for (const auto& [name, v] : inst.points) {
    PointComparison pc;
    pc.name = name;

    if (engines & engine_analytic) {
      auto t0 = std::chrono::steady_clock::now();
      pc.analytic.ran = true;
      pc.analytic.verdict = analytic_verdict(sp, v, opts.budget, opts.seed);
      auto bad = verify_certificate(sp, v, pc.analytic.verdict);
      pc.analytic.certificate_status = bad ? *bad : "verified";
      if (bad) pc.certificates_ok = false;
      pc.analytic.wall_time = now_seconds(t0);
      if (pc.analytic.verdict.confidence == Confidence::heuristic) pc.inconclusive = true;
    }
    if (engines & engine_flow) {
      auto t0 = std::chrono::steady_clock::now();
      pc.flow.ran = true;
      auto fr = kn_descent(sp, v, opts.flow);
      pc.flow.classification = fr.classification;
      pc.flow.conclusive = fr.classification != FlowClass::inconclusive;
      pc.flow.semistable = fr.classification == FlowClass::reached_zero ||
                           fr.classification == FlowClass::degenerating;
      pc.flow.mu_final = fr.mu_final;
      auto stab = stabilizer_algebra(sp.rep, v);
      pc.flow.level = level_from_flow(fr.classification, stab.g_v.empty());
      pc.flow.wall_time = now_seconds(t0);
      if (!pc.flow.conclusive) pc.inconclusive = true;
    }
    if (engines & engine_bounded) {
      auto t0 = std::chrono::steady_clock::now();
      pc.bounded.ran = true;
      auto br = boundedness_probe(sp, v, opts.budget, opts.seed);
      pc.bounded.kind = br.kind;
      pc.bounded.heuristic = br.heuristic;
      pc.bounded.margin = br.kind == Boundedness::unbounded ? -br.weight : br.inf_estimate;
      pc.bounded.wall_time = now_seconds(t0);
      if (br.heuristic) pc.inconclusive = true;
    }

    // cross-engine agreement at the granularity each equivalence licenses:
    // the moment-infimum and boundedness comparisons see semistability only;
    // the orbit-reaches-zero comparison sees polystable and stable as well.
    bool a_ran = pc.analytic.ran, f_ran = pc.flow.ran && pc.flow.conclusive,
         b_ran = pc.bounded.ran;
    if (a_ran && f_ran) {
      bool semi_eq = is_semistable(pc.analytic.verdict.level) == pc.flow.semistable;
      bool poly_eq = is_polystable(pc.analytic.verdict.level) ==
                     (pc.flow.classification == FlowClass::reached_zero);
      bool stable_eq =
          (pc.analytic.verdict.level == Level::stable) == (pc.flow.level == Level::stable);
      pc.agreement[0][1] = pc.agreement[1][0] = semi_eq && poly_eq && stable_eq;
    }
    if (a_ran && b_ran) {
      pc.agreement[0][2] = pc.agreement[2][0] =
          is_semistable(pc.analytic.verdict.level) ==
          (pc.bounded.kind == Boundedness::bounded_below);
    }
    if (f_ran && b_ran) {
      pc.agreement[1][2] = pc.agreement[2][1] =
          pc.flow.semistable == (pc.bounded.kind == Boundedness::bounded_below);
    }
    pc.all_agree = pc.agreement[0][1] && pc.agreement[0][2] && pc.agreement[1][2];

    rep.all_agree = rep.all_agree && pc.all_agree;
    rep.any_inconclusive = rep.any_inconclusive || pc.inconclusive;
    rep.certificates_ok = rep.certificates_ok && pc.certificates_ok;
    rep.points.push_back(std::move(pc));
  }
  return rep;
}

namespace {

json certificate_summary(const Verdict& v) {
  json j;
  if (const auto* c = std::get_if<DestabilizerCert>(&v.certificate)) {
    j["type"] = "destabilizer";
    j["weight"] = c->weight;
  } else if (const auto* c = std::get_if<ZeroMomentCert>(&v.certificate)) {
    j["type"] = "zero_moment";
    j["mu_norm"] = c->mu_norm;
  } else if (const auto* c = std::get_if<DegenerationCert>(&v.certificate)) {
    j["type"] = "degeneration";
    j["mu_norm"] = c->mu_norm;
  } else if (const auto* c = std::get_if<AnalyticOnlyCert>(&v.certificate)) {
    j["type"] = "analytic_only";
    j["note"] = c->note;
    j["margin"] = c->margin;
  }
  return j;
}

}  // namespace

std::string serialize_report(const Report& rep) {
  json doc;
  doc["instance"] = rep.instance_id;
  doc["all_agree"] = rep.all_agree;
  doc["any_inconclusive"] = rep.any_inconclusive;
  doc["certificates_ok"] = rep.certificates_ok;
  json pts = json::array();
  for (const auto& pc : rep.points) {
    json p;
    p["point"] = pc.name;
    if (pc.analytic.ran) {
      json a;
      a["verdict"] = level_name(pc.analytic.verdict.level);
      a["confidence"] =
          pc.analytic.verdict.confidence == Confidence::exact ? "exact" : "heuristic";
      a["margin"] = pc.analytic.verdict.margin;
      a["certificate"] = certificate_summary(pc.analytic.verdict);
      a["certificate_status"] = pc.analytic.certificate_status;
      p["analytic"] = a;
    }
    if (pc.flow.ran) {
      json f;
      f["classification"] = flow_class_name(pc.flow.classification);
      if (pc.flow.conclusive) {
        f["semistable"] = pc.flow.semistable;
        f["verdict"] = level_name(pc.flow.level);
      }
      f["mu_final"] = pc.flow.mu_final;
      p["flow"] = f;
    }
    if (pc.bounded.ran) {
      json b;
      b["kind"] = pc.bounded.kind == Boundedness::unbounded ? "unbounded" : "bounded_below";
      b["heuristic"] = pc.bounded.heuristic;
      b["margin"] = pc.bounded.margin;
      p["bounded"] = b;
    }
    json agr = json::array();
    for (int i = 0; i < 3; ++i) {
      json row = json::array();
      for (int j = 0; j < 3; ++j) row.push_back(pc.agreement[i][j]);
      agr.push_back(row);
    }
    p["agreement"] = agr;
    p["all_agree"] = pc.all_agree;
    p["inconclusive"] = pc.inconclusive;
    pts.push_back(p);
  }
  doc["points"] = pts;
  return doc.dump(2) + "\n";
}

}  // namespace knstab
