#include "knstab/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace knstab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

unsigned parse_engines(const std::string& s) {
  unsigned mask = 0;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "analytic")
      mask |= engine_analytic;
    else if (tok == "flow")
      mask |= engine_flow;
    else if (tok == "kn")
      mask |= engine_bounded;
    else if (tok == "all")
      mask |= engine_all;
    else
      throw CLI::ValidationError("--engine", "unknown engine \"" + tok + "\"");
  }
  return mask == 0 ? engine_all : mask;
}

Instance load_instance(const std::string& path) { return parse_instance(slurp(path)); }

Instance restrict_point(Instance inst, const std::string& point) {
  if (point.empty()) return inst;
  const Vec* v = inst.find_point(point);
  if (!v) throw std::runtime_error("instance has no point named \"" + point + "\"");
  Vec keep = *v;
  inst.points.clear();
  inst.points.emplace_back(point, std::move(keep));
  return inst;
}

int exit_code(const Report& rep) {
  if (!rep.all_agree || !rep.certificates_ok) return 2;
  if (rep.any_inconclusive) return 3;
  return 0;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

void emit_instances(const std::vector<Instance>& list, const std::string& dir) {
  if (dir.empty()) {
    std::cout << "[\n";
    for (size_t i = 0; i < list.size(); ++i) {
      std::string doc = serialize_instance(list[i]);
      if (!doc.empty() && doc.back() == '\n') doc.pop_back();
      std::cout << doc << (i + 1 < list.size() ? ",\n" : "\n");
    }
    std::cout << "]\n";
    return;
  }
  std::filesystem::create_directories(dir);
  for (const auto& inst : list) {
    std::ofstream out(std::filesystem::path(dir) / (inst.id + ".json"));
    out << serialize_instance(inst);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stability analysis for linear torus and GL actions"};
  app.require_subcommand(1);

  std::string file, engine = "all", point, engines = "all", emit_dir, s_coords;
  int budget = 64, count = 20, max_k = 3, max_n = 6, bound = 5, max_iter = 100000;
  std::uint64_t seed = 1;
  double tol = tols::mu_zero;
  std::string tau_set = "-1,0,1";

  auto* analyze = app.add_subcommand("analyze", "run verdict engines on an instance file");
  analyze->add_option("file", file)->required();
  analyze->add_option("--engine", engine, "analytic|flow|kn|all");
  analyze->add_option("--point", point, "restrict to one named point");
  analyze->add_option("--budget", budget);
  analyze->add_option("--seed", seed);

  auto* cmp = app.add_subcommand("compare", "cross-check engines and print a report");
  cmp->add_option("file", file)->required();
  cmp->add_option("--engines", engines, "comma list of analytic,flow,kn");
  cmp->add_option("--point", point);
  cmp->add_option("--budget", budget);
  cmp->add_option("--seed", seed);

  auto* fl = app.add_subcommand("flow", "run the descent flow");
  fl->add_option("file", file)->required();
  fl->add_option("--point", point);
  fl->add_option("--tol", tol);
  fl->add_option("--max-iter", max_iter);

  auto* rnd = app.add_subcommand("random", "emit a deterministic random instance suite");
  rnd->add_option("--seed", seed);
  rnd->add_option("--count", count);
  rnd->add_option("--k", max_k, "maximum torus rank");
  rnd->add_option("--n", max_n, "maximum ambient dimension");
  rnd->add_option("--bound", bound, "weight magnitude bound");
  rnd->add_option("--tau-set", tau_set, "comma list of central shift values");
  rnd->add_option("--emit", emit_dir, "write one file per instance into this directory");

  auto* gal = app.add_subcommand("gallery", "emit the built-in instances");
  gal->add_option("--emit", emit_dir);

  auto* wts = app.add_subcommand("weights", "evaluate weight data along a direction");
  wts->add_option("file", file)->required();
  wts->add_option("--s", s_coords, "comma-separated real coordinates (torus: k entries; gl: r diagonal entries)")
      ->required();
  wts->add_option("--point", point);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze || *cmp) {
      Instance inst = restrict_point(load_instance(file), point);
      CompareOptions opts;
      opts.budget = budget;
      opts.seed = seed;
      unsigned mask = parse_engines(*analyze ? engine : engines);
      Report rep = compare(inst, mask, opts);
      if (*cmp) {
        std::cout << serialize_report(rep);
      } else {
        for (const auto& pc : rep.points) {
          std::cout << inst.id << "/" << pc.name << ":";
          if (pc.analytic.ran)
            std::cout << " analytic=" << level_name(pc.analytic.verdict.level) << " ("
                      << (pc.analytic.verdict.confidence == Confidence::exact ? "exact"
                                                                              : "heuristic")
                      << ", margin " << pc.analytic.verdict.margin << ", certificate "
                      << pc.analytic.certificate_status << ")";
          if (pc.flow.ran)
            std::cout << " flow=" << flow_class_name(pc.flow.classification) << " (|mu| "
                      << pc.flow.mu_final << ")";
          if (pc.bounded.ran)
            std::cout << " kn="
                      << (pc.bounded.kind == Boundedness::unbounded ? "unbounded"
                                                                    : "bounded_below")
                      << " (margin " << pc.bounded.margin << ")";
          if (!pc.all_agree) std::cout << " DISAGREEMENT";
          std::cout << "\n";
        }
      }
      return exit_code(rep);
    }
    if (*fl) {
      Instance inst = restrict_point(load_instance(file), point);
      auto sp = inst.symplectization();
      FlowOptions opts;
      opts.tol = tol;
      opts.max_iter = max_iter;
      bool inconclusive = false;
      for (const auto& [name, v] : inst.points) {
        auto fr = kn_descent(sp, v, opts);
        std::cout << inst.id << "/" << name << ": " << flow_class_name(fr.classification)
                  << " iterations=" << fr.iterations << " |mu|=" << fr.mu_final
                  << " psi=" << fr.psi_final << " exponent=" << fr.exponent_norm << "\n";
        inconclusive = inconclusive || fr.classification == FlowClass::inconclusive;
      }
      return inconclusive ? 3 : 0;
    }
    if (*rnd) {
      RandomParams params;
      params.count = count;
      params.max_rank = max_k;
      params.max_dim = max_n;
      params.weight_bound = bound;
      params.tau_set = parse_reals(tau_set);
      emit_instances(generate_random(seed, params), emit_dir);
      return 0;
    }
    if (*gal) {
      emit_instances(gallery(), emit_dir);
      return 0;
    }
    if (*wts) {
      Instance inst = restrict_point(load_instance(file), point);
      auto sp = inst.symplectization();
      auto coords = parse_reals(s_coords);
      if (int(coords.size()) != sp.rep.group_rank)
        throw std::runtime_error("--s needs " + std::to_string(sp.rep.group_rank) + " entries");
      AlgebraElement s = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
      if (sp.rep.kind == GroupKind::torus) {
        for (int i = 0; i < sp.rep.group_rank; ++i) s.tv(i) = coords[i];
      } else {
        for (int i = 0; i < sp.rep.group_rank; ++i) s.gm(i, i) = coords[i];
      }
      for (const auto& [name, v] : inst.points) {
        auto mw = maximal_weight(sp, s, v);
        std::cout << inst.id << "/" << name << ": weight=";
        if (mw.infinite)
          std::cout << "+inf";
        else
          std::cout << mw.value;
        std::cout << " psi(t)={";
        bool first = true;
        for (double t : {0.5, 1.0, 2.0, 4.0}) {
          if (!first) std::cout << ", ";
          std::cout << t << ": " << kempf_ness(sp, s, t, v);
          first = false;
        }
        std::cout << "}";
        auto lim = limit_point(sp, s, v);
        if (lim.value)
          std::cout << " limit_norm=" << lim.value->norm();
        else
          std::cout << " limit=none";
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
