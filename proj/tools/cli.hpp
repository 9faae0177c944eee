// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. `run` takes the argument list and output streams so
// that tests can drive it without a process boundary.
#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stockflow/models.hpp"
#include "stockflow/stockflow.hpp"

namespace stockflow::cli {

enum ExitCode { kOk = 0, kUsage = 1, kInvalid = 2, kRuntime = 3 };

/// Input files that cannot be opened count as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write '" + path + "'");
  f << text;
  if (!f) throw RuntimeFailure("failed writing '" + path + "'");
}

inline ModelBundle load_bundle(const std::string& path, const std::vector<std::string>& extra = {}) {
  auto parse = [](const std::string& p) {
    try {
      return parse_json(read_file(p));
    } catch (const ValidationError& e) {
      throw ValidationError(p + ": " + e.what());
    }
  };
  ModelBundle b = parse(path);
  for (const auto& p : extra) b.merge(parse(p));
  return b;
}

/// The entry called `wanted`, or the only entry when `wanted` is empty.
template <typename Map>
const typename Map::mapped_type& pick(const Map& m, const std::string& wanted, const std::string& what) {
  if (!wanted.empty()) {
    auto it = m.find(wanted);
    if (it == m.end()) throw ValidationError("no " + what + " named '" + wanted + "'");
    return it->second;
  }
  if (m.size() != 1)
    throw ValidationError("bundle has " + std::to_string(m.size()) + " " + what + " entries; choose one by name");
  return m.begin()->second;
}

template <typename Map>
std::string pick_name(const Map& m, const std::string& wanted, const std::string& what) {
  if (!wanted.empty()) {
    if (!m.count(wanted)) throw ValidationError("no " + what + " named '" + wanted + "'");
    return wanted;
  }
  if (m.size() != 1)
    throw ValidationError("bundle has " + std::to_string(m.size()) + " " + what + " entries; choose one by name");
  return m.begin()->first;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::string cardinality_table(const ModelBundle& b, const std::string& only) {
  const auto& objects = schema_stockflow().objects;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head = {"diagram", "kind"};
  head.insert(head.end(), objects.begin(), objects.end());
  rows.push_back(head);
  for (const auto& [name, d] : b.diagrams) {
    if (!only.empty() && name != only) continue;
    std::vector<std::string> row = {name, std::holds_alternative<StockFlowDiagram>(d) ? "stock-flow" : "system-structure"};
    for (const auto& ob : objects) row.push_back(std::to_string(structure_of(d).count(ob)));
    rows.push_back(row);
  }
  if (!only.empty() && rows.size() == 1) throw ValidationError("no diagram named '" + only + "'");
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      os << r[c];
      if (c + 1 < r.size()) os << std::string(width[c] - r[c].size() + 2, ' ');
    }
    os << "\n";
  }
  auto count = [&](std::string_view what, std::size_t n) {
    if (n) os << what << ": " << n << "\n";
  };
  if (only.empty()) {
    count("feet", b.feet.size());
    count("open diagrams", b.open.size());
    count("patterns", b.patterns.size());
    count("typings", b.typings.size());
    count("parameter sets", b.parameters.size());
    count("initial states", b.initial_states.size());
    count("dynamics", b.dynamics.size());
  }
  return os.str();
}

inline std::string causal_loop_json(const CausalLoopGraph& cl) {
  nlohmann::json edges = nlohmann::json::array();
  for (Part e = 1; e <= cl.edges(); ++e) edges.push_back(nlohmann::json::array({cl.source(e), cl.target(e)}));
  nlohmann::json j{{"format", "stockflow-causal-loop"}, {"nodes", cl.node_names()}, {"edges", std::move(edges)}};
  return j.dump(2) + "\n";
}

/// Runs one command. Returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color = false) {
  CLI::App app{"Stock-flow diagrams: validation, simulation, composition and stratification", "stockflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stockflow 0.1.0");

  std::string bundle_path, out_path, diagram_name;
  std::vector<std::string> with;
  auto common = [&](CLI::App* sub, bool needs_bundle = true) {
    if (needs_bundle) sub->add_option("bundle", bundle_path, "Model bundle (JSON)")->required();
    if (needs_bundle) sub->add_option("--with", with, "Additional bundles merged into the first");
  };

  auto* validate = app.add_subcommand("validate", "Check a bundle; print one violation per line");
  common(validate);

  auto* info = app.add_subcommand("info", "Print per-object cardinalities of every diagram");
  common(info);
  info->add_option("--diagram", diagram_name, "Only this diagram");

  auto* simulate = app.add_subcommand("simulate", "Integrate the ODEs of a diagram and write a CSV trajectory");
  common(simulate);
  double t0 = 0.0, t1 = 0.0, dt = 0.0, abstol = 1e-8, reltol = 1e-6;
  std::string method = "dp45", params_name, initial_name, dynamics_name;
  simulate->add_option("--diagram", diagram_name, "Diagram to simulate");
  simulate->add_option("--parameters", params_name, "Parameter set name");
  simulate->add_option("--initial", initial_name, "Initial state name");
  simulate->add_option("--dynamics", dynamics_name, "Attach these expressions to a system-structure diagram");
  simulate->add_option("--t0", t0, "Start time")->default_val(0.0);
  simulate->add_option("--t1", t1, "End time")->required();
  auto* dt_opt = simulate->add_option("--dt", dt, "Step size (rk4)");
  simulate->add_option("--abstol", abstol, "Absolute tolerance (dp45)")->excludes(dt_opt);
  simulate->add_option("--reltol", reltol, "Relative tolerance (dp45)")->excludes(dt_opt);
  simulate->add_option("--method", method, "rk4 or dp45")->check(CLI::IsMember({"rk4", "dp45"}));
  simulate->add_option("--out", out_path, "Output CSV (default: stdout)");

  auto* convert = app.add_subcommand("convert", "Apply a semantics: system structure or causal loop");
  common(convert);
  std::string to;
  convert->add_option("--diagram", diagram_name, "Diagram to convert");
  convert->add_option("--to", to, "system-structure or causal-loop")
      ->required()
      ->check(CLI::IsMember({"system-structure", "causal-loop"}));
  convert->add_option("--out", out_path, "Output file; .dot writes Graphviz, anything else JSON");

  auto* compose = app.add_subcommand("compose", "Glue open diagrams along a wiring pattern");
  common(compose);
  std::string pattern_name, result_name;
  compose->add_option("--pattern", pattern_name, "Wiring pattern name");
  compose->add_option("--name", result_name, "Name of the composite (default: the pattern name)");
  compose->add_option("--out", out_path, "Output bundle (default: stdout)");

  auto* stratify_cmd = app.add_subcommand("stratify", "Pullback of typed diagrams over a shared type system");
  common(stratify_cmd, false);
  std::string aggregate_path, type_path;
  std::vector<std::string> strata_paths;
  bool flatten = false;
  stratify_cmd->add_option("--aggregate", aggregate_path, "Bundle with the aggregate model and its typing")->required();
  stratify_cmd->add_option("--strata", strata_paths, "Bundles with strata models and their typings")->required();
  stratify_cmd->add_option("--type", type_path, "Bundle with the type system")->required();
  stratify_cmd->add_flag("--flatten", flatten, "Rewrite tuple names into flat names");
  stratify_cmd->add_option("--name", result_name, "Name of the stratified diagram")->default_val("stratified");
  stratify_cmd->add_option("--out", out_path, "Output bundle (default: stdout)");

  auto* graph = app.add_subcommand("graph", "Render a diagram as Graphviz DOT");
  common(graph);
  std::string typed_name;
  bool causal = false;
  graph->add_option("--diagram", diagram_name, "Diagram to render");
  graph->add_option("--typed", typed_name, "Color by this typing");
  graph->add_flag("--causal", causal, "Render the causal loop diagram");
  graph->add_option("--out", out_path, "Output DOT (default: stdout)");

  auto fail = [&](int code, const std::string& msg) {
    if (color)
      err << "\x1b[31merror:\x1b[0m " << msg << "\n";
    else
      err << "error: " << msg << "\n";
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << "stockflow 0.1.0\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    int code = fail(kUsage, e.what());
    err << app.help();
    return code;
  }

  try {
    if (*validate) {
      ModelBundle b = load_bundle(bundle_path, with);
      auto violations = bundle_violations(b);
      for (const auto& v : violations) out << v << "\n";
      if (!violations.empty()) return kInvalid;
      out << "ok\n";
      return kOk;
    }
    if (*info) {
      out << cardinality_table(load_bundle(bundle_path, with), diagram_name);
      return kOk;
    }
    if (*simulate) {
      ModelBundle b = load_bundle(bundle_path, with);
      std::string dname = pick_name(b.diagrams, diagram_name, "diagram");
      StockFlowDiagram d;
      if (const auto* sf = std::get_if<StockFlowDiagram>(&b.diagrams.at(dname)); sf && dynamics_name.empty()) {
        d = *sf;
      } else {
        d = attach_dynamics(structure_of(b.diagrams.at(dname)), pick(b.dynamics, dynamics_name, "dynamics"));
      }
      VectorField vf(d, pick(b.parameters, params_name, "parameters"));
      const StateVector& u0 = pick(b.initial_states, initial_name, "initial state");
      if (method == "rk4" && !(dt > 0.0)) throw UsageError("rk4 needs --dt");
      if (method == "dp45" && dt > 0.0) throw UsageError("--dt applies to rk4 only");
      Trajectory tr = method == "rk4" ? integrate_fixed(vf, u0, t0, t1, dt)
                                      : integrate_adaptive(vf, u0, t0, t1, AdaptiveOptions{abstol, reltol});
      write_output(out_path, emit_csv(tr), out);
      return kOk;
    }
    if (*convert) {
      ModelBundle b = load_bundle(bundle_path, with);
      std::string dname = pick_name(b.diagrams, diagram_name, "diagram");
      const SystemStructureDiagram& s = structure_of(b.diagrams.at(dname));
      const bool dot = ends_with(out_path, ".dot");
      std::string text;
      if (to == "system-structure") {
        if (dot) {
          text = emit_dot(s, dname);
        } else {
          ModelBundle o;
          o.diagrams.emplace(dname, s);
          text = emit_json(o);
        }
      } else {
        CausalLoopGraph cl = to_causal_loop(s);
        text = dot ? emit_dot_causal(cl, dname) : causal_loop_json(cl);
      }
      write_output(out_path, text, out);
      return kOk;
    }
    if (*compose) {
      ModelBundle b = load_bundle(bundle_path, with);
      std::string pname = pick_name(b.patterns, pattern_name, "pattern");
      const WiringPattern& p = b.patterns.at(pname);
      std::vector<OpenStockFlow> opens;
      for (const auto& box : p.boxes) opens.push_back(b.open_diagram(box.name));
      OpenStockFlow composed = oapply(p, opens);
      std::string name = result_name.empty() ? pname : result_name;
      ModelBundle o;
      o.diagrams.emplace(name, composed.apex);
      if (!p.outer_ports.empty()) {
        OpenSpec spec{name, {}};
        for (std::size_t k = 0; k < p.outer_ports.size(); ++k) {
          std::string fname = name + "_" + p.outer_ports[k];
          o.feet.emplace(fname, composed.feet[k]);
          spec.feet.push_back(fname);
        }
        o.open.emplace(name, std::move(spec));
      }
      o.parameters = b.parameters;
      o.initial_states = b.initial_states;
      o.dynamics = b.dynamics;
      write_output(out_path, emit_json(o), out);
      return kOk;
    }
    if (*stratify_cmd) {
      ModelBundle type_bundle = load_bundle(type_path);
      auto typed_from = [&](const std::string& path) {
        ModelBundle b = load_bundle(path);
        std::string tname = pick_name(b.typings, "", "typing");
        b.merge(type_bundle);
        return b.typed(tname);
      };
      std::vector<TypedDiagram> typed = {typed_from(aggregate_path)};
      for (const auto& p : strata_paths) typed.push_back(typed_from(p));
      TypedDiagram result = typed_stratify(typed);
      SystemStructureDiagram s = flatten ? flatten_names(result.diagram()) : result.diagram();
      std::string type_name = pick_name(type_bundle.diagrams, "", "diagram");
      ModelBundle o;
      o.diagrams.emplace(result_name, s);
      o.diagrams.emplace(type_name, result.type_system());
      o.typings.emplace("t_" + result_name,
                        TypingSpec{result_name, type_name,
                                   typing_keys(Homomorphism(s.instance(), result.type_system().instance(),
                                                            result.typing().components()))});
      write_output(out_path, emit_json(o), out);
      return kOk;
    }
    if (*graph) {
      ModelBundle b = load_bundle(bundle_path, with);
      std::string text;
      if (!typed_name.empty()) {
        Palettes pal{models::flow_palette(), models::stock_palette(), models::sum_palette()};
        text = emit_dot_typed(b.typed(typed_name), pal, typed_name);
      } else {
        std::string dname = pick_name(b.diagrams, diagram_name, "diagram");
        const SystemStructureDiagram& s = structure_of(b.diagrams.at(dname));
        text = causal ? emit_dot_causal(to_causal_loop(s), dname) : emit_dot(s, dname);
      }
      write_output(out_path, text, out);
      return kOk;
    }
  } catch (const UsageError& e) {
    return fail(kUsage, e.what());
  } catch (const ValidationError& e) {
    return fail(kInvalid, e.what());
  } catch (const RuntimeFailure& e) {
    return fail(kRuntime, e.what());
  }
  return fail(kUsage, "no command given");
}

}  // namespace stockflow::cli
