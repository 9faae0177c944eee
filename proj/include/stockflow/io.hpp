// SPDX-License-Identifier: Apache-2.0
//
// File formats: JSON model bundles, Graphviz DOT and CSV trajectories.
#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stockflow/acset.hpp"
#include "stockflow/causal_loop.hpp"
#include "stockflow/composition.hpp"
#include "stockflow/diagram.hpp"
#include "stockflow/error.hpp"
#include "stockflow/expression.hpp"
#include "stockflow/ode.hpp"
#include "stockflow/stratification.hpp"

namespace stockflow {

inline constexpr std::string_view kBundleFormat = "stockflow-bundle";
inline constexpr int kBundleVersion = 1;

using Diagram = std::variant<SystemStructureDiagram, StockFlowDiagram>;

inline const SystemStructureDiagram& structure_of(const Diagram& d) {
  if (const auto* s = std::get_if<StockFlowDiagram>(&d)) return s->structure();
  return std::get<SystemStructureDiagram>(d);
}

struct OpenSpec {
  std::string apex;
  std::vector<std::string> feet;
  bool operator==(const OpenSpec&) const = default;
};

struct TypingSpec {
  std::string source;
  std::string target;
  TypingKeys components;
  bool operator==(const TypingSpec&) const = default;
};

/// Everything a CLI invocation may need, each section keyed by name.
struct ModelBundle {
  std::map<std::string, Diagram> diagrams;
  std::map<std::string, Foot> feet;
  std::map<std::string, OpenSpec> open;
  std::map<std::string, WiringPattern> patterns;
  std::map<std::string, TypingSpec> typings;
  std::map<std::string, ParameterSet> parameters;
  std::map<std::string, StateVector> initial_states;
  std::map<std::string, std::map<std::string, Expression>> dynamics;

  bool operator==(const ModelBundle&) const = default;

  const Diagram& diagram(const std::string& name) const {
    auto it = diagrams.find(name);
    if (it == diagrams.end()) throw ValidationError("bundle has no diagram '" + name + "'");
    return it->second;
  }

  const StockFlowDiagram& stockflow(const std::string& name) const {
    const auto* d = std::get_if<StockFlowDiagram>(&diagram(name));
    if (!d) throw ValidationError("diagram '" + name + "' has no dynamics");
    return *d;
  }

  TypedDiagram typed(const std::string& name) const {
    auto it = typings.find(name);
    if (it == typings.end()) throw ValidationError("bundle has no typing '" + name + "'");
    const auto& src = structure_of(diagram(it->second.source));
    const auto& tgt = structure_of(diagram(it->second.target));
    try {
      return make_typed(src, tgt, it->second.components);
    } catch (const ValidationError& e) {
      throw ValidationError("typing '" + name + "': " + e.what());
    }
  }

  OpenStockFlow open_diagram(const std::string& name) const {
    auto it = open.find(name);
    if (it == open.end()) throw ValidationError("bundle has no open diagram '" + name + "'");
    std::vector<Foot> fs;
    for (const auto& f : it->second.feet) {
      auto ft = feet.find(f);
      if (ft == feet.end()) throw ValidationError("open diagram '" + name + "' uses unknown foot '" + f + "'");
      fs.push_back(ft->second);
    }
    return stockflow::open_diagram(stockflow(it->second.apex), fs);
  }

  /// Adds the sections of `other`; a name present in both must carry equal
  /// content.
  void merge(const ModelBundle& other) {
    auto join = [](auto& mine, const auto& theirs, std::string_view section) {
      for (const auto& [k, v] : theirs) {
        auto [it, fresh] = mine.emplace(k, v);
        if (!fresh && !(it->second == v))
          throw ValidationError("conflicting " + std::string(section) + " entry '" + k + "'");
      }
    };
    join(diagrams, other.diagrams, "diagrams");
    join(feet, other.feet, "feet");
    join(open, other.open, "open");
    join(patterns, other.patterns, "patterns");
    join(typings, other.typings, "typings");
    join(parameters, other.parameters, "parameters");
    join(initial_states, other.initial_states, "initial_states");
    join(dynamics, other.dynamics, "dynamics");
  }
};

/// Cross-reference problems in a bundle, one message per problem.
inline std::vector<std::string> bundle_violations(const ModelBundle& b) {
  std::vector<std::string> out;
  for (const auto& [name, d] : b.diagrams)
    for (const auto& v : validate_instance(structure_of(d).instance())) out.push_back("diagram " + name + ": " + v);
  for (const auto& [name, t] : b.typings) {
    try {
      (void)b.typed(name);
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  }
  for (const auto& [name, o] : b.open) {
    try {
      (void)b.open_diagram(name);
    } catch (const Error& e) {
      out.push_back("open diagram " + name + ": " + e.what());
    }
  }
  for (const auto& [name, p] : b.patterns) {
    try {
      p.validate();
    } catch (const Error& e) {
      out.push_back("pattern " + name + ": " + e.what());
    }
  }
  for (const auto& [name, p] : b.parameters)
    for (const auto& [k, v] : p)
      if (!std::isfinite(v)) out.push_back("parameters " + name + ": '" + k + "' is not finite");
  return out;
}

// ---------------------------------------------------------------------------
// JSON.

namespace detail {

using nlohmann::json;

inline void require_unique_names(const Instance& g) {
  for (auto [ob, what] : {std::pair{"S", "stock"}, std::pair{"F", "flow"}, std::pair{"V", "variable"},
                          std::pair{"SV", "sum variable"}}) {
    std::set<std::string> seen;
    for (const auto& n : g.names(ob))
      if (!seen.insert(n).second) throw ValidationError("cannot serialize: duplicate " + std::string(what) + " '" + n + "'");
  }
}

inline json pairs_json(const Instance& g, std::string_view m1, std::string_view o1, std::string_view m2,
                       std::string_view o2, std::string_view object) {
  json arr = json::array();
  for (Part p = 1; p <= g.nparts(object); ++p)
    arr.push_back(json::array({g.name(o1, g.subpart(m1, p)), g.name(o2, g.subpart(m2, p))}));
  return arr;
}

inline json diagram_json(const Diagram& d) {
  const Instance& g = structure_of(d).instance();
  require_unique_names(g);
  const auto* sf = std::get_if<StockFlowDiagram>(&d);
  json j;
  j["kind"] = sf ? "stock-flow" : "system-structure";
  j["stocks"] = g.names("S");
  j["sums"] = g.names("SV");
  json flows = json::array();
  for (Part f = 1; f <= g.nparts("F"); ++f) {
    json jf{{"name", g.name("F", f)}, {"variable", g.name("V", g.subpart("fv", f))}};
    if (auto up = g.incident("ofn", f); !up.empty()) jf["upstream"] = g.name("S", g.subpart("os", up.front()));
    if (auto down = g.incident("ifn", f); !down.empty()) jf["downstream"] = g.name("S", g.subpart("is", down.front()));
    flows.push_back(std::move(jf));
  }
  j["flows"] = std::move(flows);
  json vars = json::array();
  for (Part v = 1; v <= g.nparts("V"); ++v) {
    json jv{{"name", g.name("V", v)}};
    if (sf) jv["expression"] = sf->expression(v).to_string();
    vars.push_back(std::move(jv));
  }
  j["variables"] = std::move(vars);
  json in = json::array(), out = json::array();
  for (Part i = 1; i <= g.nparts("I"); ++i) in.push_back(g.name("F", g.subpart("ifn", i)));
  for (Part o = 1; o <= g.nparts("O"); ++o) out.push_back(g.name("F", g.subpart("ofn", o)));
  j["inflows"] = std::move(in);
  j["outflows"] = std::move(out);
  j["sum_links"] = pairs_json(g, "lss", "S", "lssv", "SV", "LS");
  j["variable_links"] = pairs_json(g, "lvs", "S", "lvv", "V", "LV");
  j["sum_variable_links"] = pairs_json(g, "lsvsv", "SV", "lsvv", "V", "LSV");
  return j;
}

/// Reads JSON values while tracking a path for error messages.
struct Reader {
  const json& j;
  std::string path;

  [[noreturn]] void fail(const std::string& msg) const { throw ValidationError(path + ": " + msg); }

  Reader at(const std::string& key) const {
    if (!j.is_object()) fail("expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail("missing field '" + key + "'");
    return {*it, path + "." + key};
  }
  std::optional<Reader> maybe(const std::string& key) const {
    if (!j.is_object()) fail("expected an object");
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    return Reader{*it, path + "." + key};
  }
  Reader at(std::size_t i) const { return {j.at(i), path + "[" + std::to_string(i) + "]"}; }

  std::string str() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  double num() const {
    if (!j.is_number()) fail("expected a number");
    return j.get<double>();
  }
  std::size_t size() const {
    if (!j.is_array()) fail("expected an array");
    return j.size();
  }
  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).str());
    return out;
  }
  std::pair<std::string, std::string> pair() const {
    if (size() != 2) fail("expected a pair");
    return {at(0).str(), at(1).str()};
  }
  template <typename F>
  void each_field(F&& f) const {
    if (!j.is_object()) fail("expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) f(it.key(), Reader{it.value(), path + "." + it.key()});
  }
  void only(std::initializer_list<std::string_view> keys) const {
    if (!j.is_object()) fail("expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) fail("unknown field '" + it.key() + "'");
  }
};

inline Diagram diagram_from(const Reader& r) {
  r.only({"kind", "stocks", "sums", "flows", "variables", "inflows", "outflows", "sum_links", "variable_links",
          "sum_variable_links"});
  std::string kind = r.at("kind").str();
  if (kind != "stock-flow" && kind != "system-structure") r.at("kind").fail("unknown diagram kind '" + kind + "'");
  const bool with_dynamics = kind == "stock-flow";

  Instance g(schema_stockflow());
  std::map<std::string, Part> S, F, V, SV;
  auto declare = [](std::map<std::string, Part>& table, const std::string& n, Part p, const Reader& where) {
    if (!table.emplace(n, p).second) where.fail("duplicate name '" + n + "'");
  };
  auto find = [](const std::map<std::string, Part>& table, const std::string& n, const Reader& where) {
    auto it = table.find(n);
    if (it == table.end()) where.fail("unknown name '" + n + "'");
    return it->second;
  };

  Reader stocks = r.at("stocks");
  for (std::size_t k = 0; k < stocks.size(); ++k) {
    auto n = stocks.at(k).str();
    declare(S, n, g.add_part("S", n), stocks.at(k));
  }
  Reader sums = r.at("sums");
  for (std::size_t k = 0; k < sums.size(); ++k) {
    auto n = sums.at(k).str();
    declare(SV, n, g.add_part("SV", n), sums.at(k));
  }
  Reader vars = r.at("variables");
  std::vector<Expression> exprs;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    Reader v = vars.at(k);
    v.only({"name", "expression"});
    auto n = v.at("name").str();
    declare(V, n, g.add_part("V", n), v.at("name"));
    auto e = v.maybe("expression");
    if (with_dynamics != e.has_value())
      v.fail(with_dynamics ? "missing expression" : "a system-structure diagram has no expressions");
    if (e) {
      try {
        exprs.push_back(parse_expression(e->str()));
      } catch (const ParseError& pe) {
        e->fail(pe.what());
      }
    }
  }
  Reader flows = r.at("flows");
  std::map<Part, std::string> upstream, downstream;
  for (std::size_t k = 0; k < flows.size(); ++k) {
    Reader f = flows.at(k);
    f.only({"name", "variable", "upstream", "downstream"});
    auto n = f.at("name").str();
    Part p = g.add_part("F", n);
    declare(F, n, p, f.at("name"));
    g.set_subpart("fv", p, find(V, f.at("variable").str(), f.at("variable")));
    if (auto u = f.maybe("upstream")) upstream[p] = u->str();
    if (auto d = f.maybe("downstream")) downstream[p] = d->str();
  }

  auto rows = [&](const char* key, const char* ob, const char* stock_m, const char* flow_m,
                  std::map<Part, std::string>& ends) {
    Reader list = r.at(key);
    for (std::size_t k = 0; k < list.size(); ++k) {
      Part f = find(F, list.at(k).str(), list.at(k));
      auto it = ends.find(f);
      if (it == ends.end()) list.at(k).fail("flow '" + list.at(k).str() + "' has no matching stock end");
      Part row = g.add_part(ob);
      g.set_subpart(stock_m, row, find(S, it->second, list.at(k)));
      g.set_subpart(flow_m, row, f);
      ends.erase(it);
    }
    if (!ends.empty()) list.fail("flow '" + g.name("F", ends.begin()->first) + "' is missing");
  };
  rows("inflows", "I", "is", "ifn", downstream);
  rows("outflows", "O", "os", "ofn", upstream);

  auto links = [&](const char* key, const char* ob, const char* m1, std::map<std::string, Part>& t1, const char* m2,
                   std::map<std::string, Part>& t2) {
    Reader list = r.at(key);
    for (std::size_t k = 0; k < list.size(); ++k) {
      auto [a, b] = list.at(k).pair();
      Part row = g.add_part(ob);
      g.set_subpart(m1, row, find(t1, a, list.at(k)));
      g.set_subpart(m2, row, find(t2, b, list.at(k)));
    }
  };
  links("sum_links", "LS", "lss", S, "lssv", SV);
  links("variable_links", "LV", "lvs", S, "lvv", V);
  links("sum_variable_links", "LSV", "lsvsv", SV, "lsvv", V);

  try {
    SystemStructureDiagram s(std::move(g));
    if (!with_dynamics) return s;
    return StockFlowDiagram(std::move(s), std::move(exprs));
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
}

inline json foot_json(const Foot& f) {
  const Instance& x = f.instance();
  json links = json::array();
  for (Part l = 1; l <= x.nparts("LS"); ++l)
    links.push_back(json::array({x.name("S", x.subpart("lss", l)), x.name("SV", x.subpart("lssv", l))}));
  return json{{"stocks", x.names("S")}, {"sums", x.names("SV")}, {"links", std::move(links)}};
}

inline Foot foot_from(const Reader& r) {
  r.only({"stocks", "sums", "links"});
  std::vector<std::pair<std::string, std::string>> links;
  Reader l = r.at("links");
  for (std::size_t k = 0; k < l.size(); ++k) links.push_back(l.at(k).pair());
  try {
    return foot(r.at("stocks").strings(), r.at("sums").strings(), links);
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
}

inline json pattern_json(const WiringPattern& p) {
  json boxes = json::array();
  for (const auto& b : p.boxes) boxes.push_back(json{{"name", b.name}, {"ports", b.ports}});
  return json{{"junctions", p.junctions}, {"boxes", std::move(boxes)}, {"outer_ports", p.outer_ports}};
}

inline WiringPattern pattern_from(const Reader& r) {
  r.only({"junctions", "boxes", "outer_ports"});
  WiringPattern p;
  p.junctions = r.at("junctions").strings();
  Reader boxes = r.at("boxes");
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    boxes.at(k).only({"name", "ports"});
    p.boxes.push_back({boxes.at(k).at("name").str(), boxes.at(k).at("ports").strings()});
  }
  p.outer_ports = r.at("outer_ports").strings();
  try {
    p.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return p;
}

template <typename Map>
json number_table(const Map& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

inline std::map<std::string, double> number_table_from(const Reader& r) {
  std::map<std::string, double> out;
  r.each_field([&](const std::string& k, const Reader& v) {
    double x = v.num();
    if (!std::isfinite(x)) v.fail("value is not finite");
    out[k] = x;
  });
  return out;
}

}  // namespace detail

/// Canonical JSON text: sorted keys, two-space indent, LF, trailing newline.
inline std::string emit_json(const ModelBundle& b) {
  using detail::json;
  json j = json::object();
  j["format"] = kBundleFormat;
  j["version"] = kBundleVersion;
  auto section = [&](const char* key, const auto& m, auto&& enc) {
    if (m.empty()) return;
    json s = json::object();
    for (const auto& [k, v] : m) s[k] = enc(v);
    j[key] = std::move(s);
  };
  section("diagrams", b.diagrams, [](const Diagram& d) { return detail::diagram_json(d); });
  section("feet", b.feet, [](const Foot& f) { return detail::foot_json(f); });
  section("open", b.open, [](const OpenSpec& o) { return json{{"apex", o.apex}, {"feet", o.feet}}; });
  section("patterns", b.patterns, [](const WiringPattern& p) { return detail::pattern_json(p); });
  section("typings", b.typings, [](const TypingSpec& t) {
    return json{{"source", t.source}, {"target", t.target}, {"components", t.components}};
  });
  section("parameters", b.parameters, [](const ParameterSet& p) { return detail::number_table(p); });
  section("initial_states", b.initial_states, [](const StateVector& u) { return detail::number_table(u); });
  section("dynamics", b.dynamics, [](const std::map<std::string, Expression>& m) {
    json d = json::object();
    for (const auto& [k, e] : m) d[k] = e.to_string();
    return d;
  });
  return j.dump(2) + "\n";
}

inline ModelBundle parse_json(std::string_view text) {
  using detail::json;
  using detail::Reader;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  Reader r{j, "$"};
  r.only({"format", "version", "diagrams", "feet", "open", "patterns", "typings", "parameters", "initial_states",
          "dynamics"});
  if (r.at("format").str() != kBundleFormat) r.at("format").fail("not a " + std::string(kBundleFormat) + " file");
  const json& ver = r.at("version").j;
  if (!ver.is_number_integer() || ver.get<long long>() != kBundleVersion)
    r.at("version").fail("unsupported version " + ver.dump() + " (expected " + std::to_string(kBundleVersion) + ")");

  ModelBundle b;
  auto section = [&](const char* key, auto&& dec) {
    if (auto s = r.maybe(key)) s->each_field(dec);
  };
  section("diagrams", [&](const std::string& k, const Reader& v) { b.diagrams.emplace(k, detail::diagram_from(v)); });
  section("feet", [&](const std::string& k, const Reader& v) { b.feet.emplace(k, detail::foot_from(v)); });
  section("open", [&](const std::string& k, const Reader& v) {
    v.only({"apex", "feet"});
    b.open.emplace(k, OpenSpec{v.at("apex").str(), v.at("feet").strings()});
  });
  section("patterns", [&](const std::string& k, const Reader& v) { b.patterns.emplace(k, detail::pattern_from(v)); });
  section("typings", [&](const std::string& k, const Reader& v) {
    v.only({"source", "target", "components"});
    TypingSpec t{v.at("source").str(), v.at("target").str(), {}};
    v.at("components").each_field([&](const std::string& ob, const Reader& c) {
      if (!schema_stockflow().find_object(ob)) c.fail("unknown object '" + ob + "'");
      t.components[ob] = c.strings();
    });
    b.typings.emplace(k, std::move(t));
  });
  section("parameters",
          [&](const std::string& k, const Reader& v) { b.parameters.emplace(k, detail::number_table_from(v)); });
  section("initial_states",
          [&](const std::string& k, const Reader& v) { b.initial_states.emplace(k, detail::number_table_from(v)); });
  section("dynamics", [&](const std::string& k, const Reader& v) {
    std::map<std::string, Expression> m;
    v.each_field([&](const std::string& var, const Reader& e) {
      try {
        m.emplace(var, parse_expression(e.str()));
      } catch (const ParseError& pe) {
        e.fail(pe.what());
      }
    });
    b.dynamics.emplace(k, std::move(m));
  });
  return b;
}

// ---------------------------------------------------------------------------
// DOT.

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct DotColors {
  std::vector<std::string> stock, sum, flow;  // per element; empty means default
};

/// Stocks are filled squares, sums circles. A flow is drawn as two edges
/// meeting at an invisible waypoint for its variable; missing ends are
/// drawn as clouds.
inline std::string dot_body(const Instance& g, const DotColors& colors, std::string_view title) {
  std::ostringstream os;
  os << "digraph " << dot_quote(title) << " {\n";
  os << "  graph [rankdir=LR];\n";
  os << "  node [fontname=\"Helvetica\"];\n";
  os << "  edge [fontname=\"Helvetica\"];\n";
  auto color = [](const std::vector<std::string>& c, Part p, std::string_view fallback) {
    return c.empty() ? std::string(fallback) : c[p - 1];
  };
  for (Part s = 1; s <= g.nparts("S"); ++s)
    os << "  s" << s << " [label=" << dot_quote(g.name("S", s)) << ", shape=square, style=filled, fillcolor="
       << dot_quote(color(colors.stock, s, "lightgrey")) << "];\n";
  for (Part sv = 1; sv <= g.nparts("SV"); ++sv)
    os << "  sv" << sv << " [label=" << dot_quote(g.name("SV", sv)) << ", shape=circle, color="
       << dot_quote(color(colors.sum, sv, "black")) << "];\n";
  // Variables with a flow are drawn at the waypoint of their first flow.
  std::vector<std::string> var_node(g.nparts("V") + 1);
  for (Part f = 1; f <= g.nparts("F"); ++f) {
    Part v = g.subpart("fv", f);
    if (var_node[v].empty()) var_node[v] = "v" + std::to_string(f);
    os << "  v" << f << " [label=\"\", shape=point, width=0.01, style=invis];\n";
  }
  for (Part v = 1; v <= g.nparts("V"); ++v)
    if (var_node[v].empty()) {
      var_node[v] = "a" + std::to_string(v);
      os << "  " << var_node[v] << " [label=" << dot_quote(g.name("V", v)) << ", shape=plaintext];\n";
    }
  for (Part f = 1; f <= g.nparts("F"); ++f) {
    std::string c = dot_quote(color(colors.flow, f, "black"));
    auto up = g.incident("ofn", f);
    auto down = g.incident("ifn", f);
    std::string from = up.empty() ? "u" + std::to_string(f) : "s" + std::to_string(g.subpart("os", up.front()));
    std::string to = down.empty() ? "d" + std::to_string(f) : "s" + std::to_string(g.subpart("is", down.front()));
    if (up.empty()) os << "  " << from << " [label=\"\", shape=doublecircle, width=0.2, style=dashed];\n";
    if (down.empty()) os << "  " << to << " [label=\"\", shape=doublecircle, width=0.2, style=dashed];\n";
    os << "  " << from << " -> v" << f << " [arrowhead=none, penwidth=3, color=" << c << "];\n";
    os << "  v" << f << " -> " << to << " [label=" << dot_quote(flow_label(g.name("F", f))) << ", penwidth=3, color=" << c
       << "];\n";
  }
  for (Part l = 1; l <= g.nparts("LS"); ++l)
    os << "  s" << g.subpart("lss", l) << " -> sv" << g.subpart("lssv", l) << " [style=dashed];\n";
  for (Part l = 1; l <= g.nparts("LV"); ++l)
    os << "  s" << g.subpart("lvs", l) << " -> " << var_node[g.subpart("lvv", l)] << " [color=blue];\n";
  for (Part l = 1; l <= g.nparts("LSV"); ++l)
    os << "  sv" << g.subpart("lsvsv", l) << " -> " << var_node[g.subpart("lsvv", l)] << " [color=blue, style=dashed];\n";
  os << "}\n";
  return os.str();
}

}  // namespace detail

inline std::string emit_dot(const SystemStructureDiagram& d, std::string_view title = "stockflow") {
  return detail::dot_body(d.instance(), {}, title);
}

inline std::string emit_dot(const StockFlowDiagram& d, std::string_view title = "stockflow") {
  return emit_dot(d.structure(), title);
}

inline std::string emit_dot_causal(const CausalLoopGraph& cl, std::string_view title = "causal_loop") {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(title) << " {\n";
  os << "  node [fontname=\"Helvetica\", shape=plaintext];\n";
  for (Part n = 1; n <= cl.nodes(); ++n) os << "  n" << n << " [label=" << detail::dot_quote(cl.inst.name("N", n)) << "];\n";
  for (Part e = 1; e <= cl.edges(); ++e) os << "  n" << cl.source(e) << " -> n" << cl.target(e) << ";\n";
  os << "}\n";
  return os.str();
}

struct Palettes {
  std::vector<std::string> flow;
  std::vector<std::string> stock;
  std::vector<std::string> sum;
};

/// Colors every stock, sum variable and flow by its type.
inline std::string emit_dot_typed(const TypedDiagram& t, const Palettes& palettes, std::string_view title = "typed") {
  const Instance& type = t.type_system().instance();
  auto pick = [&](const std::vector<std::string>& pal, std::string_view ob, std::string_view what) {
    if (pal.size() < type.nparts(ob))
      throw ValidationError(std::string(what) + " palette has " + std::to_string(pal.size()) + " colors but the type system has " +
                            std::to_string(type.nparts(ob)) + " types");
    std::vector<std::string> out;
    for (Part x : t.typing().component(ob)) out.push_back(pal[x - 1]);
    return out;
  };
  detail::DotColors c{pick(palettes.stock, "S", "stock"), pick(palettes.sum, "SV", "sum"), pick(palettes.flow, "F", "flow")};
  return detail::dot_body(t.diagram().instance(), c, title);
}

// ---------------------------------------------------------------------------
// CSV.

inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ValidationError("csv line " + std::to_string(lineno) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

/// Header "t,<stock names>", one row per time point, shortest round-trip
/// decimal for every value.
inline std::string emit_csv(const Trajectory& tr) {
  std::string out = "t";
  for (const auto& n : tr.names) out += "," + detail::csv_field(n);
  out += "\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out += format_double(tr.times[k]);
    for (double x : tr.states[k]) out += "," + format_double(x);
    out += "\n";
  }
  return out;
}

inline Trajectory parse_csv(std::string_view text) {
  Trajectory tr;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++lineno;
    if (line.empty()) continue;
    auto fields = detail::csv_split(line, lineno);
    if (lineno == 1) {
      if (fields.front() != "t") throw ValidationError("csv: header must start with 't'");
      tr.names.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != tr.names.size() + 1)
      throw ValidationError("csv line " + std::to_string(lineno) + ": expected " +
                            std::to_string(tr.names.size() + 1) + " fields");
    std::vector<double> row;
    for (const auto& f : fields) {
      double v = 0.0;
      auto r = std::from_chars(f.data(), f.data() + f.size(), v);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size())
        throw ValidationError("csv line " + std::to_string(lineno) + ": bad number '" + f + "'");
      row.push_back(v);
    }
    tr.times.push_back(row.front());
    tr.states.emplace_back(row.begin() + 1, row.end());
  }
  if (lineno == 0) throw ValidationError("csv: empty input");
  return tr;
}

}  // namespace stockflow
