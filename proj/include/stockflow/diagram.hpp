// SPDX-License-Identifier: Apache-2.0
//
// System structure diagrams, stock-flow diagrams, interfaces ("feet") and
// open diagrams, with the builders that mirror the block syntax
//   stocks  : name => (inflows, outflows, linked variables, linked sums)
//   flows   : flow => variable
//   dynamics: variable => expression
//   sums    : sum => variables it feeds
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stockflow/acset.hpp"
#include "stockflow/error.hpp"
#include "stockflow/expression.hpp"

namespace stockflow {

struct StockSpec {
  std::string name;
  std::vector<std::string> inflows;
  std::vector<std::string> outflows;
  std::vector<std::string> variable_links;
  std::vector<std::string> sum_links;
};

struct FlowSpec {
  std::string name;
  std::string variable;
};

struct VariableSpec {
  std::string name;
  Expression expression;
};

struct SumSpec {
  std::string name;
  std::vector<std::string> variables;
};

namespace detail {

inline bool is_placeholder(std::string_view n) { return n == "F_NONE" || n == "V_NONE" || n == "SV_NONE"; }

/// Object indices in the stock-flow schema, resolved once.
struct SF {
  static std::size_t ob(std::string_view o) { return schema_stockflow().object_index(o); }
  static std::size_t mor(std::string_view m) { return schema_stockflow().morphism_index(m); }
};

inline void require_unique(const Instance& inst, std::string_view object, std::string_view what) {
  std::set<std::string> seen;
  for (const auto& n : inst.names(object))
    if (!seen.insert(n).second) throw ValidationError("duplicate " + std::string(what) + " name '" + n + "'");
}

/// Stocks, sum variables and auxiliary variables share one namespace because
/// expressions refer to them by name.
inline void require_expression_namespace(const Instance& inst) {
  require_unique(inst, "S", "stock");
  require_unique(inst, "SV", "sum variable");
  require_unique(inst, "V", "variable");
  require_unique(inst, "F", "flow");
  std::map<std::string, std::string> owner;
  for (auto [ob, what] : {std::pair{"S", "stock"}, std::pair{"SV", "sum variable"}, std::pair{"V", "variable"}})
    for (const auto& n : inst.names(ob)) {
      if (n == kTimeSymbol) throw ValidationError(std::string(what) + " may not be named '" + n + "'");
      auto [it, fresh] = owner.emplace(n, what);
      if (!fresh) throw ValidationError("duplicate name '" + n + "' used by a " + it->second + " and a " + what);
    }
}

inline Part unique_lookup(const Instance& inst, std::string_view object, std::string_view name, std::string_view what) {
  auto hits = inst.lookup(object, name);
  if (hits.empty()) throw ValidationError("unknown " + std::string(what) + " '" + std::string(name) + "'");
  if (hits.size() > 1) throw ValidationError("ambiguous " + std::string(what) + " '" + std::string(name) + "'");
  return hits.front();
}

}  // namespace detail

/// A stock-flow instance without expressions. Its instance always passes
/// validate_instance.
class SystemStructureDiagram {
 public:
  SystemStructureDiagram() : inst_(schema_stockflow()) {}
  explicit SystemStructureDiagram(Instance inst) : inst_(std::move(inst)) {
    if (!(inst_.schema() == schema_stockflow()))
      throw ValidationError("system structure diagram needs a stock-flow instance, got " + inst_.schema().name);
    auto v = validate_instance(inst_);
    if (!v.empty()) throw ValidationError("invalid diagram: " + v.front());
  }

  const Instance& instance() const { return inst_; }
  std::size_t count(std::string_view object) const { return inst_.nparts(object); }
  std::vector<std::string> stock_names() const { return inst_.names("S"); }

  bool operator==(const SystemStructureDiagram&) const = default;

 private:
  Instance inst_;
};

/// Identifiers of `e` that break the linkage rule for variable `v`: a stock
/// or sum variable not linked to v, or another auxiliary variable. Anything
/// else (other than t) is a parameter.
inline std::vector<std::string> linkage_violations(const Instance& inst, Part v, const Expression& e) {
  std::set<std::string> linked;
  for (Part lv : inst.incident("lvv", v)) linked.insert(inst.name("S", inst.subpart("lvs", lv)));
  for (Part lsv : inst.incident("lsvv", v)) linked.insert(inst.name("SV", inst.subpart("lsvsv", lsv)));
  std::set<std::string> stocks, sums, vars;
  for (auto& n : inst.names("S")) stocks.insert(n);
  for (auto& n : inst.names("SV")) sums.insert(n);
  for (auto& n : inst.names("V")) vars.insert(n);
  std::vector<std::string> out;
  const std::string& vname = inst.name("V", v);
  for (const auto& id : e.identifiers()) {
    if (id == kTimeSymbol || linked.count(id)) continue;
    if (stocks.count(id)) out.push_back(vname + ": stock '" + id + "' is not linked to this variable");
    else if (sums.count(id)) out.push_back(vname + ": sum variable '" + id + "' is not linked to this variable");
    else if (vars.count(id)) out.push_back(vname + ": refers to auxiliary variable '" + id + "'");
  }
  return out;
}

/// A system structure diagram plus one expression per auxiliary variable,
/// indexed like the V table.
class StockFlowDiagram {
 public:
  StockFlowDiagram() = default;
  StockFlowDiagram(SystemStructureDiagram structure, std::vector<Expression> expressions)
      : structure_(std::move(structure)), exprs_(std::move(expressions)) {
    const Instance& inst = structure_.instance();
    if (exprs_.size() != inst.nparts("V"))
      throw ValidationError("expected " + std::to_string(inst.nparts("V")) + " expressions, got " +
                            std::to_string(exprs_.size()));
    detail::require_expression_namespace(inst);
    for (Part v = 1; v <= exprs_.size(); ++v) {
      auto bad = linkage_violations(inst, v, exprs_[v - 1]);
      if (!bad.empty()) throw ValidationError("linkage error: " + bad.front());
    }
  }

  const SystemStructureDiagram& structure() const { return structure_; }
  const Instance& instance() const { return structure_.instance(); }
  const std::vector<Expression>& expressions() const { return exprs_; }
  const Expression& expression(Part v) const { return exprs_.at(v - 1); }
  std::size_t count(std::string_view object) const { return structure_.count(object); }
  std::vector<std::string> stock_names() const { return structure_.stock_names(); }

  bool operator==(const StockFlowDiagram&) const = default;

 private:
  SystemStructureDiagram structure_;
  std::vector<Expression> exprs_;
};

namespace detail {

/// Shared by both builders. `var_order` fixes the V table order.
inline Instance build_instance(const std::vector<StockSpec>& stocks, const std::vector<FlowSpec>& flows,
                               const std::vector<std::string>& var_order, const std::vector<SumSpec>& sums) {
  Instance g(schema_stockflow());
  std::map<std::string, Part> S, F, V, SV;
  auto declare = [](std::map<std::string, Part>& table, const std::string& n, Part p, std::string_view what) {
    if (n.empty()) throw ValidationError(std::string("empty ") + std::string(what) + " name");
    if (!table.emplace(n, p).second) throw ValidationError("duplicate " + std::string(what) + " name '" + n + "'");
  };
  auto resolve = [](const std::map<std::string, Part>& table, const std::string& n, std::string_view what,
                    std::string_view where) {
    auto it = table.find(n);
    if (it == table.end())
      throw ValidationError("unresolved " + std::string(what) + " '" + n + "' referenced by " + std::string(where));
    return it->second;
  };

  for (const auto& s : stocks) declare(S, s.name, g.add_part("S", s.name), "stock");
  for (const auto& v : var_order) declare(V, v, g.add_part("V", v), "variable");
  for (const auto& f : flows) {
    Part p = g.add_part("F", f.name);
    declare(F, f.name, p, "flow");
    g.set_subpart("fv", p, resolve(V, f.variable, "variable", "flow " + f.name));
  }
  for (const auto& sv : sums) declare(SV, sv.name, g.add_part("SV", sv.name), "sum variable");

  std::map<Part, std::string> downstream_of, upstream_of;
  for (const auto& s : stocks) {
    for (const auto& f : s.inflows) {
      if (is_placeholder(f)) continue;
      Part fp = resolve(F, f, "flow", "stock " + s.name);
      if (auto [it, fresh] = downstream_of.emplace(fp, s.name); !fresh)
        throw ValidationError("flow '" + f + "' flows into both " + it->second + " and " + s.name);
      Part i = g.add_part("I");
      g.set_subpart("is", i, S[s.name]);
      g.set_subpart("ifn", i, fp);
    }
  }
  for (const auto& s : stocks) {
    for (const auto& f : s.outflows) {
      if (is_placeholder(f)) continue;
      Part fp = resolve(F, f, "flow", "stock " + s.name);
      if (auto [it, fresh] = upstream_of.emplace(fp, s.name); !fresh)
        throw ValidationError("flow '" + f + "' flows out of both " + it->second + " and " + s.name);
      Part o = g.add_part("O");
      g.set_subpart("os", o, S[s.name]);
      g.set_subpart("ofn", o, fp);
    }
  }
  for (const auto& s : stocks)
    for (const auto& v : s.variable_links) {
      if (is_placeholder(v)) continue;
      Part lv = g.add_part("LV");
      g.set_subpart("lvs", lv, S[s.name]);
      g.set_subpart("lvv", lv, resolve(V, v, "variable", "stock " + s.name));
    }
  for (const auto& s : stocks)
    for (const auto& sv : s.sum_links) {
      if (is_placeholder(sv)) continue;
      Part ls = g.add_part("LS");
      g.set_subpart("lss", ls, S[s.name]);
      g.set_subpart("lssv", ls, resolve(SV, sv, "sum variable", "stock " + s.name));
    }
  for (const auto& sv : sums)
    for (const auto& v : sv.variables) {
      if (is_placeholder(v)) continue;
      Part lsv = g.add_part("LSV");
      g.set_subpart("lsvsv", lsv, SV[sv.name]);
      g.set_subpart("lsvv", lsv, resolve(V, v, "variable", "sum variable " + sv.name));
    }
  require_expression_namespace(g);
  return g;
}

}  // namespace detail

/// Variables are created in the order they first appear in `flows`.
inline SystemStructureDiagram build_system_structure(const std::vector<StockSpec>& stocks,
                                                     const std::vector<FlowSpec>& flows,
                                                     const std::vector<SumSpec>& sums) {
  std::vector<std::string> vars;
  for (const auto& f : flows)
    if (std::find(vars.begin(), vars.end(), f.variable) == vars.end()) vars.push_back(f.variable);
  return SystemStructureDiagram(detail::build_instance(stocks, flows, vars, sums));
}

/// Variables are created in the order of `variables`.
inline StockFlowDiagram build_stockflow(const std::vector<StockSpec>& stocks, const std::vector<FlowSpec>& flows,
                                        const std::vector<VariableSpec>& variables, const std::vector<SumSpec>& sums) {
  std::vector<std::string> order;
  std::vector<Expression> exprs;
  for (const auto& v : variables) {
    order.push_back(v.name);
    exprs.push_back(v.expression);
  }
  return StockFlowDiagram(SystemStructureDiagram(detail::build_instance(stocks, flows, order, sums)), std::move(exprs));
}

/// Forgets the expressions.
inline SystemStructureDiagram to_system_structure(const StockFlowDiagram& d) { return d.structure(); }

/// Attaches one expression per auxiliary variable, keyed by variable name.
inline StockFlowDiagram attach_dynamics(const SystemStructureDiagram& s,
                                        const std::map<std::string, Expression>& exprs) {
  const Instance& inst = s.instance();
  detail::require_expression_namespace(inst);
  std::vector<Expression> ordered;
  std::set<std::string> used;
  for (Part v = 1; v <= inst.nparts("V"); ++v) {
    const std::string& n = inst.name("V", v);
    auto it = exprs.find(n);
    if (it == exprs.end()) throw ValidationError("no expression for variable '" + n + "'");
    ordered.push_back(it->second);
    used.insert(n);
  }
  for (const auto& [n, e] : exprs)
    if (!used.count(n)) throw ValidationError("expression given for unknown variable '" + n + "'");
  return StockFlowDiagram(s, std::move(ordered));
}

/// Rewrites tuple-formatted names such as "(S, F)" into the concatenation of
/// their components ("SF"). Already-flat names are kept, so the operation is
/// idempotent.
inline SystemStructureDiagram flatten_names(const SystemStructureDiagram& s) {
  Instance inst = s.instance();
  for (std::string_view ob : {"S", "F", "V", "SV"}) {
    std::size_t o = schema_stockflow().object_index(ob);
    for (Part p = 1; p <= inst.nparts(o); ++p) inst.set_name(o, p, strip_name_punctuation(inst.name(o, p)));
  }
  detail::require_expression_namespace(inst);
  return SystemStructureDiagram(std::move(inst));
}

/// Display label for a flow: for a tuple-formatted name, the first component
/// that does not start with "id", or "id" when all of them do.
inline std::string flow_label(std::string_view name) {
  if (name.find('(') == std::string_view::npos) return std::string(name);
  std::string cleaned;
  for (char c : name)
    if (c != '(' && c != ')' && c != ':') cleaned.push_back(c);
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    std::size_t end = cleaned.find(',', start);
    if (end == std::string::npos) end = cleaned.size();
    std::string part = cleaned.substr(start, end - start);
    auto b = part.find_first_not_of(" \t");
    auto e = part.find_last_not_of(" \t");
    part = b == std::string::npos ? "" : part.substr(b, e - b + 1);
    if (part.compare(0, 2, "id") != 0) return part;
    start = end + 1;
  }
  return "id";
}

// ---------------------------------------------------------------------------
// Queries.

inline std::optional<std::string> downstream(const SystemStructureDiagram& d, std::string_view flow) {
  const Instance& g = d.instance();
  Part f = detail::unique_lookup(g, "F", flow, "flow");
  auto in = g.incident("ifn", f);
  if (in.empty()) return std::nullopt;
  return g.name("S", g.subpart("is", in.front()));
}

inline std::optional<std::string> upstream(const SystemStructureDiagram& d, std::string_view flow) {
  const Instance& g = d.instance();
  Part f = detail::unique_lookup(g, "F", flow, "flow");
  auto out = g.incident("ofn", f);
  if (out.empty()) return std::nullopt;
  return g.name("S", g.subpart("os", out.front()));
}

inline std::vector<std::string> inflows_of(const SystemStructureDiagram& d, std::string_view stock) {
  const Instance& g = d.instance();
  Part s = detail::unique_lookup(g, "S", stock, "stock");
  std::vector<std::string> out;
  for (Part i : g.incident("is", s)) out.push_back(g.name("F", g.subpart("ifn", i)));
  return out;
}

inline std::vector<std::string> outflows_of(const SystemStructureDiagram& d, std::string_view stock) {
  const Instance& g = d.instance();
  Part s = detail::unique_lookup(g, "S", stock, "stock");
  std::vector<std::string> out;
  for (Part o : g.incident("os", s)) out.push_back(g.name("F", g.subpart("ofn", o)));
  return out;
}

inline std::optional<std::string> downstream(const StockFlowDiagram& d, std::string_view f) { return downstream(d.structure(), f); }
inline std::optional<std::string> upstream(const StockFlowDiagram& d, std::string_view f) { return upstream(d.structure(), f); }
inline std::vector<std::string> inflows_of(const StockFlowDiagram& d, std::string_view s) { return inflows_of(d.structure(), s); }
inline std::vector<std::string> outflows_of(const StockFlowDiagram& d, std::string_view s) { return outflows_of(d.structure(), s); }

// ---------------------------------------------------------------------------
// Interfaces and open diagrams.

/// An interface: stocks, sum variables and sum links only.
class Foot {
 public:
  Foot() : inst_(schema_interface()) {}
  explicit Foot(Instance inst) : inst_(std::move(inst)) {
    if (!(inst_.schema() == schema_interface())) throw ValidationError("a foot must be an interface instance");
    auto v = validate_instance(inst_);
    if (!v.empty()) throw ValidationError("invalid foot: " + v.front());
  }
  const Instance& instance() const { return inst_; }
  bool operator==(const Foot&) const = default;

 private:
  Instance inst_;
};

inline Foot foot(const std::vector<std::string>& stocks, const std::vector<std::string>& sums,
                 const std::vector<std::pair<std::string, std::string>>& links) {
  Instance x(schema_interface());
  std::map<std::string, Part> S, SV;
  for (const auto& s : stocks)
    if (!S.emplace(s, x.add_part("S", s)).second) throw ValidationError("duplicate foot stock '" + s + "'");
  for (const auto& sv : sums)
    if (!SV.emplace(sv, x.add_part("SV", sv)).second) throw ValidationError("duplicate foot sum variable '" + sv + "'");
  for (const auto& [s, sv] : links) {
    auto si = S.find(s);
    auto vi = SV.find(sv);
    if (si == S.end() || vi == SV.end()) throw ValidationError("dangling foot link " + s + " => " + sv);
    Part l = x.add_part("LS");
    x.set_subpart("lss", l, si->second);
    x.set_subpart("lssv", l, vi->second);
  }
  return Foot(std::move(x));
}

/// Single stock, single sum variable form: foot("S", "N", {{"S", "N"}}).
inline Foot foot(const std::string& stock, const std::string& sum,
                 const std::vector<std::pair<std::string, std::string>>& links) {
  return foot(std::vector<std::string>{stock}, std::vector<std::string>{sum}, links);
}

/// The interface part (stocks, sum variables, sum links) of a diagram.
inline Instance interface_of(const Instance& stockflow) { return restrict_instance(stockflow, schema_interface()); }

/// An apex with feet and legs (foot -> interface part of the apex).
struct OpenStockFlow {
  StockFlowDiagram apex;
  std::vector<Foot> feet;
  std::vector<Homomorphism> legs;
};

/// Builds the leg of one foot into `apex` by unique name matching.
inline Homomorphism leg_by_name(const Instance& apex, const Foot& ft) {
  const Instance& x = ft.instance();
  Instance target = interface_of(apex);
  std::vector<std::vector<Part>> comps(3);
  auto match = [&](std::string_view ob, std::string_view what) {
    std::size_t o = schema_interface().object_index(ob);
    for (Part p = 1; p <= x.nparts(o); ++p) {
      auto hits = apex.lookup(ob, x.name(o, p));
      if (hits.empty()) throw ValidationError("foot " + std::string(what) + " '" + x.name(o, p) + "' not found in apex");
      if (hits.size() > 1) throw ValidationError("foot " + std::string(what) + " '" + x.name(o, p) + "' is ambiguous in apex");
      comps[o].push_back(hits.front());
    }
  };
  match("S", "stock");
  match("SV", "sum variable");
  std::size_t s_ob = schema_interface().object_index("S"), sv_ob = schema_interface().object_index("SV");
  for (Part l = 1; l <= x.nparts("LS"); ++l) {
    Part s = comps[s_ob][x.subpart("lss", l) - 1];
    Part sv = comps[sv_ob][x.subpart("lssv", l) - 1];
    std::vector<Part> hits;
    for (Part al : apex.incident("lss", s))
      if (apex.subpart("lssv", al) == sv) hits.push_back(al);
    std::string desc = apex.name("S", s) + " => " + apex.name("SV", sv);
    if (hits.empty()) throw ValidationError("foot link " + desc + " not found in apex");
    if (hits.size() > 1) throw ValidationError("foot link " + desc + " is ambiguous in apex");
    comps[schema_interface().object_index("LS")].push_back(hits.front());
  }
  return Homomorphism(x, std::move(target), std::move(comps));
}

inline OpenStockFlow open_diagram(const StockFlowDiagram& d, const std::vector<Foot>& feet) {
  OpenStockFlow out{d, feet, {}};
  for (const auto& f : feet) out.legs.push_back(leg_by_name(d.instance(), f));
  return out;
}

}  // namespace stockflow
