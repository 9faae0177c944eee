// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "stockflow/acset.hpp"
#include "stockflow/diagram.hpp"

namespace stockflow {

/// A directed multigraph over the causal-loop schema.
struct CausalLoopGraph {
  Instance inst{schema_causalloop()};

  std::size_t nodes() const { return inst.nparts("N"); }
  std::size_t edges() const { return inst.nparts("E"); }
  std::vector<std::string> node_names() const { return inst.names("N"); }
  Part source(Part e) const { return inst.subpart("s", e); }
  Part target(Part e) const { return inst.subpart("t", e); }

  bool operator==(const CausalLoopGraph&) const = default;
};

namespace detail {

inline CausalLoopGraph causal_loop_of(const Instance& g) {
  CausalLoopGraph cl;
  Instance& x = cl.inst;
  const std::size_t ns = g.nparts("S"), nsv = g.nparts("SV");
  auto stock = [](Part s) { return s; };
  auto sum = [&](Part sv) { return ns + sv; };
  auto var = [&](Part v) { return ns + nsv + v; };

  for (Part s = 1; s <= ns; ++s) x.add_part("N", g.name("S", s));
  for (Part sv = 1; sv <= nsv; ++sv) x.add_part("N", g.name("SV", sv));
  for (Part v = 1; v <= g.nparts("V"); ++v) {
    auto flows = g.incident("fv", v);
    x.add_part("N", flows.size() == 1 ? g.name("F", flows.front()) : g.name("V", v));
  }

  auto edge = [&](Part from, Part to) {
    Part e = x.add_part("E");
    x.set_subpart("s", e, from);
    x.set_subpart("t", e, to);
  };
  for (Part l = 1; l <= g.nparts("LV"); ++l) edge(stock(g.subpart("lvs", l)), var(g.subpart("lvv", l)));
  for (Part l = 1; l <= g.nparts("LS"); ++l) edge(stock(g.subpart("lss", l)), sum(g.subpart("lssv", l)));
  for (Part l = 1; l <= g.nparts("LSV"); ++l) edge(sum(g.subpart("lsvsv", l)), var(g.subpart("lsvv", l)));
  for (Part i = 1; i <= g.nparts("I"); ++i) edge(var(g.subpart("fv", g.subpart("ifn", i))), stock(g.subpart("is", i)));
  for (Part o = 1; o <= g.nparts("O"); ++o) edge(stock(g.subpart("os", o)), var(g.subpart("fv", g.subpart("ofn", o))));
  return cl;
}

}  // namespace detail

/// Nodes: stocks, then sum variables, then auxiliary variables. Edges: stock
/// to variable links, stock to sum links, sum to variable links, inflows
/// (variable to stock) and outflows (stock to variable). A variable node is
/// labelled by its flow when exactly one flow uses it.
inline CausalLoopGraph to_causal_loop(const SystemStructureDiagram& d) { return detail::causal_loop_of(d.instance()); }

inline CausalLoopGraph to_causal_loop(const StockFlowDiagram& d) { return detail::causal_loop_of(d.instance()); }

}  // namespace stockflow
