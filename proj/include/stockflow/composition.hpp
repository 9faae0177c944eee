// SPDX-License-Identifier: Apache-2.0
//
// Composition of open stock-flow diagrams along an undirected wiring
// pattern: every junction glues together the feet plugged into it, and the
// composite apex is the pushout of the box apexes.
#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stockflow/acset.hpp"
#include "stockflow/diagram.hpp"
#include "stockflow/error.hpp"

namespace stockflow {

struct Box {
  std::string name;
  std::vector<std::string> ports;  // junction names

  bool operator==(const Box&) const = default;
};

struct WiringPattern {
  std::vector<std::string> junctions;
  std::vector<Box> boxes;
  std::vector<std::string> outer_ports;

  bool operator==(const WiringPattern&) const = default;

  std::size_t junction_index(const std::string& j) const {
    auto it = std::find(junctions.begin(), junctions.end(), j);
    if (it == junctions.end()) throw ValidationError("unknown junction '" + j + "'");
    return static_cast<std::size_t>(it - junctions.begin());
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& j : junctions)
      if (!seen.insert(j).second) throw ValidationError("duplicate junction '" + j + "'");
    for (const auto& b : boxes)
      for (const auto& p : b.ports)
        if (!seen.count(p)) throw ValidationError("box '" + b.name + "' uses unknown junction '" + p + "'");
    for (const auto& p : outer_ports)
      if (!seen.count(p)) throw ValidationError("outer port uses unknown junction '" + p + "'");
  }
};

/// Positional isomorphism between two interface instances after sorting
/// stocks and sum variables by name. Components are indexed like `from`.
inline std::vector<std::vector<Part>> match_feet(const Instance& from, const Instance& to) {
  const Schema& sc = schema_interface();
  std::vector<std::vector<Part>> iso(sc.objects.size());
  for (std::string_view ob : {"S", "SV"}) {
    std::size_t o = sc.object_index(ob);
    if (from.nparts(o) != to.nparts(o))
      throw CompositionError("feet differ in number of " + std::string(ob) + " elements");
    auto sorted = [&](const Instance& x) {
      std::vector<Part> ps(x.nparts(o));
      std::iota(ps.begin(), ps.end(), Part{1});
      std::stable_sort(ps.begin(), ps.end(), [&](Part a, Part b) { return x.name(o, a) < x.name(o, b); });
      return ps;
    };
    auto a = sorted(from), b = sorted(to);
    iso[o].assign(from.nparts(o), kUnset);
    for (std::size_t k = 0; k < a.size(); ++k) iso[o][a[k] - 1] = b[k];
  }
  std::size_t S = sc.object_index("S"), SV = sc.object_index("SV"), LS = sc.object_index("LS");
  if (from.nparts(LS) != to.nparts(LS)) throw CompositionError("feet differ in number of sum links");
  std::vector<bool> used(to.nparts(LS) + 1, false);
  for (Part l = 1; l <= from.nparts(LS); ++l) {
    Part s = iso[S][from.subpart("lss", l) - 1];
    Part sv = iso[SV][from.subpart("lssv", l) - 1];
    Part hit = kUnset;
    for (Part m : to.incident("lss", s))
      if (!used[m] && to.subpart("lssv", m) == sv) {
        hit = m;
        break;
      }
    if (hit == kUnset) throw CompositionError("feet are not isomorphic: sum links do not correspond");
    used[hit] = true;
    iso[LS].push_back(hit);
  }
  return iso;
}

struct CompositionResult {
  OpenStockFlow open;
  std::vector<std::size_t> merges;  // per stock-flow object
};

/// Composes `opens` (one per box) along `pattern`. Feet sharing a junction
/// must be isomorphic; the corresponding apex elements are identified. The
/// result has one foot per outer port.
inline CompositionResult oapply_detailed(const WiringPattern& pattern, const std::vector<OpenStockFlow>& opens) {
  pattern.validate();
  if (opens.size() != pattern.boxes.size())
    throw CompositionError("pattern has " + std::to_string(pattern.boxes.size()) + " boxes but " +
                           std::to_string(opens.size()) + " diagrams were given");
  for (std::size_t b = 0; b < opens.size(); ++b)
    if (opens[b].feet.size() != pattern.boxes[b].ports.size())
      throw CompositionError("box '" + pattern.boxes[b].name + "' has " +
                             std::to_string(pattern.boxes[b].ports.size()) + " ports but its diagram has " +
                             std::to_string(opens[b].feet.size()) + " feet");

  // (box, foot) pairs plugged into each junction.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> plugged(pattern.junctions.size());
  for (std::size_t b = 0; b < opens.size(); ++b)
    for (std::size_t k = 0; k < pattern.boxes[b].ports.size(); ++k)
      plugged[pattern.junction_index(pattern.boxes[b].ports[k])].emplace_back(b, k);

  const Schema& isc = schema_interface();
  std::vector<Identification> ids;
  for (const auto& at : plugged) {
    if (at.size() < 2) continue;
    auto [b0, k0] = at.front();
    const Instance& ref = opens[b0].feet[k0].instance();
    for (std::size_t n = 1; n < at.size(); ++n) {
      auto [b, k] = at[n];
      const Instance& ft = opens[b].feet[k].instance();
      auto iso = match_feet(ft, ref);
      for (std::size_t o = 0; o < isc.objects.size(); ++o)
        for (Part x = 1; x <= ft.nparts(o); ++x) {
          Part mine = opens[b].legs[k](o, x);
          Part theirs = opens[b0].legs[k0](o, iso[o][x - 1]);
          ids.push_back({{b, isc.objects[o], mine}, {b0, isc.objects[o], theirs}});
        }
    }
  }

  std::vector<Instance> parts;
  for (const auto& o : opens) parts.push_back(o.apex.instance());
  PushoutResult po = pushout_quotient(parts, ids);
  const Schema& sc = schema_stockflow();
  if (po.merges[sc.object_index("V")] != 0)
    throw CompositionError("gluing would merge auxiliary variables");

  // Stocks and sums that took a new name need their references renamed.
  std::vector<Expression> exprs;
  for (std::size_t b = 0; b < opens.size(); ++b) {
    std::map<std::string, std::string> renames;
    for (std::string_view ob : {"S", "SV"}) {
      std::size_t o = sc.object_index(ob);
      for (Part x = 1; x <= parts[b].nparts(o); ++x) {
        const std::string& before = parts[b].name(o, x);
        const std::string& after = po.apex.name(o, po.injections[b](o, x));
        if (before != after) renames[before] = after;
      }
    }
    for (const auto& e : opens[b].apex.expressions()) exprs.push_back(renames.empty() ? e : e.rename(renames));
  }

  StockFlowDiagram apex;
  try {
    apex = StockFlowDiagram(SystemStructureDiagram(po.apex), std::move(exprs));
  } catch (const ValidationError& e) {
    throw CompositionError(std::string("composite diagram is invalid: ") + e.what());
  }

  CompositionResult out{{apex, {}, {}}, po.merges};
  for (const auto& j : pattern.outer_ports) {
    const auto& at = plugged[pattern.junction_index(j)];
    if (at.empty()) throw CompositionError("outer port '" + j + "' is not connected to any box");
    auto [b, k] = at.front();
    out.open.feet.push_back(opens[b].feet[k]);
    out.open.legs.push_back(compose_hom(opens[b].legs[k], restrict_hom(po.injections[b], isc)));
  }
  return out;
}

inline OpenStockFlow oapply(const WiringPattern& pattern, const std::vector<OpenStockFlow>& opens) {
  return oapply_detailed(pattern, opens).open;
}

inline const StockFlowDiagram& apex(const OpenStockFlow& open) { return open.apex; }

}  // namespace stockflow
