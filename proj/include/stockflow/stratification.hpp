// SPDX-License-Identifier: Apache-2.0
//
// Typed system structure diagrams and stratification: the pullback of two or
// more typed diagrams over a shared type system.
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stockflow/acset.hpp"
#include "stockflow/diagram.hpp"
#include "stockflow/error.hpp"

namespace stockflow {

/// A diagram with a natural map into a type system.
class TypedDiagram {
 public:
  TypedDiagram(SystemStructureDiagram diagram, SystemStructureDiagram type_system, Homomorphism typing)
      : diagram_(std::move(diagram)), type_(std::move(type_system)), typing_(std::move(typing)) {
    if (!(typing_.source() == diagram_.instance())) throw ValidationError("typing source is not the diagram");
    if (!(typing_.target() == type_.instance())) throw ValidationError("typing target is not the type system");
    auto rep = is_natural(typing_);
    if (!rep) {
      std::string msg = "typing is not natural:";
      for (const auto& f : rep.failures) msg += " " + f.morphism + "@" + std::to_string(f.element);
      throw ValidationError(msg);
    }
  }

  const SystemStructureDiagram& diagram() const { return diagram_; }
  const SystemStructureDiagram& type_system() const { return type_; }
  const Homomorphism& typing() const { return typing_; }

  bool operator==(const TypedDiagram&) const = default;

 private:
  SystemStructureDiagram diagram_;
  SystemStructureDiagram type_;
  Homomorphism typing_;
};

/// Typing given by element indices per object name.
inline TypedDiagram make_typed(const SystemStructureDiagram& d, const SystemStructureDiagram& type_system,
                               const std::map<std::string, std::vector<Part>>& components) {
  for (const auto& ob : schema_stockflow().objects)
    if (!components.count(ob)) throw ValidationError("typing has no component for " + ob);
  return TypedDiagram(d, type_system, Homomorphism::from_named(d.instance(), type_system.instance(), components));
}

// ---------------------------------------------------------------------------
// Name keys for elements, used to write typings without indices.
//   S, F, V, SV: the element name
//   I, O:        the flow name
//   LS:          "stock=>sum"
//   LV:          "stock=>variable"
//   LSV:         "sum=>variable"

inline std::string part_key(const Instance& g, std::string_view object, Part p) {
  if (object == "I") return g.name("F", g.subpart("ifn", p));
  if (object == "O") return g.name("F", g.subpart("ofn", p));
  if (object == "LS") return g.name("S", g.subpart("lss", p)) + "=>" + g.name("SV", g.subpart("lssv", p));
  if (object == "LV") return g.name("S", g.subpart("lvs", p)) + "=>" + g.name("V", g.subpart("lvv", p));
  if (object == "LSV") return g.name("SV", g.subpart("lsvsv", p)) + "=>" + g.name("V", g.subpart("lsvv", p));
  return g.name(object, p);
}

inline Part resolve_key(const Instance& g, std::string_view object, std::string_view key) {
  Part hit = kUnset;
  for (Part p = 1; p <= g.nparts(object); ++p)
    if (part_key(g, object, p) == key) {
      if (hit != kUnset) throw ValidationError("ambiguous " + std::string(object) + " key '" + std::string(key) + "'");
      hit = p;
    }
  if (hit == kUnset) throw ValidationError("unknown " + std::string(object) + " key '" + std::string(key) + "'");
  return hit;
}

/// Per object, the key of the image of each source element, in source order.
using TypingKeys = std::map<std::string, std::vector<std::string>>;

inline Homomorphism typing_from_keys(const Instance& source, const Instance& target, const TypingKeys& keys) {
  const Schema& sc = source.schema();
  std::vector<std::vector<Part>> comps(sc.objects.size());
  for (std::size_t o = 0; o < sc.objects.size(); ++o) {
    const std::string& ob = sc.objects[o];
    auto it = keys.find(ob);
    std::size_t given = it == keys.end() ? 0 : it->second.size();
    if (given != source.nparts(o))
      throw ValidationError("typing component " + ob + " has " + std::to_string(given) + " entries, expected " +
                            std::to_string(source.nparts(o)));
    for (std::size_t k = 0; k < given; ++k) comps[o].push_back(resolve_key(target, ob, it->second[k]));
  }
  for (const auto& [ob, v] : keys)
    if (!sc.find_object(ob)) throw ValidationError("typing names unknown object " + ob);
  return Homomorphism(source, target, std::move(comps));
}

inline TypingKeys typing_keys(const Homomorphism& h) {
  TypingKeys out;
  const Schema& sc = h.schema();
  for (std::size_t o = 0; o < sc.objects.size(); ++o) {
    auto& col = out[sc.objects[o]];
    for (Part x : h.component(o)) col.push_back(part_key(h.target(), sc.objects[o], x));
  }
  return out;
}

inline TypedDiagram make_typed(const SystemStructureDiagram& d, const SystemStructureDiagram& type_system,
                               const TypingKeys& keys) {
  return TypedDiagram(d, type_system, typing_from_keys(d.instance(), type_system.instance(), keys));
}

namespace detail {

/// Iterated binary pullback; the returned map goes from the apex to the type
/// system through the first factor.
inline std::pair<PullbackResult, Homomorphism> pullback_all(const std::vector<TypedDiagram>& typed) {
  if (typed.size() < 2) throw ValidationError("stratification needs at least two typed diagrams");
  for (const auto& t : typed)
    if (!(t.type_system() == typed.front().type_system()))
      throw ValidationError("typed diagrams do not share a type system");
  PullbackResult pb = pullback(typed[0].typing(), typed[1].typing());
  Homomorphism to_type = compose_hom(pb.leg1, typed[0].typing());
  for (std::size_t k = 2; k < typed.size(); ++k) {
    PullbackResult next = pullback(to_type, typed[k].typing());
    to_type = compose_hom(next.leg1, to_type);
    pb = std::move(next);
  }
  return {std::move(pb), std::move(to_type)};
}

}  // namespace detail

/// The pullback apex of all typed diagrams over their shared type system.
/// Element names are the concatenated component names.
inline SystemStructureDiagram stratify(const std::vector<TypedDiagram>& typed) {
  return SystemStructureDiagram(detail::pullback_all(typed).first.apex);
}

/// As stratify, typed through the first diagram's typing.
inline TypedDiagram typed_stratify(const std::vector<TypedDiagram>& typed) {
  auto [pb, to_type] = detail::pullback_all(typed);
  return TypedDiagram(SystemStructureDiagram(pb.apex), typed.front().type_system(), std::move(to_type));
}

inline SystemStructureDiagram stratify(const TypedDiagram& a, const TypedDiagram& b) { return stratify({a, b}); }
inline TypedDiagram typed_stratify(const TypedDiagram& a, const TypedDiagram& b) { return typed_stratify({a, b}); }

}  // namespace stockflow
