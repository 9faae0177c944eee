// SPDX-License-Identifier: Apache-2.0
//
// Attributed categorical databases over the three fixed schemas used by the
// library (stock-flow, interface, causal loop): the instance store,
// homomorphisms, naturality, and the pushout/pullback kernels.
//
// Elements are 1-based dense integers per object table; 0 marks a column
// slot that has not been assigned yet.
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stockflow/error.hpp"

namespace stockflow {

using Part = std::size_t;
inline constexpr Part kUnset = 0;

struct MorphismDef {
  std::string name;
  std::string dom;
  std::string codom;
  bool operator==(const MorphismDef&) const = default;
};

struct AttributeDef {
  std::string name;
  std::string object;
  bool operator==(const AttributeDef&) const = default;
};

struct Schema {
  std::string name;
  std::vector<std::string> objects;
  std::vector<MorphismDef> morphisms;
  std::vector<AttributeDef> attributes;

  bool operator==(const Schema&) const = default;

  std::optional<std::size_t> find_object(std::string_view ob) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i] == ob) return i;
    return std::nullopt;
  }

  std::size_t object_index(std::string_view ob) const {
    if (auto i = find_object(ob)) return *i;
    throw ValidationError("schema " + name + " has no object '" + std::string(ob) + "'");
  }

  std::optional<std::size_t> find_morphism(std::string_view m) const {
    for (std::size_t i = 0; i < morphisms.size(); ++i)
      if (morphisms[i].name == m) return i;
    return std::nullopt;
  }

  std::size_t morphism_index(std::string_view m) const {
    if (auto i = find_morphism(m)) return *i;
    throw ValidationError("schema " + name + " has no morphism '" + std::string(m) + "'");
  }

  std::size_t dom(std::size_t m) const { return object_index(morphisms[m].dom); }
  std::size_t codom(std::size_t m) const { return object_index(morphisms[m].codom); }

  /// Index of the name attribute carried by `object`, if any.
  std::optional<std::size_t> name_attribute(std::size_t object) const {
    for (std::size_t a = 0; a < attributes.size(); ++a)
      if (attributes[a].object == objects[object]) return a;
    return std::nullopt;
  }

  /// Objects ordered so that every morphism's codomain precedes its domain.
  std::vector<std::size_t> codomain_first_order() const {
    std::vector<std::size_t> order;
    std::vector<bool> placed(objects.size(), false);
    while (order.size() < objects.size()) {
      bool progress = false;
      for (std::size_t ob = 0; ob < objects.size(); ++ob) {
        if (placed[ob]) continue;
        bool ready = true;
        for (std::size_t m = 0; m < morphisms.size(); ++m)
          if (dom(m) == ob && !placed[codom(m)] && codom(m) != ob) ready = false;
        if (ready) {
          placed[ob] = true;
          order.push_back(ob);
          progress = true;
        }
      }
      if (!progress) throw ValidationError("schema " + name + " has a cycle");
    }
    return order;
  }

  /// Structural problems; empty when the schema is well formed.
  std::vector<std::string> check() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto claim = [&](const std::string& n) {
      if (!seen.insert(n).second) out.push_back("duplicate schema name '" + n + "'");
    };
    for (const auto& o : objects) claim(o);
    for (const auto& m : morphisms) {
      claim(m.name);
      if (!find_object(m.dom)) out.push_back("morphism " + m.name + ": unknown domain " + m.dom);
      if (!find_object(m.codom)) out.push_back("morphism " + m.name + ": unknown codomain " + m.codom);
    }
    for (const auto& a : attributes) {
      claim(a.name);
      if (!find_object(a.object)) out.push_back("attribute " + a.name + ": unknown object " + a.object);
    }
    return out;
  }
};

inline const Schema& schema_stockflow() {
  static const Schema s{
      "StockFlow",
      {"S", "F", "I", "O", "V", "SV", "LS", "LV", "LSV"},
      {{"is", "I", "S"},
       {"ifn", "I", "F"},
       {"os", "O", "S"},
       {"ofn", "O", "F"},
       {"fv", "F", "V"},
       {"lvs", "LV", "S"},
       {"lvv", "LV", "V"},
       {"lss", "LS", "S"},
       {"lssv", "LS", "SV"},
       {"lsvsv", "LSV", "SV"},
       {"lsvv", "LSV", "V"}},
      {{"sname", "S"}, {"fname", "F"}, {"vname", "V"}, {"svname", "SV"}}};
  return s;
}

inline const Schema& schema_interface() {
  static const Schema s{"Interface",
                        {"S", "SV", "LS"},
                        {{"lss", "LS", "S"}, {"lssv", "LS", "SV"}},
                        {{"sname", "S"}, {"svname", "SV"}}};
  return s;
}

inline const Schema& schema_causalloop() {
  static const Schema s{"CausalLoop", {"N", "E"}, {{"s", "E", "N"}, {"t", "E", "N"}}, {{"nname", "N"}}};
  return s;
}

/// A finite table per object, a foreign-key column per morphism and a text
/// column per name attribute. Append-only.
class Instance {
 public:
  explicit Instance(const Schema& schema)
      : schema_(&schema),
        card_(schema.objects.size(), 0),
        columns_(schema.morphisms.size()),
        names_(schema.attributes.size()) {}

  const Schema& schema() const { return *schema_; }

  std::size_t nparts(std::size_t object) const { return card_.at(object); }
  std::size_t nparts(std::string_view object) const { return card_[schema_->object_index(object)]; }

  Part add_part(std::size_t object, std::string name = {}) {
    Part p = ++card_.at(object);
    for (std::size_t m = 0; m < columns_.size(); ++m)
      if (schema_->dom(m) == object) columns_[m].push_back(kUnset);
    if (auto a = schema_->name_attribute(object)) names_[*a].push_back(std::move(name));
    return p;
  }
  Part add_part(std::string_view object, std::string name = {}) {
    return add_part(schema_->object_index(object), std::move(name));
  }

  void set_subpart(std::size_t m, Part element, Part value) {
    check_element(schema_->dom(m), element, schema_->morphisms[m].name);
    check_element(schema_->codom(m), value, schema_->morphisms[m].name);
    columns_[m][element - 1] = value;
  }
  void set_subpart(std::string_view morphism, Part element, Part value) {
    set_subpart(schema_->morphism_index(morphism), element, value);
  }

  Part subpart(std::size_t m, Part element) const {
    check_element(schema_->dom(m), element, schema_->morphisms[m].name);
    Part v = columns_[m][element - 1];
    if (v == kUnset)
      throw ValidationError("column " + schema_->morphisms[m].name + " is unset at element " +
                            std::to_string(element));
    return v;
  }
  Part subpart(std::string_view morphism, Part element) const {
    return subpart(schema_->morphism_index(morphism), element);
  }

  /// Raw column, possibly containing kUnset entries.
  const std::vector<Part>& column(std::size_t m) const { return columns_.at(m); }
  const std::vector<Part>& column(std::string_view morphism) const {
    return columns_[schema_->morphism_index(morphism)];
  }

  /// Preimage of `value` under `morphism`, ascending.
  std::vector<Part> incident(std::size_t m, Part value) const {
    std::vector<Part> out;
    const auto& col = columns_.at(m);
    for (std::size_t i = 0; i < col.size(); ++i)
      if (col[i] == value) out.push_back(i + 1);
    return out;
  }
  std::vector<Part> incident(std::string_view morphism, Part value) const {
    return incident(schema_->morphism_index(morphism), value);
  }

  bool has_names(std::size_t object) const { return schema_->name_attribute(object).has_value(); }

  const std::string& name(std::size_t object, Part element) const {
    auto a = schema_->name_attribute(object);
    if (!a) throw ValidationError("object " + schema_->objects[object] + " carries no name");
    check_element(object, element, schema_->attributes[*a].name);
    return names_[*a][element - 1];
  }
  const std::string& name(std::string_view object, Part element) const {
    return name(schema_->object_index(object), element);
  }

  void set_name(std::size_t object, Part element, std::string value) {
    auto a = schema_->name_attribute(object);
    if (!a) throw ValidationError("object " + schema_->objects[object] + " carries no name");
    check_element(object, element, schema_->attributes[*a].name);
    names_[*a][element - 1] = std::move(value);
  }
  void set_name(std::string_view object, Part element, std::string value) {
    set_name(schema_->object_index(object), element, std::move(value));
  }

  /// Names of every element of `object`, in element order.
  std::vector<std::string> names(std::size_t object) const {
    auto a = schema_->name_attribute(object);
    if (!a) return {};
    return names_[*a];
  }
  std::vector<std::string> names(std::string_view object) const {
    return names(schema_->object_index(object));
  }

  /// Every element of `object` whose name equals `n`.
  std::vector<Part> lookup(std::string_view object, std::string_view n) const {
    std::size_t ob = schema_->object_index(object);
    std::vector<Part> out;
    auto a = schema_->name_attribute(ob);
    if (!a) return out;
    for (std::size_t i = 0; i < names_[*a].size(); ++i)
      if (names_[*a][i] == n) out.push_back(i + 1);
    return out;
  }

  bool operator==(const Instance& o) const {
    return *schema_ == *o.schema_ && card_ == o.card_ && columns_ == o.columns_ && names_ == o.names_;
  }

 private:
  void check_element(std::size_t object, Part element, const std::string& where) const {
    if (element == kUnset || element > card_[object])
      throw ValidationError(where + ": element " + std::to_string(element) + " out of range for " +
                            schema_->objects[object] + " (size " + std::to_string(card_[object]) + ")");
  }

  const Schema* schema_;
  std::vector<std::size_t> card_;
  std::vector<std::vector<Part>> columns_;
  std::vector<std::vector<std::string>> names_;
};

/// Unset or out-of-range column entries.
inline std::vector<std::string> column_violations(const Instance& inst) {
  std::vector<std::string> out;
  const Schema& sc = inst.schema();
  for (std::size_t m = 0; m < sc.morphisms.size(); ++m) {
    const auto& col = inst.column(m);
    std::size_t limit = inst.nparts(sc.codom(m));
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (col[i] == kUnset)
        out.push_back(sc.morphisms[m].name + "(" + std::to_string(i + 1) + ") is unset");
      else if (col[i] > limit)
        out.push_back(sc.morphisms[m].name + "(" + std::to_string(i + 1) + ") = " + std::to_string(col[i]) +
                      " exceeds |" + sc.morphisms[m].codom + "| = " + std::to_string(limit));
    }
  }
  return out;
}

/// Every broken invariant of `inst`, one message each; empty when valid.
/// Over the stock-flow schema this includes injectivity of ifn and ofn.
inline std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out = column_violations(inst);
  const Schema& sc = inst.schema();
  if (sc == schema_stockflow()) {
    for (std::string_view m : {"ifn", "ofn"}) {
      std::map<Part, Part> first;
      const auto& col = inst.column(m);
      for (std::size_t i = 0; i < col.size(); ++i) {
        if (col[i] == kUnset) continue;
        auto [it, fresh] = first.emplace(col[i], i + 1);
        if (!fresh)
          out.push_back(std::string(m) + " is not injective: rows " + std::to_string(it->second) + " and " +
                        std::to_string(i + 1) + " share flow " + std::to_string(col[i]));
      }
    }
  }
  return out;
}

/// Per-object maps between two instances over the same schema. Components
/// are total and in range; naturality is checked separately by is_natural.
class Homomorphism {
 public:
  Homomorphism(Instance source, Instance target, std::vector<std::vector<Part>> components)
      : source_(std::move(source)), target_(std::move(target)), comps_(std::move(components)) {
    const Schema& sc = source_.schema();
    if (!(sc == target_.schema()))
      throw ValidationError("homomorphism between different schemas " + sc.name + " and " + target_.schema().name);
    if (comps_.size() != sc.objects.size())
      throw ValidationError("homomorphism needs one component per object");
    for (std::size_t ob = 0; ob < comps_.size(); ++ob) {
      if (comps_[ob].size() != source_.nparts(ob))
        throw ValidationError("component " + sc.objects[ob] + " has " + std::to_string(comps_[ob].size()) +
                              " entries, expected " + std::to_string(source_.nparts(ob)));
      for (Part p : comps_[ob])
        if (p == kUnset || p > target_.nparts(ob))
          throw ValidationError("component " + sc.objects[ob] + " maps to " + std::to_string(p) +
                                ", out of range " + std::to_string(target_.nparts(ob)));
    }
  }

  /// Components given by object name; every object must be present.
  static Homomorphism from_named(Instance source, Instance target,
                                 const std::map<std::string, std::vector<Part>>& named) {
    const Schema& sc = source.schema();
    std::vector<std::vector<Part>> comps(sc.objects.size());
    for (const auto& [ob, c] : named) comps[sc.object_index(ob)] = c;
    return Homomorphism(std::move(source), std::move(target), std::move(comps));
  }

  const Instance& source() const { return source_; }
  const Instance& target() const { return target_; }
  const Schema& schema() const { return source_.schema(); }

  const std::vector<Part>& component(std::size_t object) const { return comps_.at(object); }
  const std::vector<Part>& component(std::string_view object) const {
    return comps_[schema().object_index(object)];
  }
  const std::vector<std::vector<Part>>& components() const { return comps_; }

  Part operator()(std::size_t object, Part x) const { return comps_.at(object).at(x - 1); }
  Part operator()(std::string_view object, Part x) const { return (*this)(schema().object_index(object), x); }

  bool operator==(const Homomorphism&) const = default;

 private:
  Instance source_;
  Instance target_;
  std::vector<std::vector<Part>> comps_;
};

struct FailingSquare {
  std::string morphism;
  Part element;
  bool operator==(const FailingSquare&) const = default;
};

struct NaturalityReport {
  std::vector<FailingSquare> failures;
  bool natural() const { return failures.empty(); }
  explicit operator bool() const { return natural(); }
};

/// Exhaustive square check: h_Y(G(m)(x)) == H(m)(h_X(x)) for every m: X -> Y
/// and every x. Names are not compared.
inline NaturalityReport is_natural(const Homomorphism& h) {
  NaturalityReport rep;
  const Schema& sc = h.schema();
  for (std::size_t m = 0; m < sc.morphisms.size(); ++m) {
    std::size_t X = sc.dom(m), Y = sc.codom(m);
    const auto& src = h.source().column(m);
    const auto& tgt = h.target().column(m);
    for (Part x = 1; x <= h.source().nparts(X); ++x) {
      Part gx = src[x - 1];
      Part hx = h(X, x);
      Part lhs = gx == kUnset ? kUnset : h(Y, gx);
      Part rhs = tgt[hx - 1];
      if (lhs == kUnset || rhs == kUnset || lhs != rhs) rep.failures.push_back({sc.morphisms[m].name, x});
    }
  }
  return rep;
}

inline Homomorphism identity_hom(const Instance& inst) {
  const Schema& sc = inst.schema();
  std::vector<std::vector<Part>> comps(sc.objects.size());
  for (std::size_t ob = 0; ob < comps.size(); ++ob) {
    comps[ob].resize(inst.nparts(ob));
    std::iota(comps[ob].begin(), comps[ob].end(), Part{1});
  }
  return Homomorphism(inst, inst, std::move(comps));
}

/// Diagrammatic composite: first `g`, then `h`. Requires cod(g) == dom(h).
inline Homomorphism compose_hom(const Homomorphism& g, const Homomorphism& h) {
  if (!(g.target() == h.source())) throw ValidationError("compose_hom: codomain of first map differs from domain of second");
  std::vector<std::vector<Part>> comps(g.components().size());
  for (std::size_t ob = 0; ob < comps.size(); ++ob)
    for (Part x : g.component(ob)) comps[ob].push_back(h(ob, x));
  return Homomorphism(g.source(), h.target(), std::move(comps));
}

/// Restriction of `inst` to a sub-schema whose objects, morphisms and
/// attributes all occur (by name) in the instance's schema.
inline Instance restrict_instance(const Instance& inst, const Schema& sub) {
  const Schema& sc = inst.schema();
  Instance out(sub);
  for (std::size_t ob = 0; ob < sub.objects.size(); ++ob) {
    std::size_t big = sc.object_index(sub.objects[ob]);
    for (Part p = 1; p <= inst.nparts(big); ++p)
      out.add_part(ob, inst.has_names(big) && sub.name_attribute(ob) ? inst.name(big, p) : std::string{});
  }
  for (std::size_t m = 0; m < sub.morphisms.size(); ++m) {
    const auto& col = inst.column(sc.morphism_index(sub.morphisms[m].name));
    for (std::size_t i = 0; i < col.size(); ++i)
      if (col[i] != kUnset) out.set_subpart(m, i + 1, col[i]);
  }
  return out;
}

inline Homomorphism restrict_hom(const Homomorphism& h, const Schema& sub) {
  std::vector<std::vector<Part>> comps;
  for (const auto& ob : sub.objects) comps.push_back(h.component(ob));
  return Homomorphism(restrict_instance(h.source(), sub), restrict_instance(h.target(), sub), std::move(comps));
}

// ---------------------------------------------------------------------------
// Pushout (coproduct followed by a coequalizer).

struct ElementRef {
  std::size_t part;  // 0-based index into the parts list
  std::string object;
  Part index;
};

struct Identification {
  ElementRef a;
  ElementRef b;
};

struct PushoutResult {
  Instance apex;
  std::vector<Homomorphism> injections;  // one per part, natural
  std::vector<std::size_t> merges;       // per object: coproduct size - apex size
};

namespace detail {

/// Union-find whose root is always the smallest index in its class.
class MinUnionFind {
 public:
  explicit MinUnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Glues `parts` along `identifications`. Merges forced by morphisms (if two
/// identified elements have different images) are propagated until the
/// quotient is well defined. Apex elements are ordered by their smallest
/// coproduct index; a merged element takes the lexicographically first name
/// in its class.
inline PushoutResult pushout_quotient(const std::vector<Instance>& parts,
                                      const std::vector<Identification>& identifications) {
  if (parts.empty()) throw ValidationError("pushout_quotient needs at least one part");
  const Schema& sc = parts.front().schema();
  for (const auto& p : parts) {
    if (!(p.schema() == sc)) throw ValidationError("pushout_quotient: parts have different schemas");
    for (const auto& v : column_violations(p)) throw ValidationError("pushout_quotient: invalid part: " + v);
  }
  const std::size_t nob = sc.objects.size();

  // Coproduct offsets: offset[ob][k] = first global index (0-based) of part k.
  std::vector<std::vector<std::size_t>> offset(nob, std::vector<std::size_t>(parts.size() + 1, 0));
  for (std::size_t ob = 0; ob < nob; ++ob)
    for (std::size_t k = 0; k < parts.size(); ++k) offset[ob][k + 1] = offset[ob][k] + parts[k].nparts(ob);

  std::vector<detail::MinUnionFind> uf;
  for (std::size_t ob = 0; ob < nob; ++ob) uf.emplace_back(offset[ob][parts.size()]);

  auto global = [&](std::size_t ob, std::size_t k, Part p) { return offset[ob][k] + (p - 1); };

  for (const auto& id : identifications) {
    if (id.a.object != id.b.object)
      throw ValidationError("identification across different objects " + id.a.object + " and " + id.b.object);
    std::size_t ob = sc.object_index(id.a.object);
    for (const ElementRef* e : {&id.a, &id.b}) {
      if (e->part >= parts.size()) throw ValidationError("identification references missing part");
      if (e->index == kUnset || e->index > parts[e->part].nparts(ob))
        throw ValidationError("identification references element " + std::to_string(e->index) + " outside " +
                              id.a.object + " of part " + std::to_string(e->part));
    }
    uf[ob].unite(global(ob, id.a.part, id.a.index), global(ob, id.b.part, id.b.index));
  }

  // Global morphism columns of the coproduct.
  std::vector<std::vector<std::size_t>> gcol(sc.morphisms.size());
  for (std::size_t m = 0; m < sc.morphisms.size(); ++m) {
    std::size_t X = sc.dom(m), Y = sc.codom(m);
    for (std::size_t k = 0; k < parts.size(); ++k)
      for (Part x = 1; x <= parts[k].nparts(X); ++x) gcol[m].push_back(global(Y, k, parts[k].subpart(m, x)));
  }

  // Congruence closure: identified elements must have identified images.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t m = 0; m < sc.morphisms.size(); ++m) {
      std::size_t X = sc.dom(m), Y = sc.codom(m);
      for (std::size_t x = 0; x < gcol[m].size(); ++x) {
        std::size_t r = uf[X].find(x);
        if (r != x && uf[Y].unite(gcol[m][x], gcol[m][r])) changed = true;
      }
    }
  }

  PushoutResult res{Instance(sc), {}, std::vector<std::size_t>(nob, 0)};
  std::vector<std::vector<Part>> apex_of(nob);  // global index -> apex element
  for (std::size_t ob = 0; ob < nob; ++ob) {
    std::size_t total = offset[ob][parts.size()];
    apex_of[ob].assign(total, kUnset);
    std::map<std::size_t, std::string> best_name;
    if (sc.name_attribute(ob)) {
      for (std::size_t k = 0; k < parts.size(); ++k)
        for (Part p = 1; p <= parts[k].nparts(ob); ++p) {
          std::size_t r = uf[ob].find(global(ob, k, p));
          const std::string& n = parts[k].name(ob, p);
          auto it = best_name.find(r);
          if (it == best_name.end() || n < it->second) best_name[r] = n;
        }
    }
    for (std::size_t g = 0; g < total; ++g) {
      std::size_t r = uf[ob].find(g);
      if (r == g) apex_of[ob][g] = res.apex.add_part(ob, sc.name_attribute(ob) ? best_name[r] : std::string{});
    }
    for (std::size_t g = 0; g < total; ++g) apex_of[ob][g] = apex_of[ob][uf[ob].find(g)];
    res.merges[ob] = total - res.apex.nparts(ob);
  }
  for (std::size_t m = 0; m < sc.morphisms.size(); ++m) {
    std::size_t X = sc.dom(m), Y = sc.codom(m);
    for (std::size_t x = 0; x < gcol[m].size(); ++x)
      res.apex.set_subpart(m, apex_of[X][x], apex_of[Y][gcol[m][x]]);
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::vector<std::vector<Part>> comps(nob);
    for (std::size_t ob = 0; ob < nob; ++ob)
      for (Part p = 1; p <= parts[k].nparts(ob); ++p) comps[ob].push_back(apex_of[ob][global(ob, k, p)]);
    res.injections.emplace_back(parts[k], res.apex, std::move(comps));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Pullback (fiber product).

/// Drops "(", ")", ":", "," and whitespace from a (possibly tuple-formatted)
/// element name.
inline std::string strip_name_punctuation(std::string_view n) {
  std::string out;
  for (char c : n)
    if (c != '(' && c != ')' && c != ':' && c != ',' && c != ' ' && c != '\t') out.push_back(c);
  return out;
}

struct PullbackResult {
  Instance apex;
  Homomorphism leg1;  // apex -> left source
  Homomorphism leg2;  // apex -> right source
  std::vector<std::vector<std::pair<Part, Part>>> pairs;  // per object, apex element -> (left, right)
};

/// Fiber product of `left: A -> T` and `right: B -> T`. Apex elements are the
/// pairs (a, b) with left(a) == right(b), ordered by a then b. Pair names are
/// the two component names concatenated after punctuation stripping.
inline PullbackResult pullback(const Homomorphism& left, const Homomorphism& right) {
  if (!(left.target() == right.target())) throw ValidationError("pullback: maps do not share a codomain");
  const Schema& sc = left.schema();
  const Instance& A = left.source();
  const Instance& B = right.source();
  const std::size_t nob = sc.objects.size();

  Instance apex(sc);
  std::vector<std::vector<std::pair<Part, Part>>> pairs(nob);
  std::vector<std::map<std::pair<Part, Part>, Part>> index_of(nob);
  for (std::size_t ob = 0; ob < nob; ++ob) {
    // Bucket the right-hand elements by type so each fiber is visited once.
    std::map<Part, std::vector<Part>> fiber;
    for (Part b = 1; b <= B.nparts(ob); ++b) fiber[right(ob, b)].push_back(b);
    for (Part a = 1; a <= A.nparts(ob); ++a) {
      auto it = fiber.find(left(ob, a));
      if (it == fiber.end()) continue;
      for (Part b : it->second) {
        std::string n;
        if (sc.name_attribute(ob)) n = strip_name_punctuation(A.name(ob, a)) + strip_name_punctuation(B.name(ob, b));
        Part p = apex.add_part(ob, std::move(n));
        pairs[ob].emplace_back(a, b);
        index_of[ob][{a, b}] = p;
      }
    }
  }
  for (std::size_t m = 0; m < sc.morphisms.size(); ++m) {
    std::size_t X = sc.dom(m), Y = sc.codom(m);
    for (std::size_t i = 0; i < pairs[X].size(); ++i) {
      auto [a, b] = pairs[X][i];
      auto it = index_of[Y].find({A.subpart(m, a), B.subpart(m, b)});
      if (it == index_of[Y].end())
        throw ValidationError("pullback: typing is not natural along " + sc.morphisms[m].name);
      apex.set_subpart(m, i + 1, it->second);
    }
  }
  std::vector<std::vector<Part>> c1(nob), c2(nob);
  for (std::size_t ob = 0; ob < nob; ++ob)
    for (auto [a, b] : pairs[ob]) {
      c1[ob].push_back(a);
      c2[ob].push_back(b);
    }
  Homomorphism leg1(apex, A, std::move(c1));
  Homomorphism leg2(apex, B, std::move(c2));
  return PullbackResult{std::move(apex), std::move(leg1), std::move(leg2), std::move(pairs)};
}

}  // namespace stockflow
