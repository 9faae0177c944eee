// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "stockflow/models.hpp"

using namespace stockflow;

namespace {

std::vector<TypedDiagram> all_typed() {
  return {models::typed_seir(), models::typed_sis(), models::typed_age_strata(), models::typed_sex_strata(),
          models::typed_sex_strata_with_age()};
}

// Number of tuples (x1, ..., xn) with all xi of the same type, by direct
// enumeration over every combination of elements.
std::size_t brute_count(const std::vector<TypedDiagram>& ts, std::size_t ob) {
  std::vector<const std::vector<Part>*> comps;
  for (const auto& t : ts) comps.push_back(&t.typing().component(ob));
  std::size_t count = 0;
  std::vector<std::size_t> idx(ts.size(), 0);
  for (const auto* c : comps)
    if (c->empty()) return 0;
  for (;;) {
    bool same = true;
    for (std::size_t k = 1; k < ts.size(); ++k) same = same && (*comps[k])[idx[k]] == (*comps[0])[idx[0]];
    if (same) ++count;
    std::size_t k = ts.size();
    while (k > 0) {
      --k;
      if (++idx[k] < comps[k]->size()) break;
      idx[k] = 0;
      if (k == 0) return count;
    }
  }
}

void expect_counts_match_enumeration(const std::vector<TypedDiagram>& ts) {
  TypedDiagram r = typed_stratify(ts);
  const Schema& sc = schema_stockflow();
  for (std::size_t ob = 0; ob < sc.objects.size(); ++ob)
    EXPECT_EQ(r.diagram().instance().nparts(ob), brute_count(ts, ob)) << sc.objects[ob];
  EXPECT_TRUE(validate_instance(r.diagram().instance()).empty());
  EXPECT_TRUE(is_natural(r.typing()));
  EXPECT_EQ(stratify(ts), r.diagram());
}

}  // namespace

TEST(Typing, AllReferenceTypingsAreNatural) {
  for (const auto& t : all_typed()) {
    EXPECT_TRUE(is_natural(t.typing()));
    EXPECT_TRUE(validate_instance(t.diagram().instance()).empty());
  }
  EXPECT_TRUE(validate_instance(models::type_system().instance()).empty());
}

TEST(Typing, EveryFlowMutationOfSeirBreaksNaturality) {
  TypedDiagram t = models::typed_seir();
  const Schema& sc = schema_stockflow();
  const std::size_t F = sc.object_index("F");
  const std::size_t ntypes = models::type_system().count("F");
  std::size_t tried = 0;
  for (Part x = 1; x <= t.diagram().count("F"); ++x)
    for (Part y = 1; y <= ntypes; ++y) {
      if (y == t.typing()(F, x)) continue;
      std::vector<std::vector<Part>> comps = t.typing().components();
      comps[F][x - 1] = y;
      Homomorphism h(t.diagram().instance(), models::type_system().instance(), comps);
      auto rep = is_natural(h);
      EXPECT_FALSE(rep.natural()) << "F" << x << " -> " << y;
      EXPECT_THROW(TypedDiagram(t.diagram(), models::type_system(), h), ValidationError);
      ++tried;
    }
  EXPECT_EQ(tried, 12u * 4u);
}

TEST(Typing, KeysRoundTrip) {
  for (const auto& t : all_typed()) {
    TypingKeys keys = typing_keys(t.typing());
    EXPECT_EQ(make_typed(t.diagram(), t.type_system(), keys), t);
  }
  TypingKeys keys = models::seir_typing_keys();
  keys["F"][0] = "nope";
  EXPECT_THROW(make_typed(models::seir_structure(), models::type_system(), keys), ValidationError);
  keys = models::seir_typing_keys();
  keys["F"].pop_back();
  EXPECT_THROW(make_typed(models::seir_structure(), models::type_system(), keys), ValidationError);
  keys = models::seir_typing_keys();
  keys["Q"] = {};
  EXPECT_THROW(make_typed(models::seir_structure(), models::type_system(), keys), ValidationError);
}

TEST(Stratify, SeirByAge) {
  SystemStructureDiagram s = stratify(models::typed_seir(), models::typed_age_strata());
  EXPECT_EQ(s.count("S"), 12u);
  EXPECT_EQ(s.count("F"), 30u);
  expect_counts_match_enumeration({models::typed_seir(), models::typed_age_strata()});
}

TEST(Stratify, SisBySex) {
  SystemStructureDiagram s = stratify(models::typed_sis(), models::typed_sex_strata());
  EXPECT_EQ(s.count("S"), 4u);
  EXPECT_EQ(s.stock_names(), (std::vector<std::string>{"SF", "SM", "IF", "IM"}));
  expect_counts_match_enumeration({models::typed_sis(), models::typed_sex_strata()});
}

TEST(Stratify, SeirBySexAndAge) {
  std::vector<TypedDiagram> ts = {models::typed_seir(), models::typed_sex_strata_with_age(),
                                  models::typed_age_strata()};
  EXPECT_EQ(stratify(ts).count("S"), 24u);
  expect_counts_match_enumeration(ts);
}

TEST(Stratify, EveryPairOfReferenceModelsMatchesEnumeration) {
  auto ts = all_typed();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j) expect_counts_match_enumeration({ts[i], ts[j]});
}

TEST(Stratify, TypingFactorsThroughBothProjections) {
  TypedDiagram a = models::typed_seir(), b = models::typed_age_strata();
  PullbackResult pb = pullback(a.typing(), b.typing());
  EXPECT_EQ(compose_hom(pb.leg1, a.typing()), compose_hom(pb.leg2, b.typing()));
  EXPECT_EQ(typed_stratify(a, b).typing(), compose_hom(pb.leg1, a.typing()));
}

TEST(Stratify, Rejections) {
  EXPECT_THROW(stratify(std::vector<TypedDiagram>{models::typed_seir()}), ValidationError);
  // A second type system with one extra flow.
  Instance other = models::type_system().instance();
  Part v = other.add_part("V", "v_extra");
  Part f = other.add_part("F", "extra");
  other.set_subpart("fv", f, v);
  SystemStructureDiagram ts2{other};
  TypedDiagram sis = models::typed_sis();
  std::vector<std::vector<Part>> comps = sis.typing().components();
  TypedDiagram sis2(sis.diagram(), ts2, Homomorphism(sis.diagram().instance(), other, comps));
  EXPECT_THROW(stratify(models::typed_seir(), sis2), ValidationError);
}

TEST(Stratify, FlattenedSexStratifiedSisHasConcatenatedNames) {
  SystemStructureDiagram s = flatten_names(stratify(models::typed_sis(), models::typed_sex_strata()));
  auto flows = s.instance().names("F");
  EXPECT_NE(std::find(flows.begin(), flows.end(), "birthsbirthsF"), flows.end());
  EXPECT_NE(std::find(flows.begin(), flows.end(), "newRecoveryid_M"), flows.end());
  EXPECT_EQ(s.instance().names("SV"), (std::vector<std::string>{"NN", "NINI_F", "NINI_M", "NSNS_F", "NSNS_M"}));
}
