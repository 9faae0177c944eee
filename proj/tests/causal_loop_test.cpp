// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "stockflow/models.hpp"

using namespace stockflow;

namespace {

using NamedEdge = std::pair<std::string, std::string>;

std::vector<NamedEdge> named_edges(const CausalLoopGraph& cl) {
  auto names = cl.node_names();
  std::vector<NamedEdge> out;
  for (Part e = 1; e <= cl.edges(); ++e) out.emplace_back(names[cl.source(e) - 1], names[cl.target(e) - 1]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(CausalLoop, SeirNodesAndEdgesFromTheDeclaration) {
  CausalLoopGraph cl = to_causal_loop(models::seir());
  EXPECT_EQ(cl.nodes(), 13u);
  EXPECT_EQ(cl.edges(), 25u);
  EXPECT_EQ(cl.node_names(), (std::vector<std::string>{"S", "E", "I", "R", "N", "birth", "incid", "inf", "rec",
                                                        "deathS", "deathE", "deathI", "deathR"}));
  // Read off the SEIR declaration: stock to variable links, stock to sum
  // links, sum to variable links, inflows and outflows.
  std::vector<NamedEdge> want = {
      {"S", "incid"}, {"S", "deathS"}, {"E", "inf"},   {"E", "deathE"}, {"I", "incid"},  {"I", "rec"},
      {"I", "deathI"}, {"R", "deathR"}, {"S", "N"},     {"E", "N"},      {"I", "N"},      {"R", "N"},
      {"N", "birth"},  {"N", "incid"},  {"birth", "S"}, {"incid", "E"},  {"inf", "I"},    {"rec", "R"},
      {"S", "incid"},  {"S", "deathS"}, {"E", "inf"},   {"E", "deathE"}, {"I", "rec"},    {"I", "deathI"},
      {"R", "deathR"}};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(named_edges(cl), want);
}

TEST(CausalLoop, FactorsThroughTheSystemStructure) {
  for (const StockFlowDiagram& d : {models::seir(), models::sve(), models::sis_sex(), models::seirv()}) {
    CausalLoopGraph direct = to_causal_loop(d);
    CausalLoopGraph via = to_causal_loop(to_system_structure(d));
    EXPECT_EQ(direct, via);
    EXPECT_TRUE(validate_instance(direct.inst).empty());
  }
}

TEST(CausalLoop, SharedOrUnusedVariablesKeepTheirName) {
  SystemStructureDiagram s = build_system_structure({{"A", {"g"}, {"f"}, {"v"}, {}}}, {{"f", "v"}, {"g", "v"}}, {});
  Instance g = s.instance();
  g.add_part("V", "lonely");
  CausalLoopGraph cl = to_causal_loop(SystemStructureDiagram(g));
  EXPECT_EQ(cl.node_names(), (std::vector<std::string>{"A", "v", "lonely"}));
  // Both flows share v: inflow g and outflow f give v -> A and A -> v, plus the link.
  EXPECT_EQ(named_edges(cl), (std::vector<NamedEdge>{{"A", "v"}, {"A", "v"}, {"v", "A"}}));
}
