// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace stockflow;
using stockflow::testing::Rng;

namespace {

double ev(std::string_view text, std::map<std::string, double, std::less<>> env = {}, double t = 0.0) {
  return eval_expression(parse_expression(text), Bindings{std::move(env), t});
}

}  // namespace

TEST(ExpressionParse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(ev("1 + 2*3"), 7.0);
  EXPECT_DOUBLE_EQ(ev("(1 + 2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(ev("8/4/2"), 1.0);
  EXPECT_DOUBLE_EQ(ev("8 - 4 - 2"), 2.0);
  EXPECT_DOUBLE_EQ(ev("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(ev("-2^2"), -4.0);
  EXPECT_DOUBLE_EQ(ev("2^-1"), 0.5);
  EXPECT_DOUBLE_EQ(ev("--3"), 3.0);
  EXPECT_DOUBLE_EQ(ev("1.5e2 + .5"), 150.5);
  EXPECT_DOUBLE_EQ(ev("3E-1"), 0.3);
}

TEST(ExpressionParse, IdentifiersIncludeUnicodeAndTime) {
  Expression e = parse_expression("β*S*I/N + t");
  EXPECT_EQ(e.identifiers(), (std::set<std::string>{"β", "S", "I", "N", "t"}));
  EXPECT_DOUBLE_EQ(ev("β*S*I/N + t", {{"β", 2.0}, {"S", 3.0}, {"I", 4.0}, {"N", 6.0}}, 10.0), 14.0);
  // The time symbol wins over a binding of the same name.
  EXPECT_DOUBLE_EQ(ev("t", {{"t", 99.0}}, 1.0), 1.0);
}

TEST(ExpressionParse, ErrorsCarryPositions) {
  for (auto [text, pos] : std::vector<std::pair<std::string, std::size_t>>{
           {"1 +", 3}, {"(a", 2}, {"a b", 2}, {"3 $ 4", 2}, {"", 0}, {"a*)", 2}}) {
    try {
      parse_expression(text);
      ADD_FAILURE() << "accepted '" << text << "'";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.position(), pos) << text << ": " << e.what();
    }
  }
}

TEST(ExpressionEval, UnboundAndDivisionByZeroAreRuntimeFailures) {
  EXPECT_THROW(ev("x + 1"), RuntimeFailure);
  try {
    ev("S/N", {{"S", 1.0}, {"N", 0.0}});
    FAIL();
  } catch (const RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("'N' is 0"), std::string::npos);
  }
}

TEST(ExpressionPrint, KnownForms) {
  EXPECT_EQ(parse_expression("β*S*I/N").to_string(), "β*S*I/N");
  EXPECT_EQ(parse_expression("a - (b - c)").to_string(), "a - (b - c)");
  EXPECT_EQ(parse_expression("(a - b) - c").to_string(), "a - b - c");
  EXPECT_EQ(parse_expression("(a^b)^c").to_string(), "(a^b)^c");
  EXPECT_EQ(parse_expression("a^b^c").to_string(), "a^b^c");
  EXPECT_EQ(parse_expression("-(a + b)").to_string(), "-(a + b)");
  EXPECT_EQ(parse_expression("1.0-e").to_string(), "1 - e");
  EXPECT_EQ(Expression::literal(-2.5).to_string(), "(-2.5)");
}

TEST(ExpressionPrint, RoundTripIsStructuralIdentity) {
  Rng rng(101);
  const std::vector<std::string> names = {"a", "b", "β", "t"};
  for (int trial = 0; trial < 2000; ++trial) {
    Expression e = stockflow::testing::random_expression(rng, names, 5);
    Expression back = parse_expression(e.to_string());
    ASSERT_EQ(back, e) << e.to_string() << " reparsed as " << back.to_string();
    EXPECT_EQ(back.to_string(), e.to_string());
  }
}

TEST(ExpressionCompile, AgreesWithTreeEvaluationBitwise) {
  Rng rng(202);
  const std::vector<std::string> names = {"a", "b", "c", "t"};
  std::map<std::string, std::size_t> slot = {{"a", 0}, {"b", 1}, {"c", 2}};
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Expression e = stockflow::testing::random_expression(rng, names, 6);
    CompiledExpression c(e, [&](const std::string& n) -> long {
      auto it = slot.find(n);
      return it == slot.end() ? -1 : static_cast<long>(it->second);
    });
    std::vector<double> slots = {value(rng), value(rng), value(rng)};
    double t = value(rng);
    Bindings env{{{"a", slots[0]}, {"b", slots[1]}, {"c", slots[2]}}, t};
    double want = eval_expression(e, env);
    double got = c(slots, t);
    if (std::isnan(want))
      EXPECT_TRUE(std::isnan(got));
    else
      EXPECT_EQ(got, want) << e.to_string();
  }
}

TEST(ExpressionRename, RewritesIdentifiersOnly) {
  Expression e = parse_expression("S*δ + S/SS");
  Expression r = e.rename({{"S", "SF"}, {"δ", "δF"}});
  EXPECT_EQ(r.to_string(), "SF*δF + SF/SS");
  EXPECT_EQ(e.to_string(), "S*δ + S/SS");
  EXPECT_EQ(e.operator_count(), 3u);
}
