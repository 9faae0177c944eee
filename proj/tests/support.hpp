// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit tests: random instance generators and small
// numeric utilities.
#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "stockflow/stockflow.hpp"

namespace stockflow::testing {

using Rng = std::mt19937_64;

inline Part pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<Part>(1, n)(rng); }

inline double rel_err(double a, double b) {
  double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) / scale;
}

/// A random well-formed system structure diagram. Every element gets a
/// unique name so that it can be wrapped in SystemStructureDiagram.
inline Instance random_structure(Rng& rng, std::size_t max_stocks = 4, std::size_t max_flows = 6) {
  Instance g(schema_stockflow());
  const std::size_t ns = pick(rng, max_stocks), nf = pick(rng, max_flows);
  const std::size_t nsv = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
  for (std::size_t s = 1; s <= ns; ++s) g.add_part("S", "s" + std::to_string(s));
  for (std::size_t v = 1; v <= nf; ++v) g.add_part("V", "v" + std::to_string(v));
  for (std::size_t f = 1; f <= nf; ++f) {
    Part fp = g.add_part("F", "f" + std::to_string(f));
    g.set_subpart("fv", fp, f);
  }
  for (std::size_t k = 1; k <= nsv; ++k) g.add_part("SV", "n" + std::to_string(k));
  std::bernoulli_distribution coin(0.5);
  for (Part f = 1; f <= nf; ++f) {
    if (coin(rng)) {
      Part i = g.add_part("I");
      g.set_subpart("is", i, pick(rng, ns));
      g.set_subpart("ifn", i, f);
    }
    if (coin(rng)) {
      Part o = g.add_part("O");
      g.set_subpart("os", o, pick(rng, ns));
      g.set_subpart("ofn", o, f);
    }
  }
  for (Part s = 1; s <= ns; ++s)
    for (Part sv = 1; sv <= nsv; ++sv)
      if (coin(rng)) {
        Part l = g.add_part("LS");
        g.set_subpart("lss", l, s);
        g.set_subpart("lssv", l, sv);
      }
  for (Part s = 1; s <= ns; ++s)
    for (Part v = 1; v <= nf; ++v)
      if (coin(rng)) {
        Part l = g.add_part("LV");
        g.set_subpart("lvs", l, s);
        g.set_subpart("lvv", l, v);
      }
  for (Part sv = 1; sv <= nsv; ++sv)
    for (Part v = 1; v <= nf; ++v)
      if (coin(rng)) {
        Part l = g.add_part("LSV");
        g.set_subpart("lsvsv", l, sv);
        g.set_subpart("lsvv", l, v);
      }
  return g;
}

/// A random expression over `names` using every operator kind.
inline Expression random_expression(Rng& rng, const std::vector<std::string>& names, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 7);
  switch (kind(rng)) {
    case 0: return Expression::literal(std::uniform_int_distribution<int>(1, 9)(rng) / 4.0);
    case 1: return Expression::identifier(names[pick(rng, names.size()) - 1]);
    case 2: return Expression::negate(random_expression(rng, names, depth - 1));
    case 3: return Expression::binary(Expression::Kind::Add, random_expression(rng, names, depth - 1), random_expression(rng, names, depth - 1));
    case 4: return Expression::binary(Expression::Kind::Subtract, random_expression(rng, names, depth - 1), random_expression(rng, names, depth - 1));
    case 5: return Expression::binary(Expression::Kind::Multiply, random_expression(rng, names, depth - 1), random_expression(rng, names, depth - 1));
    case 6: return Expression::binary(Expression::Kind::Divide, random_expression(rng, names, depth - 1), Expression::literal(std::uniform_int_distribution<int>(1, 5)(rng)));
    default: return Expression::binary(Expression::Kind::Power, random_expression(rng, names, depth - 1), Expression::literal(std::uniform_int_distribution<int>(0, 3)(rng)));
  }
}

}  // namespace stockflow::testing
