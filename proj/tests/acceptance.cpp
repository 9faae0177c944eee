// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Tolerances are fixed below.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "stockflow/models.hpp"

using namespace stockflow;

namespace {

constexpr double kRhsTol = 1e-12;        // relative, component-wise
constexpr double kJacobianTol = 1e-6;    // relative to the largest Jacobian entry
constexpr double kConserveTol = 1e-6;    // relative drift of the total population
constexpr double kDp45Abstol = 1e-8;     // absolute error target on u' = -u
constexpr double kRatioLo = 12.0, kRatioHi = 20.0;

// Accumulates failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

double rel_err(double a, double b) {
  double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Independent oracles.

// SEIR with births and deaths, state order S, E, I, R.
struct SeirByHand {
  double beta, mu, delta, tl, tr;

  explicit SeirByHand(const ParameterSet& p)
      : beta(p.at("β")), mu(p.at("μ")), delta(p.at("δ")), tl(p.at("tlatent")), tr(p.at("trecovery")) {}

  std::array<double, 4> rhs(const std::array<double, 4>& u) const {
    auto [S, E, I, R] = u;
    double N = S + E + I + R;
    double inc = beta * S * I / N;
    return {mu * N - inc - delta * S, inc - E / tl - delta * E, E / tl - I / tr - delta * I, I / tr - delta * R};
  }

  std::array<std::array<double, 4>, 4> jacobian(const std::array<double, 4>& u) const {
    auto [S, E, I, R] = u;
    double N = S + E + I + R;
    double q = beta * S * I / (N * N);
    std::array<double, 4> dinc = {beta * I / N - q, -q, beta * S / N - q, -q};
    std::array<std::array<double, 4>, 4> J{};
    for (int j = 0; j < 4; ++j) {
      J[0][j] = mu - dinc[j] - (j == 0 ? delta : 0.0);
      J[1][j] = dinc[j] - (j == 1 ? 1.0 / tl + delta : 0.0);
      J[2][j] = (j == 1 ? 1.0 / tl : 0.0) - (j == 2 ? 1.0 / tr + delta : 0.0);
      J[3][j] = (j == 2 ? 1.0 / tr : 0.0) - (j == 3 ? delta : 0.0);
    }
    return J;
  }
};

// SEIR glued to SVE along S, E and I.
StateVector seirv_by_hand(const ParameterSet& p, const StateVector& u) {
  double S = u.at("S"), E = u.at("E"), I = u.at("I"), R = u.at("R"), V = u.at("V");
  double N = S + E + I + R + V;
  double b = p.at("β"), mu = p.at("μ"), d = p.at("δ"), tl = p.at("tlatent"), tr = p.at("trecovery"),
         a = p.at("α"), e = p.at("e");
  double inc = b * S * I / N, incv = b * V * I * (1.0 - e) / N;
  return {{"S", mu * N - inc - d * S - a * S},
          {"E", inc + incv - E / tl - d * E},
          {"I", E / tl - I / tr - d * I},
          {"R", I / tr - d * R},
          {"V", a * S - d * V - incv}};
}

// Tuples of elements sharing one type, counted by visiting every combination.
std::size_t brute_count(const std::vector<TypedDiagram>& ts, std::size_t ob) {
  std::vector<const std::vector<Part>*> comps;
  for (const auto& t : ts) {
    comps.push_back(&t.typing().component(ob));
    if (comps.back()->empty()) return 0;
  }
  std::size_t count = 0;
  std::vector<std::size_t> idx(ts.size(), 0);
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

double total(const std::vector<double>& u) {
  double s = 0.0;
  for (double x : u) s += x;
  return s;
}

// ---------------------------------------------------------------------------
// Criteria.

void seir_counts(Check& c) {
  const StockFlowDiagram& d = models::seir();
  const std::vector<std::pair<std::string, std::size_t>> want = {{"S", 4},  {"F", 8},   {"V", 8},
                                                                 {"SV", 1}, {"LS", 4},  {"LV", 8},
                                                                 {"LSV", 2}, {"I", 4}, {"O", 7}};
  for (const auto& [ob, n] : want)
    c.expect(d.count(ob) == n, "|" + ob + "| = " + std::to_string(d.count(ob)) + ", want " + std::to_string(n));
  c.expect(validate_instance(d.instance()).empty(), "validate_instance reports problems");
}

void ode_correctness(Check& c) {
  ParameterSet p = models::measles_parameters();
  VectorField vf(models::seir(), p);
  SeirByHand ref(p);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pop(1.0, 1e6);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 4> u = {89070.0, 0.0, 930.0, 773545.0};
    if (trial > 0) u = {pop(rng), pop(rng), pop(rng), pop(rng)};
    auto want = ref.rhs(u);
    auto got = vf(std::vector<double>(u.begin(), u.end()), 0.0);
    for (int i = 0; i < 4; ++i) worst = std::max(worst, rel_err(got[i], want[i]));
  }
  c.expect(worst <= kRhsTol, "rhs relative error " + fmt(worst));

  std::array<double, 4> u = {89070.0, 120.0, 930.0, 773545.0};
  auto J = ref.jacobian(u);
  double scale = 0.0, jworst = 0.0;
  for (auto& row : J)
    for (double x : row) scale = std::max(scale, std::fabs(x));
  for (int j = 0; j < 4; ++j) {
    double h = 1e-4 * std::max(1.0, std::fabs(u[j]));
    std::vector<double> up(u.begin(), u.end()), dn(u.begin(), u.end());
    up[j] += h;
    dn[j] -= h;
    auto fp = vf(up, 0.0), fm = vf(dn, 0.0);
    for (int i = 0; i < 4; ++i) jworst = std::max(jworst, std::fabs((fp[i] - fm[i]) / (2.0 * h) - J[i][j]) / scale);
  }
  c.expect(jworst <= kJacobianTol, "jacobian error " + fmt(jworst));
  c.note("rhs " + fmt(worst) + ", jacobian " + fmt(jworst));
}

void conservation(Check& c) {
  VectorField vf(models::seir(), models::measles_parameters());
  AdaptiveOptions opt;
  opt.abstol = 1e-8;
  Trajectory tr = integrate_adaptive(vf, models::measles_initial_state(), 0.0, 120.0, opt);
  double worst = 0.0;
  for (const auto& u : tr.states) worst = std::max(worst, std::fabs(total(u) - 863545.0) / 863545.0);
  c.expect(worst <= kConserveTol, "drift " + fmt(worst));
  c.expect(tr.times.back() == 120.0, "run ends at " + fmt(tr.times.back()));
  c.note(std::to_string(tr.size()) + " points, drift " + fmt(worst));
}

void integrator_order(Check& c) {
  Rhs decay = [](const std::vector<double>& u, double, std::vector<double>& du) { du.assign(1, -u[0]); };
  std::vector<double> errs;
  for (int k = 0; k < 4; ++k) {
    Trajectory tr = integrate_fixed(decay, {1.0}, 0.0, 1.0, 0.1 / std::pow(2.0, k));
    errs.push_back(std::fabs(tr.back()[0] - std::exp(-1.0)));
  }
  std::string ratios;
  for (std::size_t k = 1; k < errs.size(); ++k) {
    double r = errs[k - 1] / errs[k];
    c.expect(r >= kRatioLo && r <= kRatioHi, "rk4 ratio " + fmt(r));
    ratios += (k > 1 ? "/" : "") + fmt(r);
  }
  // The global error tracks abstol only when the relative tolerance is as
  // tight; at the default reltol it is set by reltol.
  AdaptiveOptions opt;
  opt.abstol = opt.reltol = kDp45Abstol;
  Trajectory tr = integrate_adaptive(decay, {1.0}, 0.0, 10.0, opt);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k)
    worst = std::max(worst, std::fabs(tr.states[k][0] - std::exp(-tr.times[k])));
  c.expect(worst <= kDp45Abstol, "dp45 error " + fmt(worst));
  c.note("rk4 ratios " + ratios + ", dp45 error " + fmt(worst));
}

void causal_loop(Check& c) {
  CausalLoopGraph cl = to_causal_loop(models::seir());
  c.expect(cl.nodes() == 13, "nodes " + std::to_string(cl.nodes()));
  c.expect(cl.edges() == 25, "edges " + std::to_string(cl.edges()));
  using NamedEdge = std::pair<std::string, std::string>;
  auto names = cl.node_names();
  std::vector<NamedEdge> got;
  for (Part e = 1; e <= cl.edges(); ++e) got.emplace_back(names[cl.source(e) - 1], names[cl.target(e) - 1]);
  std::vector<NamedEdge> want = {
      {"S", "incid"}, {"S", "deathS"}, {"E", "inf"},   {"E", "deathE"}, {"I", "incid"},  {"I", "rec"},
      {"I", "deathI"}, {"R", "deathR"}, {"S", "N"},     {"E", "N"},      {"I", "N"},      {"R", "N"},
      {"N", "birth"},  {"N", "incid"},  {"birth", "S"}, {"incid", "E"},  {"inf", "I"},    {"rec", "R"},
      {"S", "incid"},  {"S", "deathS"}, {"E", "inf"},   {"E", "deathE"}, {"I", "rec"},    {"I", "deathI"},
      {"R", "deathR"}};
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  c.expect(got == want, "edge list differs from the one read off the declaration");
  const std::vector<std::pair<std::string, StockFlowDiagram>> ds = {
      {"SEIR", models::seir()}, {"SVE", models::sve()}, {"SIS", models::sis_sex()}};
  for (const auto& [name, d] : ds)
    c.expect(to_causal_loop(d) == to_causal_loop(to_system_structure(d)), "triangle fails on " + name);
}

void composition(Check& c) {
  StockFlowDiagram d = models::seirv();
  const std::vector<std::pair<std::string, std::size_t>> want = {{"S", 5}, {"F", 11}, {"SV", 1}, {"V", 11}};
  for (const auto& [ob, n] : want)
    c.expect(d.count(ob) == n, "|" + ob + "| = " + std::to_string(d.count(ob)) + ", want " + std::to_string(n));
  ParameterSet p = models::seirv_parameters();
  VectorField vf(d, p);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pop(0.5, 1e4);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    StateVector u = models::seirv_initial_state();
    if (trial > 0) u = {{"S", pop(rng)}, {"E", pop(rng)}, {"I", pop(rng)}, {"R", pop(rng)}, {"V", pop(rng)}};
    StateVector got = vf(u, 0.0), ref = seirv_by_hand(p, u);
    for (const auto& [s, x] : ref) worst = std::max(worst, rel_err(got.at(s), x));
  }
  c.expect(worst <= kRhsTol, "rhs relative error " + fmt(worst));
  c.expect(p.at("μ") == p.at("δ"), "births and deaths are unbalanced");
  Trajectory tr = integrate_adaptive(vf, models::seirv_initial_state(), 0.0, 100.0);
  double drift = 0.0, lowest = 0.0;
  for (const auto& u : tr.states) {
    drift = std::max(drift, std::fabs(total(u) - 10000.0) / 10000.0);
    for (double x : u) lowest = std::min(lowest, x);
  }
  c.expect(lowest >= 0.0, "negative stock " + fmt(lowest));
  c.expect(drift <= kConserveTol, "drift " + fmt(drift));
  c.note("rhs " + fmt(worst) + ", drift " + fmt(drift));
}

void naturality(Check& c) {
  const std::vector<std::pair<std::string, TypedDiagram>> ts = {{"t_seir", models::typed_seir()},
                                                                {"t_sis", models::typed_sis()},
                                                                {"t_age_strata", models::typed_age_strata()},
                                                                {"t_sex_strata", models::typed_sex_strata()},
                                                                {"t_sex_strata_withAge",
                                                                 models::typed_sex_strata_with_age()}};
  for (const auto& [name, t] : ts) c.expect(is_natural(t.typing()).natural(), name + " is not natural");

  TypedDiagram t = models::typed_seir();
  const std::size_t F = schema_stockflow().object_index("F");
  const std::size_t ntypes = models::type_system().count("F");
  std::size_t tried = 0;
  for (Part x = 1; x <= t.diagram().count("F"); ++x)
    for (Part y = 1; y <= ntypes; ++y) {
      if (y == t.typing()(F, x)) continue;
      auto comps = t.typing().components();
      comps[F][x - 1] = y;
      Homomorphism h(t.diagram().instance(), models::type_system().instance(), comps);
      c.expect(!is_natural(h).natural(), "mutation F" + std::to_string(x) + " -> " + std::to_string(y) + " is natural");
      ++tried;
    }
  c.note(std::to_string(tried) + " flow mutations");
}

void stratification_counts(Check& c) {
  struct Case {
    std::string name;
    std::vector<TypedDiagram> ts;
    std::size_t stocks;
    std::size_t flows;  // 0: not pinned
  };
  const std::vector<Case> cases = {
      {"seir x age", {models::typed_seir(), models::typed_age_strata()}, 12, 30},
      {"sis x sex", {models::typed_sis(), models::typed_sex_strata()}, 4, 0},
      {"seir x sex x age",
       {models::typed_seir(), models::typed_sex_strata_with_age(), models::typed_age_strata()},
       24,
       0}};
  const Schema& sc = schema_stockflow();
  for (const auto& k : cases) {
    TypedDiagram r = typed_stratify(k.ts);
    SystemStructureDiagram s = stratify(k.ts);
    c.expect(s.count("S") == k.stocks, k.name + ": " + std::to_string(s.count("S")) + " stocks");
    if (k.flows) c.expect(s.count("F") == k.flows, k.name + ": " + std::to_string(s.count("F")) + " flows");
    for (std::size_t ob = 0; ob < sc.objects.size(); ++ob)
      c.expect(s.instance().nparts(ob) == brute_count(k.ts, ob), k.name + ": " + sc.objects[ob] + " count differs");
    c.expect(validate_instance(s.instance()).empty(), k.name + ": invalid instance");
    c.expect(r.diagram() == s, k.name + ": typed and untyped results differ");
    c.expect(is_natural(r.typing()).natural(), k.name + ": typing is not natural");
  }
}

void stratified_solve(Check& c) {
  StockFlowDiagram d =
      attach_dynamics(flatten_names(stratify(models::typed_sis(), models::typed_sex_strata())), models::sis_sex_dynamics());
  VectorField vf(d, models::sis_sex_parameters());
  Trajectory tr = integrate_adaptive(vf, models::sis_sex_initial_state(), 0.0, 50.0);
  double lowest = 0.0;
  for (const auto& u : tr.states)
    for (double x : u) lowest = std::min(lowest, x);
  c.expect(tr.times.back() == 50.0, "run ends at " + fmt(tr.times.back()));
  c.expect(lowest >= 0.0, "negative stock " + fmt(lowest));

  // Every birth rate multiplies the whole population NN, so total births are
  // (μF + μM) N against deaths δ N. Setting all four rates equal leaves
  // N' = μ N. Run it with the common rate set to the female birth rate.
  const double mu = models::sis_sex_parameters().at("μF");
  const double n0 = total(vf.pack(models::sis_sex_initial_state()));
  auto run = [&](double births, double deaths) {
    ParameterSet p = models::sis_sex_parameters();
    p["μF"] = p["μM"] = births;
    p["δF"] = p["δM"] = deaths;
    return integrate_adaptive(VectorField(d, p), models::sis_sex_initial_state(), 0.0, 50.0);
  };
  double drift = 0.0, growth_err = 0.0;
  Trajectory sym = run(mu, mu);
  for (std::size_t k = 0; k < sym.size(); ++k) {
    drift = std::max(drift, std::fabs(total(sym.states[k]) - n0) / n0);
    growth_err = std::max(growth_err, rel_err(total(sym.states[k]), n0 * std::exp(mu * sym.times[k])));
  }
  c.expect(drift <= kConserveTol, "with δM=δF=μM=μF the total drifts by " + fmt(drift));
  // Balanced case: deaths equal total births.
  double balanced = 0.0;
  for (const auto& u : run(mu, 2.0 * mu).states) balanced = std::max(balanced, std::fabs(total(u) - n0) / n0);
  c.expect(growth_err <= kConserveTol, "symmetric total departs from N0 exp(μt) by " + fmt(growth_err));
  c.expect(balanced <= kConserveTol, "balanced total drifts by " + fmt(balanced));
  c.note("symmetric drift " + fmt(drift) + " matches exp(μt) to " + fmt(growth_err) +
         "; with δ = μF + μM the drift is " + fmt(balanced));
}

void determinism(Check& c) {
  Palettes pal{models::flow_palette(), models::stock_palette(), models::sum_palette()};
  std::size_t dots = 0, csvs = 0;
  for (const auto& [file, b] : models::bundles()) {
    std::string text = emit_json(b);
    ModelBundle back = parse_json(text);
    c.expect(back == b, file + ": round trip changes the bundle");
    c.expect(emit_json(back) == text, file + ": round trip changes the bytes");
    for (const auto& [name, d] : b.diagrams) {
      const auto& s = structure_of(d);
      c.expect(emit_dot(s, name) == emit_dot(structure_of(back.diagram(name)), name), file + ": dot differs");
      c.expect(emit_dot_causal(to_causal_loop(s), name) == emit_dot_causal(to_causal_loop(s), name),
               file + ": causal dot differs");
      dots += 2;
    }
    for (const auto& [name, spec] : b.typings) {
      c.expect(emit_dot_typed(b.typed(name), pal, name) == emit_dot_typed(back.typed(name), pal, name),
               file + ": typed dot differs");
      ++dots;
    }
    // Simulate every diagram whose stocks match an initial state carrying the
    // same key as a parameter set.
    for (const auto& [key, p] : b.parameters) {
      auto init = b.initial_states.find(key);
      if (init == b.initial_states.end()) continue;
      for (const auto& [name, d] : b.diagrams) {
        const auto* sf = std::get_if<StockFlowDiagram>(&d);
        if (!sf) continue;
        auto stocks = sf->stock_names();
        std::sort(stocks.begin(), stocks.end());
        std::vector<std::string> keys;
        for (const auto& [s, x] : init->second) keys.push_back(s);
        if (stocks != keys) continue;
        auto solve = [&](const ModelBundle& from) {
          return emit_csv(integrate_adaptive(VectorField(from.stockflow(name), from.parameters.at(key)),
                                             from.initial_states.at(key), 0.0, 50.0));
        };
        std::string csv = solve(b);
        c.expect(csv == solve(back), file + ": csv differs");
        c.expect(emit_csv(parse_csv(csv)) == csv, file + ": csv round trip differs");
        ++csvs;
      }
    }
  }
  c.expect(csvs >= 3, "only " + std::to_string(csvs) + " simulations found");
  c.note(std::to_string(models::bundles().size()) + " bundles, " + std::to_string(dots) + " dot, " +
         std::to_string(csvs) + " csv");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"SEIR encoding counts", seir_counts},
      {"ODE right-hand side and Jacobian", ode_correctness},
      {"measles conservation", conservation},
      {"integrator order", integrator_order},
      {"causal-loop semantics", causal_loop},
      {"SEIRV composition", composition},
      {"typing naturality", naturality},
      {"stratification counts", stratification_counts},
      {"stratified SIS solve", stratified_solve},
      {"determinism and round trip", determinism}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = c.failures.empty();
    failed += !pass;
    std::printf("%s %2zu %s (%.2fs)", pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), secs);
    for (const auto& n : c.notes) std::printf(" [%s]", n.c_str());
    std::printf("\n");
    for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
