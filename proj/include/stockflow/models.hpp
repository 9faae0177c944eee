// SPDX-License-Identifier: Apache-2.0
//
// Reference models: measles SEIR, the vaccination (SVE) extension and its
// composite SEIRV, the epidemiological type system, four typed models
// (SEIR, SIS, age, sex) and the dynamics of the sex-stratified SIS model.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "stockflow/composition.hpp"
#include "stockflow/diagram.hpp"
#include "stockflow/expression.hpp"
#include "stockflow/io.hpp"
#include "stockflow/ode.hpp"
#include "stockflow/stratification.hpp"

namespace stockflow::models {

inline VariableSpec var(std::string name, std::string_view expr) { return {std::move(name), parse_expression(expr)}; }

// ---------------------------------------------------------------------------
// SEIR with births and deaths (time unit: month).

inline const StockFlowDiagram& seir() {
  static const StockFlowDiagram d = build_stockflow(
      {
          {"S", {"birth"}, {"incid", "deathS"}, {"v_incid", "v_deathS"}, {"N"}},
          {"E", {"incid"}, {"inf", "deathE"}, {"v_inf", "v_deathE"}, {"N"}},
          {"I", {"inf"}, {"rec", "deathI"}, {"v_incid", "v_rec", "v_deathI"}, {"N"}},
          {"R", {"rec"}, {"deathR"}, {"v_deathR"}, {"N"}},
      },
      {{"birth", "v_birth"},
       {"incid", "v_incid"},
       {"inf", "v_inf"},
       {"rec", "v_rec"},
       {"deathS", "v_deathS"},
       {"deathE", "v_deathE"},
       {"deathI", "v_deathI"},
       {"deathR", "v_deathR"}},
      {var("v_birth", "μ*N"), var("v_incid", "β*S*I/N"), var("v_inf", "E/tlatent"), var("v_rec", "I/trecovery"),
       var("v_deathS", "S*δ"), var("v_deathE", "E*δ"), var("v_deathI", "I*δ"), var("v_deathR", "R*δ")},
      {{"N", {"v_birth", "v_incid"}}});
  return d;
}

inline ParameterSet measles_parameters() {
  return {{"β", 49.598}, {"μ", 0.03 / 12}, {"δ", 0.03 / 12}, {"tlatent", 8.0 / 30}, {"trecovery", 5.0 / 30}};
}

inline StateVector measles_initial_state() { return {{"S", 90000.0 - 930.0}, {"E", 0.0}, {"I", 930.0}, {"R", 773545.0}}; }

// ---------------------------------------------------------------------------
// Vaccination: susceptibles are vaccinated; vaccinated people can still be
// infected with reduced efficacy e.

inline const StockFlowDiagram& sve() {
  static const StockFlowDiagram d = build_stockflow(
      {
          {"S", {"F_NONE"}, {"vacc"}, {"v_vacc"}, {"N"}},
          {"V", {"vacc"}, {"deathV", "incidv"}, {"v_deathV", "v_incidv"}, {"N"}},
          {"E", {"incidv"}, {"F_NONE"}, {"V_NONE"}, {"N"}},
          {"I", {"F_NONE"}, {"F_NONE"}, {"v_incidv"}, {"N"}},
      },
      {{"vacc", "v_vacc"}, {"deathV", "v_deathV"}, {"incidv", "v_incidv"}},
      {var("v_vacc", "S*α"), var("v_deathV", "V*δ"), var("v_incidv", "β*V*I*(1.0-e)/N")},
      {{"N", {"v_incidv"}}});
  return d;
}

inline Foot foot_S() { return foot("S", "N", {{"S", "N"}}); }
inline Foot foot_E() { return foot("E", "N", {{"E", "N"}}); }
inline Foot foot_I() { return foot("I", "N", {{"I", "N"}}); }

/// Two boxes sharing the junctions S, E and I, all of them exported.
inline WiringPattern seirv_pattern() {
  return {{"S", "E", "I"}, {{"seir", {"S", "E", "I"}}, {"sve", {"S", "E", "I"}}}, {"S", "E", "I"}};
}

inline OpenStockFlow open_seir() { return open_diagram(seir(), {foot_S(), foot_E(), foot_I()}); }
inline OpenStockFlow open_sve() { return open_diagram(sve(), {foot_S(), foot_E(), foot_I()}); }

inline OpenStockFlow seirv_open() { return oapply(seirv_pattern(), {open_seir(), open_sve()}); }
inline StockFlowDiagram seirv() { return apex(seirv_open()); }

/// Time unit: day.
inline ParameterSet seirv_parameters() {
  return {{"β", 49.598 / 30}, {"μ", 0.03 / 365}, {"δ", 0.03 / 365}, {"tlatent", 8.0},
          {"trecovery", 5.0}, {"α", 0.01},       {"e", 0.9}};
}

inline StateVector seirv_initial_state() { return {{"S", 10000.0 - 1.0}, {"E", 0.0}, {"I", 1.0}, {"R", 0.0}, {"V", 0.0}}; }

// ---------------------------------------------------------------------------
// Type system: one population stock, five flow types and three sums.

inline const SystemStructureDiagram& type_system() {
  static const SystemStructureDiagram d = build_system_structure(
      {{"Pop",
        {"births", "newInfectious", "firstOrderDelay", "aging"},
        {"deaths", "newInfectious", "firstOrderDelay", "aging"},
        {"v_deaths", "v_newInfectious", "v_firstOrderDelay", "v_aging"},
        {"NS", "NI", "N"}}},
      {{"deaths", "v_deaths"},
       {"births", "v_births"},
       {"newInfectious", "v_newInfectious"},
       {"firstOrderDelay", "v_firstOrderDelay"},
       {"aging", "v_aging"}},
      {{"N", {"v_births"}}, {"NI", {"v_newInfectious"}}, {"NS", {"v_newInfectious"}}});
  return d;
}

namespace keys {

// Short forms for keys into the type system.
inline const std::string births = "births", deaths = "deaths", inf = "newInfectious", fod = "firstOrderDelay",
                         aging = "aging";

inline std::string v(const std::string& flow) { return "v_" + flow; }
inline std::string ls(const std::string& sum) { return "Pop=>" + sum; }
inline std::string lv(const std::string& flow) { return "Pop=>v_" + flow; }
inline std::string lsv(const std::string& sum, const std::string& flow) { return sum + "=>v_" + flow; }

inline std::vector<std::string> rep(const std::string& k, std::size_t n) { return std::vector<std::string>(n, k); }

inline std::vector<std::string> map(const std::vector<std::string>& flows, std::string (*f)(const std::string&)) {
  std::vector<std::string> out;
  for (const auto& x : flows) out.push_back(f(x));
  return out;
}

inline std::vector<std::string> cat(std::vector<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace keys

// ---------------------------------------------------------------------------
// SEIR aggregate model, padded with one identity (aging-typed) flow per stock.

inline const SystemStructureDiagram& seir_structure() {
  static const SystemStructureDiagram d = build_system_structure(
      {
          {"S", {"birth", "id_S"}, {"incid", "deathS", "id_S"}, {"v_incid", "v_deathS", "v_idS"}, {"N", "NS"}},
          {"E", {"incid", "id_E"}, {"inf", "deathE", "id_E"}, {"v_inf", "v_deathE", "v_idE"}, {"N", "NS"}},
          {"I",
           {"inf", "id_I"},
           {"rec", "deathI", "id_I"},
           {"v_incid", "v_rec", "v_deathI", "v_idI"},
           {"N", "NS", "NI"}},
          {"R", {"rec", "id_R"}, {"deathR", "id_R"}, {"v_deathR", "v_idR"}, {"N", "NS"}},
      },
      {{"birth", "v_birth"},
       {"incid", "v_incid"},
       {"inf", "v_inf"},
       {"rec", "v_rec"},
       {"deathS", "v_deathS"},
       {"deathE", "v_deathE"},
       {"deathI", "v_deathI"},
       {"deathR", "v_deathR"},
       {"id_S", "v_idS"},
       {"id_E", "v_idE"},
       {"id_I", "v_idI"},
       {"id_R", "v_idR"}},
      {{"N", {"v_birth"}}, {"NS", {"v_incid"}}, {"NI", {"v_incid"}}});
  return d;
}

inline TypingKeys seir_typing_keys() {
  using namespace keys;
  std::vector<std::string> F = cat({{births, inf, fod, fod}, rep(deaths, 4), rep(aging, 4)});
  return {
      {"S", rep("Pop", 4)},
      {"SV", {"N", "NS", "NI"}},
      {"LS", map({"N", "NS", "N", "NS", "N", "NS", "NI", "N", "NS"}, ls)},
      {"F", F},
      {"I", {births, aging, inf, aging, fod, aging, fod, aging}},
      {"O", {inf, deaths, aging, fod, deaths, aging, fod, deaths, aging, deaths, aging}},
      {"V", map(F, v)},
      {"LV", map({inf, deaths, aging, fod, deaths, aging, inf, fod, deaths, aging, deaths, aging}, lv)},
      {"LSV", {lsv("N", births), lsv("NS", inf), lsv("NI", inf)}},
  };
}

inline TypedDiagram typed_seir() { return make_typed(seir_structure(), type_system(), seir_typing_keys()); }

// ---------------------------------------------------------------------------
// SIS aggregate model.

inline const SystemStructureDiagram& sis_structure() {
  static const SystemStructureDiagram d = build_system_structure(
      {
          {"S",
           {"births", "id_S", "newRecovery"},
           {"deathS", "id_S", "newInfectious"},
           {"v_deathS", "v_idS", "v_newInfectious"},
           {"N", "NS"}},
          {"I",
           {"newInfectious", "id_I"},
           {"deathI", "id_I", "newRecovery"},
           {"v_deathI", "v_idI", "v_newRecovery"},
           {"N", "NS", "NI"}},
      },
      {{"births", "v_births"},
       {"deathS", "v_deathS"},
       {"deathI", "v_deathI"},
       {"newInfectious", "v_newInfectious"},
       {"newRecovery", "v_newRecovery"},
       {"id_S", "v_idS"},
       {"id_I", "v_idI"}},
      {{"N", {"v_births"}}, {"NI", {"v_newInfectious"}}, {"NS", {"v_newInfectious"}}});
  return d;
}

inline TypingKeys sis_typing_keys() {
  using namespace keys;
  std::vector<std::string> F = {births, deaths, deaths, inf, fod, aging, aging};
  return {
      {"S", rep("Pop", 2)},
      {"SV", {"N", "NI", "NS"}},
      {"LS", map({"N", "NS", "N", "NS", "NI"}, ls)},
      {"F", F},
      {"I", {births, aging, fod, inf, aging}},
      {"O", {deaths, aging, inf, deaths, aging, fod}},
      {"V", map(F, v)},
      {"LV", map({deaths, aging, inf, deaths, aging, fod}, lv)},
      {"LSV", {lsv("N", births), lsv("NI", inf), lsv("NS", inf)}},
  };
}

inline TypedDiagram typed_sis() { return make_typed(sis_structure(), type_system(), sis_typing_keys()); }

// ---------------------------------------------------------------------------
// Age strata: Child, Adult, Senior.

inline const SystemStructureDiagram& age_strata() {
  const std::vector<std::string> nI = {"v_newInfectiousChild", "v_newInfectiousAdult", "v_newInfectiousSenior"};
  static const SystemStructureDiagram d = build_system_structure(
      {
          {"Child",
           {"births", "newInfectiousChild", "id_C"},
           {"deathsChild", "newInfectiousChild", "agingChild", "id_C"},
           {"v_deathsChild", "v_newInfectiousChild", "v_agingChild", "v_id_C"},
           {"NI_Child", "NS_Child", "N"}},
          {"Adult",
           {"agingChild", "newInfectiousAdult", "id_A"},
           {"deathsAdult", "newInfectiousAdult", "agingAdult", "id_A"},
           {"v_deathsAdult", "v_newInfectiousAdult", "v_agingAdult", "v_id_A"},
           {"NI_Adult", "NS_Adult", "N"}},
          {"Senior",
           {"agingAdult", "newInfectiousSenior", "id_S"},
           {"deathsSenior", "newInfectiousSenior", "id_S"},
           {"v_deathsSenior", "v_newInfectiousSenior", "v_id_S"},
           {"NI_Senior", "NS_Senior", "N"}},
      },
      {{"births", "v_births"},
       {"newInfectiousChild", "v_newInfectiousChild"},
       {"newInfectiousAdult", "v_newInfectiousAdult"},
       {"newInfectiousSenior", "v_newInfectiousSenior"},
       {"id_C", "v_id_C"},
       {"id_A", "v_id_A"},
       {"id_S", "v_id_S"},
       {"agingChild", "v_agingChild"},
       {"agingAdult", "v_agingAdult"},
       {"deathsChild", "v_deathsChild"},
       {"deathsAdult", "v_deathsAdult"},
       {"deathsSenior", "v_deathsSenior"}},
      {{"N", {"v_births"}},
       {"NI_Child", nI},
       {"NS_Child", nI},
       {"NI_Adult", nI},
       {"NS_Adult", nI},
       {"NI_Senior", nI},
       {"NS_Senior", nI}});
  return d;
}

inline TypingKeys age_typing_keys() {
  using namespace keys;
  std::vector<std::string> F = cat({{births}, rep(inf, 3), rep(fod, 3), rep(aging, 2), rep(deaths, 3)});
  std::vector<std::string> LSV = {lsv("N", births)};
  for (int age = 0; age < 3; ++age) {
    for (int k = 0; k < 3; ++k) LSV.push_back(lsv("NI", inf));
    for (int k = 0; k < 3; ++k) LSV.push_back(lsv("NS", inf));
  }
  return {
      {"S", rep("Pop", 3)},
      {"SV", {"N", "NI", "NS", "NI", "NS", "NI", "NS"}},
      {"LS", map({"NI", "NS", "N", "NI", "NS", "N", "NI", "NS", "N"}, ls)},
      {"F", F},
      {"I", {births, inf, fod, aging, inf, fod, aging, inf, fod}},
      {"O", {deaths, inf, aging, fod, deaths, inf, aging, fod, deaths, inf, fod}},
      {"V", map(F, v)},
      {"LV", map({deaths, inf, aging, fod, deaths, inf, aging, fod, deaths, inf, fod}, lv)},
      {"LSV", LSV},
  };
}

inline TypedDiagram typed_age_strata() { return make_typed(age_strata(), type_system(), age_typing_keys()); }

// ---------------------------------------------------------------------------
// Sex strata: F and M, optionally with an aging flow per stratum so that it
// can be combined with the age strata.

inline SystemStructureDiagram sex_strata_diagram(bool with_aging) {
  std::vector<StockSpec> stocks;
  for (std::string x : {"F", "M"}) {
    StockSpec s{x,
                {"births" + x, "newInfectious" + x, "id_" + x},
                {"deaths" + x, "newInfectious" + x, "id_" + x},
                {"v_deaths" + x, "v_newInfectious" + x, "v_id" + x},
                {"NI_" + x, "NS_" + x, "N"}};
    if (with_aging) {
      s.inflows.push_back("aging" + x);
      s.outflows.push_back("aging" + x);
      s.variable_links.push_back("v_aging" + x);
    }
    stocks.push_back(std::move(s));
  }
  std::vector<FlowSpec> flows = {{"birthsF", "v_birthsF"},
                                 {"birthsM", "v_birthsM"},
                                 {"newInfectiousF", "v_newInfectiousF"},
                                 {"newInfectiousM", "v_newInfectiousM"},
                                 {"id_F", "v_idF"},
                                 {"id_M", "v_idM"},
                                 {"deathsF", "v_deathsF"},
                                 {"deathsM", "v_deathsM"}};
  if (with_aging) {
    flows.push_back({"agingF", "v_agingF"});
    flows.push_back({"agingM", "v_agingM"});
  }
  const std::vector<std::string> nI = {"v_newInfectiousF", "v_newInfectiousM"};
  return build_system_structure(
      stocks, flows,
      {{"N", {"v_birthsF", "v_birthsM"}}, {"NI_F", nI}, {"NS_F", nI}, {"NI_M", nI}, {"NS_M", nI}});
}

inline const SystemStructureDiagram& sex_strata() {
  static const SystemStructureDiagram d = sex_strata_diagram(false);
  return d;
}

inline const SystemStructureDiagram& sex_strata_with_age() {
  static const SystemStructureDiagram d = sex_strata_diagram(true);
  return d;
}

inline TypingKeys sex_typing_keys(bool with_aging) {
  using namespace keys;
  std::vector<std::string> F = {births, births, inf, inf, fod, fod, deaths, deaths};
  std::vector<std::string> I = {births, inf, fod}, O = {deaths, inf, fod};
  if (with_aging) {
    F.insert(F.end(), {aging, aging});
    I.push_back(aging);
    O.push_back(aging);
  }
  std::vector<std::string> LSV = {lsv("N", births), lsv("N", births)};
  for (int sex = 0; sex < 2; ++sex) {
    LSV.insert(LSV.end(), {lsv("NI", inf), lsv("NI", inf), lsv("NS", inf), lsv("NS", inf)});
  }
  return {
      {"S", rep("Pop", 2)},
      {"SV", {"N", "NI", "NS", "NI", "NS"}},
      {"LS", map({"NI", "NS", "N", "NI", "NS", "N"}, ls)},
      {"F", F},
      {"I", cat({I, I})},
      {"O", cat({O, O})},
      {"V", map(F, v)},
      {"LV", map(cat({O, O}), lv)},
      {"LSV", LSV},
  };
}

inline TypedDiagram typed_sex_strata() { return make_typed(sex_strata(), type_system(), sex_typing_keys(false)); }

inline TypedDiagram typed_sex_strata_with_age() {
  return make_typed(sex_strata_with_age(), type_system(), sex_typing_keys(true));
}

// ---------------------------------------------------------------------------
// Dynamics of the sex-stratified SIS model (time unit: day).

inline std::map<std::string, Expression> sis_sex_dynamics() {
  std::map<std::string, Expression> out;
  auto put = [&](const std::string& v, std::string_view e) { out.emplace(v, parse_expression(e)); };
  put("v_birthsv_birthsF", "μF*NN");
  put("v_birthsv_birthsM", "μM*NN");
  put("v_newInfectiousv_newInfectiousF", "βF*SF*(ff*NINI_F/NSNS_F + fm*NINI_M/NSNS_M)");
  put("v_newInfectiousv_newInfectiousM", "βM*SM*(mf*NINI_F/NSNS_F + mm*NINI_M/NSNS_M)");
  put("v_newRecoveryv_idF", "IF/trecoveryF");
  put("v_newRecoveryv_idM", "IM/trecoveryM");
  put("v_deathSv_deathsF", "SF*δF");
  put("v_deathIv_deathsF", "IF*δF");
  put("v_deathSv_deathsM", "SM*δM");
  put("v_deathIv_deathsM", "IM*δM");
  return out;
}

inline ParameterSet sis_sex_parameters() {
  return {{"βF", 0.5},
          {"βM", 0.6},
          {"μM", 0.0},
          {"μF", 0.03 / 365 / 2.0},
          {"δM", 0.05 / 365 / 2.0},
          {"δF", 0.01 / 365 / 2.0},
          {"trecoveryM", 5.0},
          {"trecoveryF", 5.0},
          {"ff", 0.5},
          {"fm", 0.5},
          {"mf", 0.5},
          {"mm", 0.5}};
}

inline StateVector sis_sex_initial_state() { return {{"SM", 5400.0}, {"SF", 4600.0}, {"IM", 10.0}, {"IF", 1.0}}; }

/// stratify(SIS, sex), flattened, with dynamics attached.
inline StockFlowDiagram sis_sex() {
  return attach_dynamics(flatten_names(stratify(typed_sis(), typed_sex_strata())), sis_sex_dynamics());
}

// ---------------------------------------------------------------------------
// Palettes for typed rendering, indexed by type element.

inline std::vector<std::string> flow_palette() {
  return {"antiquewhite4", "antiquewhite", "gold", "saddlebrown", "slateblue", "blueviolet", "olive"};
}
inline std::vector<std::string> stock_palette() { return {"deeppink", "darkorchid", "darkred", "coral"}; }
inline std::vector<std::string> sum_palette() { return {"cornflowerblue", "cyan4", "cyan", "chartreuse"}; }

// ---------------------------------------------------------------------------
// The bundle files shipped in data/, keyed by file name.

inline std::map<std::string, ModelBundle> bundles() {
  auto typed_bundle = [](const std::string& name, const SystemStructureDiagram& d, const std::string& typing,
                         const TypingKeys& keys) {
    ModelBundle b;
    b.diagrams.emplace(name, d);
    b.diagrams.emplace("S_type", type_system());
    b.typings.emplace(typing, TypingSpec{name, "S_type", keys});
    return b;
  };

  std::map<std::string, ModelBundle> out;
  {
    ModelBundle b;
    b.diagrams.emplace("seir", seir());
    b.parameters.emplace("measles", measles_parameters());
    b.initial_states.emplace("measles", measles_initial_state());
    out.emplace("seir.json", std::move(b));
  }
  {
    ModelBundle b;
    b.diagrams.emplace("sve", sve());
    out.emplace("sve.json", std::move(b));
  }
  {
    ModelBundle b;
    b.diagrams.emplace("seir", seir());
    b.diagrams.emplace("sve", sve());
    b.feet.emplace("footS", foot_S());
    b.feet.emplace("footE", foot_E());
    b.feet.emplace("footI", foot_I());
    b.open.emplace("seir", OpenSpec{"seir", {"footS", "footE", "footI"}});
    b.open.emplace("sve", OpenSpec{"sve", {"footS", "footE", "footI"}});
    b.patterns.emplace("seirv", seirv_pattern());
    b.parameters.emplace("seirv", seirv_parameters());
    b.initial_states.emplace("seirv", seirv_initial_state());
    out.emplace("seirv_composition.json", std::move(b));
  }
  {
    ModelBundle b;
    b.diagrams.emplace("seirv", seirv());
    b.parameters.emplace("seirv", seirv_parameters());
    b.initial_states.emplace("seirv", seirv_initial_state());
    out.emplace("seirv.json", std::move(b));
  }
  {
    ModelBundle b;
    b.diagrams.emplace("S_type", type_system());
    out.emplace("type_system.json", std::move(b));
  }
  out.emplace("seir_typed.json", typed_bundle("S_seir", seir_structure(), "t_seir", seir_typing_keys()));
  out.emplace("sis_typed.json", typed_bundle("S_sis", sis_structure(), "t_sis", sis_typing_keys()));
  out.emplace("age_strata.json", typed_bundle("S_age_strata", age_strata(), "t_age_strata", age_typing_keys()));
  out.emplace("sex_strata.json", typed_bundle("S_sex_strata", sex_strata(), "t_sex_strata", sex_typing_keys(false)));
  out.emplace("sex_strata_with_age.json", typed_bundle("S_sex_strata_withAge", sex_strata_with_age(),
                                                       "t_sex_strata_withAge", sex_typing_keys(true)));
  {
    ModelBundle b;
    b.dynamics.emplace("sis_sex", sis_sex_dynamics());
    b.parameters.emplace("sis_sex", sis_sex_parameters());
    b.initial_states.emplace("sis_sex", sis_sex_initial_state());
    out.emplace("sis_sex_dynamics.json", std::move(b));
  }
  {
    ModelBundle b;
    b.diagrams.emplace("sis_sex", sis_sex());
    b.parameters.emplace("sis_sex", sis_sex_parameters());
    b.initial_states.emplace("sis_sex", sis_sex_initial_state());
    out.emplace("sis_sex.json", std::move(b));
  }
  return out;
}

}  // namespace stockflow::models
