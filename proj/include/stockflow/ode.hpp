// SPDX-License-Identifier: Apache-2.0
//
// ODE semantics: du_s/dt is the sum of the inflow rates of s minus the sum of
// its outflow rates, where each flow's rate is the value of its auxiliary
// variable. Two integrators are provided: fixed-step RK4 and adaptive
// Dormand-Prince 5(4).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "stockflow/diagram.hpp"
#include "stockflow/error.hpp"
#include "stockflow/expression.hpp"

namespace stockflow {

using ParameterSet = std::map<std::string, double>;
using StateVector = std::map<std::string, double>;

/// Value of every sum variable: the sum of the stocks linked to it.
inline std::map<std::string, double> sumvar_values(const StockFlowDiagram& d, const StateVector& u) {
  const Instance& g = d.instance();
  std::map<std::string, double> out;
  for (Part sv = 1; sv <= g.nparts("SV"); ++sv) {
    double sum = 0.0;
    for (Part ls : g.incident("lssv", sv)) {
      const std::string& s = g.name("S", g.subpart("lss", ls));
      auto it = u.find(s);
      if (it == u.end()) throw ValidationError("state has no value for stock '" + s + "'");
      sum += it->second;
    }
    out[g.name("SV", sv)] = sum;
  }
  return out;
}

/// The right-hand side of the ODE system of a diagram, with parameters bound.
/// States are dense vectors in stock order.
class VectorField {
 public:
  VectorField(const StockFlowDiagram& d, const ParameterSet& p) {
    const Instance& g = d.instance();
    stocks_ = g.names("S");
    const std::size_t ns = stocks_.size(), nsv = g.nparts("SV");
    std::map<std::string, long, std::less<>> slot;
    for (std::size_t s = 0; s < ns; ++s) slot[stocks_[s]] = static_cast<long>(s);
    for (Part sv = 1; sv <= nsv; ++sv) slot[g.name("SV", sv)] = static_cast<long>(ns + sv - 1);
    slots_.assign(ns + nsv, 0.0);
    for (const auto& [name, value] : p) {
      if (!std::isfinite(value)) throw ValidationError("parameter '" + name + "' is not finite");
      if (slot.count(name)) continue;  // stocks and sums shadow parameters
      slot[name] = static_cast<long>(slots_.size());
      slots_.push_back(value);
    }

    sum_terms_.resize(nsv);
    for (Part sv = 1; sv <= nsv; ++sv)
      for (Part ls : g.incident("lssv", sv)) sum_terms_[sv - 1].push_back(g.subpart("lss", ls) - 1);

    auto lookup = [&](const std::string& n) {
      auto it = slot.find(n);
      return it == slot.end() ? -1L : it->second;
    };
    for (Part v = 1; v <= g.nparts("V"); ++v) {
      try {
        vars_.emplace_back(d.expression(v), lookup);
      } catch (const RuntimeFailure& e) {
        throw ValidationError("variable '" + g.name("V", v) + "': " + e.what());
      }
    }
    for (Part f = 1; f <= g.nparts("F"); ++f) flow_var_.push_back(g.subpart("fv", f) - 1);
    for (Part i = 1; i <= g.nparts("I"); ++i) inflow_.push_back({g.subpart("is", i) - 1, g.subpart("ifn", i) - 1});
    for (Part o = 1; o <= g.nparts("O"); ++o) outflow_.push_back({g.subpart("os", o) - 1, g.subpart("ofn", o) - 1});
  }

  std::size_t dimension() const { return stocks_.size(); }
  const std::vector<std::string>& stocks() const { return stocks_; }

  /// Rate of every flow at (u, t), in F order.
  std::vector<double> flow_rates(const std::vector<double>& u, double t) const {
    std::vector<double> vals = variable_values(u, t);
    std::vector<double> out(flow_var_.size());
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = vals[flow_var_[f]];
    return out;
  }

  void operator()(const std::vector<double>& u, double t, std::vector<double>& du) const {
    std::vector<double> rates = flow_rates(u, t);
    du.assign(stocks_.size(), 0.0);
    for (auto [s, f] : inflow_) du[s] += rates[f];
    for (auto [s, f] : outflow_) du[s] -= rates[f];
  }

  std::vector<double> operator()(const std::vector<double>& u, double t) const {
    std::vector<double> du;
    (*this)(u, t, du);
    return du;
  }

  StateVector operator()(const StateVector& u, double t) const { return unpack((*this)(pack(u), t)); }

  /// Dense vector from a state that covers exactly the diagram's stocks.
  std::vector<double> pack(const StateVector& u) const {
    std::vector<double> out;
    for (const auto& s : stocks_) {
      auto it = u.find(s);
      if (it == u.end()) throw ValidationError("initial state has no value for stock '" + s + "'");
      out.push_back(it->second);
    }
    for (const auto& [name, value] : u)
      if (std::find(stocks_.begin(), stocks_.end(), name) == stocks_.end())
        throw ValidationError("initial state names unknown stock '" + name + "'");
    return out;
  }

  StateVector unpack(const std::vector<double>& u) const {
    StateVector out;
    for (std::size_t s = 0; s < stocks_.size(); ++s) out[stocks_[s]] = u.at(s);
    return out;
  }

 private:
  std::vector<double> variable_values(const std::vector<double>& u, double t) const {
    if (u.size() != stocks_.size())
      throw RuntimeFailure("state has " + std::to_string(u.size()) + " entries, expected " +
                           std::to_string(stocks_.size()));
    std::vector<double> slots = slots_;
    std::copy(u.begin(), u.end(), slots.begin());
    for (std::size_t sv = 0; sv < sum_terms_.size(); ++sv) {
      double sum = 0.0;
      for (std::size_t s : sum_terms_[sv]) sum += u[s];
      slots[stocks_.size() + sv] = sum;
    }
    std::vector<double> vals(vars_.size());
    for (std::size_t v = 0; v < vars_.size(); ++v) vals[v] = vars_[v](slots, t);
    return vals;
  }

  struct Edge {
    std::size_t stock;
    std::size_t flow;
  };

  std::vector<std::string> stocks_;
  std::vector<double> slots_;  // stocks, then sums, then parameters
  std::vector<std::vector<std::size_t>> sum_terms_;
  std::vector<CompiledExpression> vars_;
  std::vector<std::size_t> flow_var_;
  std::vector<Edge> inflow_;
  std::vector<Edge> outflow_;
};

inline VectorField vectorfield(const StockFlowDiagram& d, const ParameterSet& p) { return VectorField(d, p); }

using Rhs = std::function<void(const std::vector<double>& u, double t, std::vector<double>& du)>;

struct Trajectory {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::string method;
  std::map<std::string, double> settings;

  std::size_t size() const { return times.size(); }
  const std::vector<double>& back() const { return states.back(); }
  StateVector state(std::size_t k) const {
    StateVector out;
    for (std::size_t s = 0; s < names.size(); ++s) out[names[s]] = states.at(k).at(s);
    return out;
  }
};

namespace detail {

inline void require_finite(const std::vector<double>& u, double t) {
  for (double x : u)
    if (!std::isfinite(x)) throw RuntimeFailure("non-finite state at t=" + std::to_string(t));
}

inline std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("u" + std::to_string(i + 1));
  return out;
}

}  // namespace detail

/// Classical RK4 on the grid t0, t0+dt, ..., with a shortened last step so the
/// grid ends exactly at t1.
inline Trajectory integrate_fixed(const Rhs& f, std::vector<double> u, double t0, double t1, double dt,
                                  std::vector<std::string> names = {}) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(t1 > t0)) throw ValidationError("t1 must be greater than t0");
  detail::require_finite(u, t0);
  const std::size_t n = u.size();
  Trajectory tr{names.empty() ? detail::default_names(n) : std::move(names), {t0}, {u}, "rk4", {{"dt", dt}}};

  const double span = t1 - t0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / dt * (1.0 - 1e-12)));
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double t = t0;
  for (std::size_t k = 1; k <= steps; ++k) {
    double tn = k == steps ? t1 : t0 + static_cast<double>(k) * dt;
    double h = tn - t;
    f(u, t, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    f(tmp, t + 0.5 * h, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    f(tmp, t + 0.5 * h, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
    f(tmp, tn, k4);
    for (std::size_t i = 0; i < n; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t = tn;
    detail::require_finite(u, t);
    tr.times.push_back(t);
    tr.states.push_back(u);
  }
  return tr;
}

struct AdaptiveOptions {
  double abstol = 1e-8;
  double reltol = 1e-6;
  double initial_step = 0.0;  // 0 means (t1 - t0) / 100
  std::size_t max_steps = 10'000'000;
};

/// Dormand-Prince 5(4) with PI step-size control. Every accepted step is
/// recorded.
inline Trajectory integrate_adaptive(const Rhs& f, std::vector<double> u, double t0, double t1,
                                     const AdaptiveOptions& opt = {}, std::vector<std::string> names = {}) {
  if (!(opt.abstol > 0.0) || !(opt.reltol > 0.0)) throw ValidationError("tolerances must be positive");
  if (!(t1 > t0)) throw ValidationError("t1 must be greater than t0");
  detail::require_finite(u, t0);
  const std::size_t n = u.size();
  Trajectory tr{names.empty() ? detail::default_names(n) : std::move(names),
                {t0},
                {u},
                "dp45",
                {{"abstol", opt.abstol}, {"reltol", opt.reltol}}};

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // Difference between the 5th and embedded 4th order weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  constexpr double safety = 0.9, facmin = 0.2, facmax = 10.0;
  constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta;

  double h = opt.initial_step > 0.0 ? opt.initial_step : (t1 - t0) / 100.0;
  double t = t0;
  double err_prev = 1e-4;
  bool rejected = false;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y(n), un(n);
  f(u, t, k1);
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) throw RuntimeFailure("step limit exceeded at t=" + std::to_string(t));
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw RuntimeFailure("step size underflow at t=" + std::to_string(t));
    // A remainder below rounding level is folded into this step.
    bool last = t + h >= t1 - 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t1));
    if (last) h = t1 - t;

    for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + h * a21 * k1[i];
    f(y, t + c2 * h, k2);
    for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(y, t + c3 * h, k3);
    for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(y, t + c4 * h, k4);
    for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(y, t + c5 * h, k5);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = u[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(y, t + h, k6);
    for (std::size_t i = 0; i < n; ++i)
      un[i] = u[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(un, t + h, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = opt.abstol + opt.reltol * std::max(std::abs(u[i]), std::abs(un[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = n == 0 ? 0.0 : std::sqrt(err / static_cast<double>(n));
    if (!std::isfinite(err)) {
      h *= facmin;
      rejected = true;
      continue;
    }

    if (err <= 1.0) {
      double fac = err == 0.0 ? facmax : safety * std::pow(err, -alpha) * std::pow(err_prev, beta);
      fac = std::clamp(fac, facmin, rejected ? 1.0 : facmax);
      t = last ? t1 : t + h;
      u.swap(un);
      k1.swap(k7);
      detail::require_finite(u, t);
      tr.times.push_back(t);
      tr.states.push_back(u);
      err_prev = std::max(err, 1e-4);
      rejected = false;
      h *= fac;
    } else {
      double fac = std::max(facmin, safety * std::pow(err, -alpha));
      h *= fac;
      rejected = true;
    }
  }
  return tr;
}

inline Trajectory integrate_fixed(const VectorField& vf, const StateVector& u0, double t0, double t1, double dt) {
  return integrate_fixed([&](const std::vector<double>& u, double t, std::vector<double>& du) { vf(u, t, du); },
                         vf.pack(u0), t0, t1, dt, vf.stocks());
}

inline Trajectory integrate_adaptive(const VectorField& vf, const StateVector& u0, double t0, double t1,
                                     const AdaptiveOptions& opt = {}) {
  return integrate_adaptive([&](const std::vector<double>& u, double t, std::vector<double>& du) { vf(u, t, du); },
                            vf.pack(u0), t0, t1, opt, vf.stocks());
}

}  // namespace stockflow
