#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

//
// ... effres header files
//
#include <effres/cholesky.hpp>
#include <effres/ordering.hpp>
#include <effres/pg/netlist.hpp>

namespace effres::pg {

// Nodal analysis: nodes with a voltage source are fixed, the rest solve
// G_uu v_u = i_u - G_uf v_f. Returns one voltage per netlist node.
inline std::vector<double> dc_solve(const Netlist& net) {
  const Index n = net.size();
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (const auto& s : net.voltage_sources) {
    if (fixed[s.node] && v[s.node] != s.volts) {
      throw InputError("conflicting voltage sources on node " + net.name(s.node));
    }
    fixed[s.node] = 1;
    v[s.node] = s.volts;
  }

  std::vector<Index> local(static_cast<std::size_t>(n), -1);
  std::vector<Index> unknown;
  for (Index i = 0; i < n; ++i) {
    if (!fixed[i]) {
      local[i] = static_cast<Index>(unknown.size());
      unknown.push_back(i);
    }
  }
  const Index nu = static_cast<Index>(unknown.size());
  if (nu == 0) return v;

  std::vector<double> rhs(static_cast<std::size_t>(nu), 0.0);
  for (const auto& s : net.current_sources) {
    if (s.from != kGround && local[s.from] >= 0) rhs[local[s.from]] -= s.amps;
    if (s.to != kGround && local[s.to] >= 0) rhs[local[s.to]] += s.amps;
  }

  // anchored: has a resistor to ground or to a fixed node
  std::vector<char> anchored(static_cast<std::size_t>(nu), 0);
  std::vector<SparseMatrix::Triplet> t;
  std::vector<Edge> links;
  t.reserve(net.resistors.size() * 4);
  for (const auto& r : net.resistors) {
    const double g = r.conductance();
    const Index a = r.a == kGround ? kGround : local[r.a];
    const Index b = r.b == kGround ? kGround : local[r.b];
    const bool a_unknown = r.a != kGround && a >= 0;
    const bool b_unknown = r.b != kGround && b >= 0;
    if (a_unknown) t.push_back({a, a, g});
    if (b_unknown) t.push_back({b, b, g});
    if (a_unknown && b_unknown) {
      if (a == b) continue;
      t.push_back({a, b, -g});
      t.push_back({b, a, -g});
      links.push_back({a, b, 1.0});
    } else if (a_unknown) {
      anchored[a] = 1;
      if (r.b != kGround) rhs[a] += g * v[r.b];
    } else if (b_unknown) {
      anchored[b] = 1;
      if (r.a != kGround) rhs[b] += g * v[r.a];
    }
  }

  Index count = 0;
  const auto label = component_labels(adjacency(make_graph(nu, std::move(links))), &count);
  std::vector<char> comp_ok(static_cast<std::size_t>(count), 0);
  for (Index i = 0; i < nu; ++i) {
    if (anchored[i]) comp_ok[label[i]] = 1;
  }
  for (Index i = 0; i < nu; ++i) {
    if (!comp_ok[label[i]]) {
      throw NumericalError("floating subnetwork: node " + net.name(unknown[i]) +
                               " has no path to ground or a voltage source",
                           unknown[i]);
    }
  }

  const auto g = SparseMatrix::from_triplets(nu, std::move(t));
  const auto f = full_cholesky(g, compute_ordering(g, OrderingMethod::amd));
  const auto x = solve(f, rhs);
  for (Index i = 0; i < nu; ++i) v[unknown[i]] = x[i];
  return v;
}

// Largest voltage-source value, 0 without sources. Drops are measured from it.
inline double nominal_voltage(const Netlist& net) {
  double vdd = 0.0;
  bool any = false;
  for (const auto& s : net.voltage_sources) {
    vdd = any ? std::max(vdd, s.volts) : s.volts;
    any = true;
  }
  return vdd;
}

struct AccuracyReport {
  double err = 0.0;          // mean |dv| over ports, volts
  std::optional<double> rel; // err / max original drop; unset when that is 0
  double max_drop = 0.0;
  Index ports = 0;
};

// Vectors are aligned port by port.
inline AccuracyReport accuracy_report(std::span<const double> original, std::span<const double> reduced,
                                      double nominal) {
  if (original.size() != reduced.size()) throw InputError("voltage vectors differ in length");
  AccuracyReport rep;
  rep.ports = static_cast<Index>(original.size());
  if (original.empty()) return rep;
  double sum = 0.0;
  for (std::size_t k = 0; k < original.size(); ++k) {
    sum += std::abs(original[k] - reduced[k]);
    rep.max_drop = std::max(rep.max_drop, std::abs(nominal - original[k]));
  }
  rep.err = sum / static_cast<double>(original.size());
  if (rep.max_drop > 0.0) rep.rel = rep.err / rep.max_drop;
  return rep;
}

}  // namespace effres::pg
