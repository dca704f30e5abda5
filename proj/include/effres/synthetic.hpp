#pragma once

// Deterministic test and benchmark inputs.

//
// ... Standard header files
//
#include <cmath>
#include <string>
#include <vector>

//
// ... effres header files
//
#include <effres/graph.hpp>
#include <effres/pg/netlist.hpp>

namespace effres::synthetic {

// rows x cols 4-neighbor grid; node (r, c) is r*cols + c. Weights are 1, or
// uniform in [w_lo, w_hi) when w_hi > w_lo.
inline WeightedGraph grid(Index rows, Index cols, double w_lo = 1.0, double w_hi = 1.0,
                          std::uint64_t seed = 0) {
  Rng rng(seed, 0x67726964ULL);
  auto weight = [&] { return w_hi > w_lo ? w_lo + (w_hi - w_lo) * rng.uniform() : w_lo; };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * rows * cols));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1, weight()});
      if (r + 1 < rows) edges.push_back({v, v + cols, weight()});
    }
  }
  return make_graph(rows * cols, std::move(edges));
}

inline WeightedGraph path(Index n, double w = 1.0) {
  std::vector<Edge> edges;
  for (Index v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, w});
  return make_graph(n, std::move(edges));
}

// Random spanning tree plus `extra` random chords; weights log-uniform in
// [w_lo, w_hi].
inline WeightedGraph random_connected(Index n, Index extra, std::uint64_t seed, double w_lo = 0.1,
                                      double w_hi = 10.0) {
  Rng rng(seed, 0x72616e64ULL);
  auto weight = [&] { return w_lo * std::pow(w_hi / w_lo, rng.uniform()); };
  std::vector<Edge> edges;
  for (Index v = 1; v < n; ++v) {
    edges.push_back({static_cast<Index>(rng.below(static_cast<std::uint64_t>(v))), v, weight()});
  }
  for (Index k = 0; k < extra && n > 1; ++k) {
    const auto u = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    auto v = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (v >= u) ++v;
    edges.push_back({u, v, weight()});
  }
  return make_graph(n, std::move(edges));
}

// Single-layer power grid: rows x cols mesh of resistors (ohms uniform in
// [0.8, 1.2) * r_ohms), a VDD pad every `pad_stride` nodes in each direction
// and `sources` current loads to ground at distinct non-pad nodes, amps
// uniform in [0.5, 1.5) * amps. Nodes are named n<r>_<c>.
inline pg::Netlist power_grid(Index rows, Index cols, Index sources, Index pad_stride, std::uint64_t seed,
                              double vdd = 1.0, double r_ohms = 1.0, double amps = 1e-3) {
  if (rows < 1 || cols < 1 || pad_stride < 1) throw InputError("bad power grid shape");
  Rng rng(seed, 0x7067ULL);
  pg::Netlist net;
  auto name = [&](Index r, Index c) { return "n" + std::to_string(r) + "_" + std::to_string(c); };
  Index k = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index v = net.node(name(r, c));
      if (c + 1 < cols) {
        net.add_resistor("R" + std::to_string(++k), v, net.node(name(r, c + 1)),
                         r_ohms * (0.8 + 0.4 * rng.uniform()));
      }
      if (r + 1 < rows) {
        net.add_resistor("R" + std::to_string(++k), v, net.node(name(r + 1, c)),
                         r_ohms * (0.8 + 0.4 * rng.uniform()));
      }
    }
  }
  std::vector<char> pad(static_cast<std::size_t>(rows * cols), 0);
  Index npads = 0;
  for (Index r = pad_stride / 2; r < rows; r += pad_stride) {
    for (Index c = pad_stride / 2; c < cols; c += pad_stride) {
      pad[r * cols + c] = 1;
      net.add_voltage_source("V" + std::to_string(++npads), net.node(name(r, c)), vdd);
    }
  }
  const Index free = rows * cols - npads;
  if (sources > free) throw InputError("more sources than free nodes");
  std::vector<Index> cand;
  for (Index v = 0; v < rows * cols; ++v) {
    if (!pad[v]) cand.push_back(v);
  }
  for (Index s = 0; s < sources; ++s) {
    const Index j = s + static_cast<Index>(rng.below(static_cast<std::uint64_t>(free - s)));
    std::swap(cand[s], cand[j]);
  }
  std::sort(cand.begin(), cand.begin() + sources);
  for (Index s = 0; s < sources; ++s) {
    const Index v = cand[s];
    net.add_current_source("I" + std::to_string(s + 1), net.node(name(v / cols, v % cols)), pg::kGround,
                           amps * (0.5 + rng.uniform()));
  }
  net.canonicalize();
  return net;
}

}  // namespace effres::synthetic
