#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

//
// ... effres header files
//
#include <effres/cholesky.hpp>
#include <effres/ordering.hpp>
#include <effres/resistance.hpp>
#include <effres/pg/dc.hpp>
#include <effres/pg/netlist.hpp>
#include <effres/pg/partition.hpp>

namespace effres::pg {

// A resistive model over a subset of the original nodes, in global node ids.
struct ReducedModel {
  std::vector<Index> nodes;           // ascending global ids
  std::vector<std::string> names;     // parallel to nodes
  std::vector<char> port;             // parallel to nodes
  std::vector<Edge> edges;            // global ids, u < v, sorted by (u, v)
  std::vector<std::pair<Index, double>> shunts;  // conductance to ground, sorted by node
  std::vector<std::pair<Index, Index>> aliases;  // merged node -> representative, sorted

  // provenance
  Index eliminated = 0;
  Index merged = 0;
  Index edges_before = 0;  // before sparsification
  Index sampled = 0;       // samples drawn
  double schur_check = 0.0;  // largest relative mismatch of the verification solves

  Index local(Index global) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), global);
    return it != nodes.end() && *it == global ? static_cast<Index>(it - nodes.begin()) : -1;
  }

  friend bool operator==(const ReducedModel&, const ReducedModel&) = default;
};

// Laplacian over model.nodes (local positions) with shunts on the diagonal.
inline SparseMatrix model_laplacian(const ReducedModel& m) {
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(m.edges.size() * 4 + m.nodes.size());
  for (Index i = 0; i < static_cast<Index>(m.nodes.size()); ++i) t.push_back({i, i, 0.0});
  for (const auto& e : m.edges) {
    const Index a = m.local(e.u);
    const Index b = m.local(e.v);
    t.push_back({a, a, e.w});
    t.push_back({b, b, e.w});
    t.push_back({a, b, -e.w});
    t.push_back({b, a, -e.w});
  }
  for (const auto& [v, g] : m.shunts) {
    const Index a = m.local(v);
    t.push_back({a, a, g});
  }
  return SparseMatrix::from_triplets(static_cast<Index>(m.nodes.size()), std::move(t));
}

// Edge graph over local positions (shunts excluded).
inline WeightedGraph model_graph(const ReducedModel& m) {
  std::vector<Edge> edges;
  edges.reserve(m.edges.size());
  for (const auto& e : m.edges) edges.push_back({m.local(e.u), m.local(e.v), e.w});
  return make_graph(static_cast<Index>(m.nodes.size()), std::move(edges));
}

// Effective resistance of every model edge, aligned with m.edges, in global ids.
inline std::vector<ResistanceResult> edge_resistances(const ReducedModel& m, const PipelineConfig& cfg) {
  if (m.edges.empty()) return {};
  const auto g = model_graph(m);
  auto out = run_pipeline(g, edge_queries(g), cfg);
  for (auto& r : out) {
    r.p = m.nodes[r.p];
    r.q = m.nodes[r.q];
  }
  return out;
}

namespace detail {

// Sorts (u, v, w) triples and sums parallel entries in sorted order, so the
// result does not depend on the input order.
inline std::vector<Edge> canonical_edges(std::vector<Edge> e) {
  for (auto& x : e) {
    if (x.u > x.v) std::swap(x.u, x.v);
  }
  std::sort(e.begin(), e.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v, a.w) < std::tie(b.u, b.v, b.w);
  });
  std::vector<Edge> out;
  for (const auto& x : e) {
    if (x.u == x.v) continue;
    if (!out.empty() && out.back().u == x.u && out.back().v == x.v) {
      out.back().w += x.w;
    } else {
      out.push_back(x);
    }
  }
  return out;
}

inline std::vector<std::pair<Index, double>> canonical_shunts(std::vector<std::pair<Index, double>> s) {
  std::sort(s.begin(), s.end());
  std::vector<std::pair<Index, double>> out;
  for (const auto& x : s) {
    if (!out.empty() && out.back().first == x.first) {
      out.back().second += x.second;
    } else {
      out.push_back(x);
    }
  }
  return out;
}

inline Index find_root(std::vector<Index>& parent, Index x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace detail

// Result of eliminating the non-kept nodes of a symmetric matrix.
struct SchurResult {
  std::vector<Index> kept;  // positions in the input, ascending
  SparseMatrix matrix;      // over `kept`, in the same order
};

// S = A_kk - A_ke A_ee^-1 A_ek. A_ee must be nonsingular.
inline SchurResult schur_eliminate(const SparseMatrix& a, const std::vector<char>& keep) {
  if (static_cast<Index>(keep.size()) != a.n) throw InputError("keep mask does not match matrix");
  SchurResult r;
  for (Index i = 0; i < a.n; ++i) {
    if (keep[i]) r.kept.push_back(i);
  }
  const auto ord = minimum_degree_ordering(adjacency(a), keep);
  r.matrix = schur_complement(a, ord, a.n - static_cast<Index>(r.kept.size()));
  return r;
}

// Inputs of one block, exactly as seen by the block reduction. Two equal
// inputs produce bitwise equal block models.
struct BlockInput {
  Index block = 0;
  std::vector<Index> nodes;         // global ids, ascending
  std::vector<char> kept;           // parallel to nodes
  std::vector<char> port;           // parallel to nodes
  std::vector<std::string> names;   // parallel to nodes
  std::vector<Edge> edges;          // local positions, canonical
  std::vector<double> shunt;        // parallel to nodes

  friend bool operator==(const BlockInput&, const BlockInput&) = default;
};

inline SparseMatrix block_laplacian(const BlockInput& in) {
  const Index n = static_cast<Index>(in.nodes.size());
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(in.edges.size() * 4 + static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, in.shunt[i]});
  for (const auto& e : in.edges) {
    t.push_back({e.u, e.u, e.w});
    t.push_back({e.v, e.v, e.w});
    t.push_back({e.u, e.v, -e.w});
    t.push_back({e.v, e.u, -e.w});
  }
  return SparseMatrix::from_triplets(n, std::move(t));
}

// Splits the netlist into per-block inputs plus the model made of cut
// resistors (those joining two blocks).
inline std::vector<BlockInput> block_inputs(const Netlist& net, const PartitionAssignment& part,
                                            ReducedModel* cut = nullptr) {
  const auto cls = classify_nodes(net, part);
  const Index n = net.size();
  std::vector<BlockInput> blocks(static_cast<std::size_t>(part.blocks));
  std::vector<Index> local(static_cast<std::size_t>(n), -1);
  for (Index b = 0; b < part.blocks; ++b) blocks[b].block = b;
  for (Index v = 0; v < n; ++v) {
    const Index b = part.block[v];
    if (b < 0 || b >= part.blocks) throw InputError("block id out of range for node " + net.name(v));
    auto& in = blocks[b];
    local[v] = static_cast<Index>(in.nodes.size());
    in.nodes.push_back(v);
    in.kept.push_back(cls[v] != NodeClass::interior);
    in.port.push_back(cls[v] == NodeClass::port);
    in.names.push_back(net.name(v));
    in.shunt.push_back(0.0);
  }
  std::vector<std::vector<Edge>> raw(static_cast<std::size_t>(part.blocks));
  std::vector<Edge> cut_edges;
  for (const auto& r : net.resistors) {
    const double g = r.conductance();
    if (r.a == kGround || r.b == kGround) {
      const Index v = r.a == kGround ? r.b : r.a;
      blocks[part.block[v]].shunt[local[v]] += g;
    } else if (r.a == r.b) {
      continue;
    } else if (part.block[r.a] == part.block[r.b]) {
      raw[part.block[r.a]].push_back({local[r.a], local[r.b], g});
    } else {
      cut_edges.push_back({r.a, r.b, g});
    }
  }
  for (Index b = 0; b < part.blocks; ++b) blocks[b].edges = detail::canonical_edges(std::move(raw[b]));

  if (cut) {
    const auto ports = net.port_mask();
    *cut = ReducedModel{};
    cut->edges = detail::canonical_edges(std::move(cut_edges));
    for (const auto& e : cut->edges) {
      cut->nodes.push_back(e.u);
      cut->nodes.push_back(e.v);
    }
    std::sort(cut->nodes.begin(), cut->nodes.end());
    cut->nodes.erase(std::unique(cut->nodes.begin(), cut->nodes.end()), cut->nodes.end());
    for (Index v : cut->nodes) {
      cut->names.push_back(net.name(v));
      cut->port.push_back(ports[v]);
    }
  }
  return blocks;
}

namespace detail {

// Every component of the interior-induced subgraph needs a kept neighbor or
// a shunt, otherwise A_ee is singular.
inline void check_interior(const BlockInput& in) {
  const Index n = static_cast<Index>(in.nodes.size());
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  for (const auto& e : in.edges) {
    if (!in.kept[e.u] && !in.kept[e.v]) parent[find_root(parent, e.u)] = find_root(parent, e.v);
  }
  std::vector<char> ok(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    if (!in.kept[i] && in.shunt[i] > 0.0) ok[find_root(parent, i)] = 1;
  }
  for (const auto& e : in.edges) {
    if (in.kept[e.u] != in.kept[e.v]) ok[find_root(parent, in.kept[e.u] ? e.v : e.u)] = 1;
  }
  for (Index i = 0; i < n; ++i) {
    if (!in.kept[i] && !ok[find_root(parent, i)]) {
      throw NumericalError("block " + std::to_string(in.block) + ": interior node " + in.names[i] +
                               " is not connected to any kept node or ground (singular elimination)",
                           in.block);
    }
  }
}

// Solves the full block and the Schur complement for random injections on
// kept nodes; returns the largest relative mismatch of kept voltages. A
// common shunt on every kept node makes both systems nonsingular without
// changing the identity Schur(A + D_k) = S + D_k.
inline double schur_mismatch(const SparseMatrix& a, const SchurResult& s, int injections, Rng& rng) {
  const Index n = a.n;
  const Index k = static_cast<Index>(s.kept.size());
  if (k == 0 || injections <= 0) return 0.0;
  double mean_diag = 0.0;
  for (Index i = 0; i < n; ++i) mean_diag += a.at(i, i);
  mean_diag = std::max(mean_diag / static_cast<double>(n), 1e-300);

  std::vector<SparseMatrix::Triplet> ta;
  std::vector<SparseMatrix::Triplet> ts;
  for (Index j = 0; j < n; ++j) {
    for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) ta.push_back({a.row_idx[p], j, a.values[p]});
  }
  for (Index j = 0; j < k; ++j) {
    for (Index p = s.matrix.col_ptr[j]; p < s.matrix.col_ptr[j + 1]; ++p) {
      ts.push_back({s.matrix.row_idx[p], j, s.matrix.values[p]});
    }
    ta.push_back({s.kept[j], s.kept[j], mean_diag});
    ts.push_back({j, j, mean_diag});
  }
  const auto aa = SparseMatrix::from_triplets(n, std::move(ta));
  const auto ss = SparseMatrix::from_triplets(k, std::move(ts));
  const auto fa = full_cholesky(aa, compute_ordering(aa, OrderingMethod::amd));
  const auto fs = full_cholesky(ss, compute_ordering(ss, OrderingMethod::amd));

  double worst = 0.0;
  for (int t = 0; t < injections; ++t) {
    std::vector<double> b(static_cast<std::size_t>(k));
    std::vector<double> full(static_cast<std::size_t>(n), 0.0);
    for (Index j = 0; j < k; ++j) {
      b[j] = 2.0 * rng.uniform() - 1.0;
      full[s.kept[j]] = b[j];
    }
    const auto x = solve(fa, full);
    const auto y = solve(fs, b);
    double diff = 0.0;
    double scale = 0.0;
    for (Index j = 0; j < k; ++j) {
      diff = std::max(diff, std::abs(x[s.kept[j]] - y[j]));
      scale = std::max(scale, std::abs(x[s.kept[j]]));
    }
    if (scale > 0.0) worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace detail

// Row sums of S below this fraction of the diagonal are treated as zero
// (no path to ground through the eliminated nodes).
inline constexpr double kShuntRelTol = 1e-10;

// Eliminates the block's interior nodes. With `verify_injections` > 0 the
// result is checked against full-block solves and the mismatch recorded.
inline ReducedModel eliminate_block(const BlockInput& in, int verify_injections = 0,
                                    std::uint64_t seed = 0) {
  detail::check_interior(in);
  const auto a = block_laplacian(in);
  const auto s = schur_eliminate(a, in.kept);

  ReducedModel m;
  const Index k = static_cast<Index>(s.kept.size());
  m.eliminated = a.n - k;
  std::vector<Edge> edges;
  for (Index j = 0; j < k; ++j) {
    m.nodes.push_back(in.nodes[s.kept[j]]);
    m.names.push_back(in.names[s.kept[j]]);
    m.port.push_back(in.port[s.kept[j]]);
    double diag = 0.0;
    double rowsum = 0.0;
    for (Index p = s.matrix.col_ptr[j]; p < s.matrix.col_ptr[j + 1]; ++p) {
      const Index i = s.matrix.row_idx[p];
      const double x = s.matrix.values[p];
      rowsum += x;
      if (i == j) {
        diag = x;
      } else if (i > j && x < 0.0) {
        edges.push_back({in.nodes[s.kept[j]], in.nodes[s.kept[i]], -x});
      }
    }
    if (rowsum > kShuntRelTol * diag) m.shunts.emplace_back(in.nodes[s.kept[j]], rowsum);
  }
  m.edges = detail::canonical_edges(std::move(edges));
  if (verify_injections > 0) {
    Rng rng(seed, 0x736368757200ULL + static_cast<std::uint64_t>(in.block));
    m.schur_check = detail::schur_mismatch(a, s, verify_injections, rng);
  }
  return m;
}

// Contracts single-linkage clusters of ports joined by an edge whose
// effective resistance is at most tau times the median edge resistance.
// The representative is the smallest global id. tau = 0 returns m unchanged.
inline ReducedModel merge_ports(const ReducedModel& m, const std::vector<ResistanceResult>& er, double tau) {
  if (!(tau >= 0.0)) throw InputError("merge threshold must be nonnegative");
  if (tau == 0.0 || m.edges.empty()) return m;
  if (er.size() != m.edges.size()) throw InputError("resistance list does not cover the model edges");

  std::vector<double> res;
  res.reserve(m.edges.size());
  for (const auto& e : m.edges) res.push_back(1.0 / e.w);
  const auto mid = res.begin() + static_cast<std::ptrdiff_t>((res.size() - 1) / 2);
  std::nth_element(res.begin(), mid, res.end());
  const double limit = tau * *mid;

  const Index n = static_cast<Index>(m.nodes.size());
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    const auto& e = m.edges[k];
    if (er[k].p != e.u || er[k].q != e.v) throw InputError("resistance list does not match the model edges");
    const Index a = m.local(e.u);
    const Index b = m.local(e.v);
    if (!m.port[a] || !m.port[b] || er[k].value > limit) continue;
    const Index ra = detail::find_root(parent, a);
    const Index rb = detail::find_root(parent, b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  ReducedModel out = m;
  out.nodes.clear();
  out.names.clear();
  out.port.clear();
  std::vector<Index> rep(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    rep[i] = m.nodes[detail::find_root(parent, i)];
    if (rep[i] == m.nodes[i]) {
      out.nodes.push_back(m.nodes[i]);
      out.names.push_back(m.names[i]);
      out.port.push_back(m.port[i]);
    } else {
      out.aliases.emplace_back(m.nodes[i], rep[i]);
      ++out.merged;
    }
  }
  std::sort(out.aliases.begin(), out.aliases.end());
  std::vector<Edge> edges;
  for (const auto& e : m.edges) edges.push_back({rep[m.local(e.u)], rep[m.local(e.v)], e.w});
  out.edges = detail::canonical_edges(std::move(edges));
  std::vector<std::pair<Index, double>> shunts;
  for (const auto& [v, g] : m.shunts) shunts.emplace_back(rep[m.local(v)], g);
  out.shunts = detail::canonical_shunts(std::move(shunts));
  return out;
}

// Draws `target` edges with replacement, edge e with probability
// p_e = w_e R_e / sum(w R); each draw adds w_e / (target p_e). Nodes and
// shunts are kept.
inline ReducedModel sparsify_by_er(const ReducedModel& m, const std::vector<ResistanceResult>& er, Index target,
                                   Rng& rng) {
  if (target <= 0) throw InputError("sample count must be positive");
  if (er.size() != m.edges.size()) throw InputError("resistance list does not cover the model edges");
  ReducedModel out = m;
  out.edges_before += static_cast<Index>(m.edges.size());
  out.sampled += target;
  if (m.edges.empty()) return out;

  const std::size_t me = m.edges.size();
  std::vector<double> score(me);
  double total = 0.0;
  for (std::size_t k = 0; k < me; ++k) {
    if (er[k].p != m.edges[k].u || er[k].q != m.edges[k].v) {
      throw InputError("resistance list does not match the model edges");
    }
    if (!(er[k].value > 0.0) || !std::isfinite(er[k].value)) {
      throw NumericalError("nonpositive effective resistance on edge " + std::to_string(k),
                           static_cast<Index>(k));
    }
    score[k] = m.edges[k].w * er[k].value;
    total += score[k];
  }
  std::vector<double> cdf(me);
  double acc = 0.0;
  for (std::size_t k = 0; k < me; ++k) {
    acc += score[k];
    cdf[k] = acc;
  }
  std::vector<Index> count(me, 0);
  for (Index s = 0; s < target; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++count[static_cast<std::size_t>(it - cdf.begin())];
  }
  out.edges.clear();
  const double t = static_cast<double>(target);
  for (std::size_t k = 0; k < me; ++k) {
    if (count[k] == 0) continue;
    const double p = score[k] / total;
    out.edges.push_back({m.edges[k].u, m.edges[k].v, m.edges[k].w * (static_cast<double>(count[k]) / (t * p))});
  }
  return out;
}

// Sums the models' Laplacians over the union of their nodes. Contributions
// are combined in sorted order, so the result is independent of the order of
// `models`. Merged nodes are redirected to their representatives.
inline ReducedModel stitch(const std::vector<ReducedModel>& models) {
  ReducedModel out;
  std::vector<std::tuple<Index, std::string, char>> nodes;
  for (const auto& m : models) {
    if (m.nodes.size() != m.names.size() || m.nodes.size() != m.port.size()) {
      throw InputError("model node, name and port lists differ in length");
    }
    for (std::size_t i = 0; i < m.nodes.size(); ++i) nodes.emplace_back(m.nodes[i], m.names[i], m.port[i]);
    out.aliases.insert(out.aliases.end(), m.aliases.begin(), m.aliases.end());
    out.eliminated += m.eliminated;
    out.merged += m.merged;
    out.edges_before += m.edges_before;
    out.sampled += m.sampled;
    out.schur_check = std::max(out.schur_check, m.schur_check);
  }
  std::sort(out.aliases.begin(), out.aliases.end());
  out.aliases.erase(std::unique(out.aliases.begin(), out.aliases.end()), out.aliases.end());
  auto redirect = [&](Index v) {
    auto it = std::lower_bound(out.aliases.begin(), out.aliases.end(), std::pair<Index, Index>{v, -1});
    return it != out.aliases.end() && it->first == v ? it->second : v;
  };

  std::sort(nodes.begin(), nodes.end());
  for (auto& [v, name, port] : nodes) {
    if (!out.nodes.empty() && out.nodes.back() == v) {
      if (out.names.back() != name) {
        throw InputError("node " + std::to_string(v) + " is named both '" + out.names.back() + "' and '" +
                         name + "'");
      }
      out.port.back() = static_cast<char>(out.port.back() || port);
      continue;
    }
    if (redirect(v) != v) continue;
    out.nodes.push_back(v);
    out.names.push_back(name);
    out.port.push_back(port);
  }

  std::vector<Edge> edges;
  std::vector<std::pair<Index, double>> shunts;
  for (const auto& m : models) {
    for (const auto& e : m.edges) edges.push_back({redirect(e.u), redirect(e.v), e.w});
    for (const auto& [v, g] : m.shunts) shunts.emplace_back(redirect(v), g);
  }
  out.edges = detail::canonical_edges(std::move(edges));
  out.shunts = detail::canonical_shunts(std::move(shunts));
  for (const auto& e : out.edges) {
    if (out.local(e.u) < 0 || out.local(e.v) < 0) throw InputError("edge references a node outside the model");
  }
  return out;
}

// The reduced network as a netlist: model nodes keep their original names,
// resistors are renamed R1.., shunts RS1.., sources are copied with merged
// nodes redirected.
inline Netlist to_netlist(const ReducedModel& m, const Netlist& original) {
  Netlist net;
  std::vector<Index> id(static_cast<std::size_t>(original.size()), -2);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) id[m.nodes[i]] = net.node(m.names[i]);
  auto map = [&](Index v) {
    if (v == kGround) return kGround;
    auto it = std::lower_bound(m.aliases.begin(), m.aliases.end(), std::pair<Index, Index>{v, -1});
    if (it != m.aliases.end() && it->first == v) v = it->second;
    if (id[v] == -2) throw InputError("source node " + original.name(v) + " is not in the reduced model");
    return id[v];
  };
  Index k = 0;
  for (const auto& e : m.edges) net.add_resistor("R" + std::to_string(++k), id[e.u], id[e.v], 1.0 / e.w);
  k = 0;
  for (const auto& [v, g] : m.shunts) net.add_resistor("RS" + std::to_string(++k), id[v], kGround, 1.0 / g);
  for (const auto& s : original.current_sources) net.add_current_source(s.name, map(s.from), map(s.to), s.amps);
  for (const auto& s : original.voltage_sources) net.add_voltage_source(s.name, map(s.node), s.volts);
  net.canonicalize();
  return net;
}

// Voltages of the original ports (ascending node order) read from a solve of
// the reduced netlist.
inline std::vector<double> reduced_port_voltages(const Netlist& original, const ReducedModel& m,
                                                 const Netlist& reduced, std::span<const double> v) {
  const auto ports = original.port_mask();
  std::vector<double> out;
  for (Index i = 0; i < original.size(); ++i) {
    if (!ports[i]) continue;
    Index g = i;
    auto it = std::lower_bound(m.aliases.begin(), m.aliases.end(), std::pair<Index, Index>{g, -1});
    if (it != m.aliases.end() && it->first == g) g = it->second;
    const Index pos = m.local(g);
    if (pos < 0) throw NumericalError("port " + original.name(i) + " missing from the reduced model", i);
    const Index r = reduced.find(m.names[pos]);
    if (r < 0) throw NumericalError("port " + original.name(i) + " missing from the reduced netlist", i);
    out.push_back(v[r]);
  }
  return out;
}

inline std::vector<double> port_voltages(const Netlist& net, std::span<const double> v) {
  const auto ports = net.port_mask();
  std::vector<double> out;
  for (Index i = 0; i < net.size(); ++i) {
    if (ports[i]) out.push_back(v[i]);
  }
  return out;
}

struct ReduceConfig {
  Index blocks = 0;  // 0: max(1, #ports / 50)
  PipelineConfig er;
  double merge_tau = 0.0;
  double sample_fraction = 0.65;
  std::uint64_t seed = 0;
  int threads = 1;
  int verify_injections = 0;  // Schur check solves per block
};

struct BlockArtifact {
  BlockInput input;
  ReducedModel model;
  double seconds = 0.0;
};

struct Reduction {
  ReduceConfig config;
  PartitionAssignment partition;
  std::vector<BlockArtifact> blocks;
  ReducedModel cut;
  ReducedModel model;  // stitched
};

inline Index default_block_count(const Netlist& net) {
  const auto ports = net.port_mask();
  const Index np = static_cast<Index>(std::count(ports.begin(), ports.end(), 1));
  return std::clamp<Index>(np / 50, 1, std::max<Index>(net.size(), 1));
}

// Elimination, optional port merging and sparsification of one block.
inline ReducedModel reduce_block(const BlockInput& in, const ReduceConfig& cfg) {
  auto m = eliminate_block(in, cfg.verify_injections, cfg.seed);
  auto er_cfg = cfg.er;
  er_cfg.threads = 1;
  er_cfg.seed = cfg.seed + static_cast<std::uint64_t>(in.block);
  auto er = edge_resistances(m, er_cfg);
  if (cfg.merge_tau > 0.0) {
    auto merged = merge_ports(m, er, cfg.merge_tau);
    if (merged.merged > 0) {
      m = std::move(merged);
      er = edge_resistances(m, er_cfg);
    }
  }
  if (m.edges.empty()) return m;
  const auto target = std::max<Index>(
      1, static_cast<Index>(std::ceil(cfg.sample_fraction * static_cast<double>(m.edges.size()))));
  Rng rng(cfg.seed, static_cast<std::uint64_t>(in.block));
  return sparsify_by_er(m, er, target, rng);
}

namespace detail {

inline void check_ports(const Netlist& net, const ReducedModel& m) {
  const auto ports = net.port_mask();
  for (Index i = 0; i < net.size(); ++i) {
    if (!ports[i]) continue;
    Index g = i;
    auto it = std::lower_bound(m.aliases.begin(), m.aliases.end(), std::pair<Index, Index>{g, -1});
    if (it != m.aliases.end() && it->first == g) g = it->second;
    if (m.local(g) < 0) throw NumericalError("port " + net.name(i) + " lost during reduction", i);
  }
}

inline void run_blocks(std::vector<BlockArtifact>& blocks, const std::vector<Index>& which,
                       const ReduceConfig& cfg) {
  parallel_for(static_cast<Index>(which.size()), cfg.threads, [&](Index k) {
    auto& b = blocks[which[k]];
    Stopwatch sw;
    b.model = reduce_block(b.input, cfg);
    b.seconds = sw.seconds();
  });
}

inline ReducedModel stitch_all(const std::vector<BlockArtifact>& blocks, const ReducedModel& cut) {
  std::vector<ReducedModel> models;
  models.reserve(blocks.size() + 1);
  for (const auto& b : blocks) models.push_back(b.model);
  models.push_back(cut);
  return stitch(models);
}

}  // namespace detail

inline Reduction reduce(const Netlist& net, const PartitionAssignment& part, const ReduceConfig& cfg) {
  if (!(cfg.sample_fraction > 0.0)) throw InputError("sample fraction must be positive");
  Reduction r;
  r.config = cfg;
  r.partition = part;
  auto inputs = block_inputs(net, part, &r.cut);
  r.blocks.resize(inputs.size());
  std::vector<Index> all(inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    r.blocks[b].input = std::move(inputs[b]);
    all[b] = static_cast<Index>(b);
  }
  detail::run_blocks(r.blocks, all, cfg);
  r.model = detail::stitch_all(r.blocks, r.cut);
  detail::check_ports(net, r.model);
  return r;
}

// Partitions with the builtin partitioner (seeded by cfg.seed) first.
inline Reduction reduce(const Netlist& net, const ReduceConfig& cfg) {
  const Index blocks = cfg.blocks > 0 ? cfg.blocks : default_block_count(net);
  return reduce(net, partition_builtin(net, blocks, cfg.seed), cfg);
}

// Re-reduces only the listed blocks of `prev` for the modified netlist. The
// node set must be unchanged; any other block whose inputs changed is an
// error. The result equals reduce(modified, prev.partition, prev.config).
inline Reduction reduce_incremental(const Reduction& prev, const std::vector<Index>& modified,
                                    const Netlist& net) {
  if (static_cast<Index>(prev.partition.block.size()) != net.size()) {
    throw InputError("modified netlist has a different node count");
  }
  std::vector<char> listed(prev.blocks.size(), 0);
  for (Index b : modified) {
    if (b < 0 || b >= static_cast<Index>(prev.blocks.size())) {
      throw InputError("block id " + std::to_string(b) + " out of range");
    }
    listed[b] = 1;
  }
  Reduction r;
  r.config = prev.config;
  r.partition = prev.partition;
  auto inputs = block_inputs(net, prev.partition, &r.cut);
  r.blocks.resize(inputs.size());
  std::vector<Index> redo;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    if (inputs[b].names != prev.blocks[b].input.names) {
      throw InputError("node names of block " + std::to_string(b) + " changed");
    }
    if (listed[b]) {
      r.blocks[b].input = std::move(inputs[b]);
      redo.push_back(static_cast<Index>(b));
    } else {
      if (!(inputs[b] == prev.blocks[b].input)) {
        throw InputError("modification touches block " + std::to_string(b) + ", which is not listed");
      }
      r.blocks[b] = prev.blocks[b];
    }
  }
  if (redo.empty() && r.cut == prev.cut) return prev;
  detail::run_blocks(r.blocks, redo, r.config);
  r.model = detail::stitch_all(r.blocks, r.cut);
  detail::check_ports(net, r.model);
  return r;
}

}  // namespace effres::pg
