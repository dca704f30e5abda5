#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

//
// ... effres header files
//
#include <effres/common.hpp>

namespace effres {

struct Edge {
  Index u = 0;
  Index v = 0;
  double w = 0.0;  // conductance, siemens

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected simple graph with positive conductances. Edges are stored
// canonically (u < v) and sorted by (u, v).
class WeightedGraph {
 public:
  WeightedGraph() = default;

  Index num_nodes() const noexcept { return n_; }
  Index num_edges() const noexcept { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  double mean_weight() const {
    if (edges_.empty()) return 1.0;
    double s = 0.0;
    for (const auto& e : edges_) s += e.w;
    return s / static_cast<double>(edges_.size());
  }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  friend struct GraphBuilder;
  Index n_ = 0;
  std::vector<Edge> edges_;
};

// What happened while normalizing raw edges into a WeightedGraph.
struct LoadStats {
  Index merged_parallel = 0;
  Index dropped_self_loops = 0;
};

struct GraphBuilder {
  // Validates indices and weights, drops self-loops, merges parallel edges
  // by summing conductances.
  static WeightedGraph build(Index n, std::vector<Edge> raw, LoadStats* stats = nullptr) {
    if (n < 0) throw InputError("negative node count");
    LoadStats local;
    std::vector<Edge> kept;
    kept.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      auto e = raw[k];
      if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
        throw InputError("edge " + std::to_string(k) + " (" + std::to_string(e.u) + "," +
                         std::to_string(e.v) + ") has a node index outside [0," +
                         std::to_string(n) + ")");
      }
      if (!(e.w > 0.0)) {
        throw InputError("edge " + std::to_string(k) + " (" + std::to_string(e.u) + "," +
                         std::to_string(e.v) + ") has nonpositive weight " +
                         format_double(e.w));
      }
      if (e.u == e.v) {
        ++local.dropped_self_loops;
        continue;
      }
      if (e.u > e.v) std::swap(e.u, e.v);
      kept.push_back(e);
    }
    // stable so that parallel weights are summed in input order
    std::stable_sort(kept.begin(), kept.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    WeightedGraph g;
    g.n_ = n;
    for (const auto& e : kept) {
      if (!g.edges_.empty() && g.edges_.back().u == e.u && g.edges_.back().v == e.v) {
        g.edges_.back().w += e.w;
        ++local.merged_parallel;
      } else {
        g.edges_.push_back(e);
      }
    }
    if (stats) *stats = local;
    return g;
  }
};

inline WeightedGraph make_graph(Index n, std::vector<Edge> edges, LoadStats* stats = nullptr) {
  return GraphBuilder::build(n, std::move(edges), stats);
}

// Signed incidence: row e has +1 at its head (u) and -1 at its tail (v).
struct IncidenceMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> head;
  std::vector<Index> tail;

  double entry(Index e, Index v) const {
    if (head[e] == v) return 1.0;
    if (tail[e] == v) return -1.0;
    return 0.0;
  }
};

inline IncidenceMatrix incidence_matrix(const WeightedGraph& g) {
  IncidenceMatrix b;
  b.rows = g.num_edges();
  b.cols = g.num_nodes();
  b.head.reserve(g.edges().size());
  b.tail.reserve(g.edges().size());
  for (const auto& e : g.edges()) {
    b.head.push_back(e.u);
    b.tail.push_back(e.v);
  }
  return b;
}

// Square sparse matrix in compressed sparse column form, row indices sorted
// within each column.
struct SparseMatrix {
  Index n = 0;
  std::vector<Index> col_ptr{0};
  std::vector<Index> row_idx;
  std::vector<double> values;

  Index nnz() const { return static_cast<Index>(row_idx.size()); }

  // Value at (i, j) or 0 when not stored.
  double at(Index i, Index j) const {
    auto first = row_idx.begin() + col_ptr[j];
    auto last = row_idx.begin() + col_ptr[j + 1];
    auto it = std::lower_bound(first, last, i);
    if (it == last || *it != i) return 0.0;
    return values[static_cast<std::size_t>(it - row_idx.begin())];
  }

  // Position of (i, j) in the value array, or -1.
  Index find(Index i, Index j) const {
    auto first = row_idx.begin() + col_ptr[j];
    auto last = row_idx.begin() + col_ptr[j + 1];
    auto it = std::lower_bound(first, last, i);
    if (it == last || *it != i) return -1;
    return static_cast<Index>(it - row_idx.begin());
  }

  struct Triplet {
    Index row;
    Index col;
    double value;
  };

  // Duplicate (row, col) entries are summed in input order.
  static SparseMatrix from_triplets(Index n, std::vector<Triplet> t) {
    std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    SparseMatrix m;
    m.n = n;
    m.col_ptr.assign(static_cast<std::size_t>(n + 1), 0);
    for (const auto& x : t) {
      if (!m.row_idx.empty() && m.row_idx.back() == x.row &&
          m.col_ptr[static_cast<std::size_t>(x.col + 1)] > 0) {
        m.values.back() += x.value;
        continue;
      }
      m.row_idx.push_back(x.row);
      m.values.push_back(x.value);
      ++m.col_ptr[static_cast<std::size_t>(x.col + 1)];
    }
    std::partial_sum(m.col_ptr.begin(), m.col_ptr.end(), m.col_ptr.begin());
    return m;
  }
};

struct Grounding {
  Index node = 0;
  double conductance = 0.0;

  friend bool operator==(const Grounding&, const Grounding&) = default;
};

// Symmetric Laplacian (both triangles stored, every diagonal present) plus
// the ground connections that were added to its diagonal.
struct LaplacianMatrix {
  SparseMatrix matrix;
  std::vector<Grounding> grounding;

  Index size() const { return matrix.n; }
  bool grounded() const { return !grounding.empty(); }
};

// L = B^T W B. Diagonals accumulate incident conductances in edge order.
inline LaplacianMatrix build_laplacian(const WeightedGraph& g) {
  const Index n = g.num_nodes();
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(static_cast<std::size_t>(n) + 2 * g.edges().size());
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const auto& e = g.edges()[k];
    if (!(e.w > 0.0)) {
      throw InputError("edge " + std::to_string(k) + " (" + std::to_string(e.u) + "," +
                       std::to_string(e.v) + ") has nonpositive weight");
    }
    diag[static_cast<std::size_t>(e.u)] += e.w;
    diag[static_cast<std::size_t>(e.v)] += e.w;
    t.push_back({e.u, e.v, -e.w});
    t.push_back({e.v, e.u, -e.w});
  }
  for (Index i = 0; i < n; ++i) t.push_back({i, i, diag[static_cast<std::size_t>(i)]});
  LaplacianMatrix lap;
  lap.matrix = SparseMatrix::from_triplets(n, std::move(t));
  return lap;
}

// Neighbor lists in compressed form.
struct Adjacency {
  std::vector<Index> ptr{0};
  std::vector<Index> nbr;

  Index degree(Index v) const { return ptr[v + 1] - ptr[v]; }
};

inline Adjacency adjacency(const WeightedGraph& g) {
  const auto n = static_cast<std::size_t>(g.num_nodes());
  Adjacency a;
  a.ptr.assign(n + 1, 0);
  for (const auto& e : g.edges()) {
    ++a.ptr[static_cast<std::size_t>(e.u + 1)];
    ++a.ptr[static_cast<std::size_t>(e.v + 1)];
  }
  std::partial_sum(a.ptr.begin(), a.ptr.end(), a.ptr.begin());
  a.nbr.resize(static_cast<std::size_t>(a.ptr.back()));
  std::vector<Index> fill(a.ptr.begin(), a.ptr.end() - 1);
  for (const auto& e : g.edges()) {
    a.nbr[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.u)]++)] = e.v;
    a.nbr[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.v)]++)] = e.u;
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(a.nbr.begin() + a.ptr[v], a.nbr.begin() + a.ptr[v + 1]);
  }
  return a;
}

// Off-diagonal pattern of a symmetric matrix as neighbor lists.
inline Adjacency adjacency(const SparseMatrix& m) {
  Adjacency a;
  a.ptr.assign(static_cast<std::size_t>(m.n + 1), 0);
  for (Index j = 0; j < m.n; ++j) {
    for (Index p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p) {
      if (m.row_idx[p] != j) a.nbr.push_back(m.row_idx[p]);
    }
    a.ptr[static_cast<std::size_t>(j + 1)] = static_cast<Index>(a.nbr.size());
  }
  return a;
}

// Component id per node; components are numbered by their lowest node.
inline std::vector<Index> component_labels(const Adjacency& adj, Index* count = nullptr) {
  const Index n = static_cast<Index>(adj.ptr.size()) - 1;
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  Index c = 0;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      Index v = stack.back();
      stack.pop_back();
      for (Index p = adj.ptr[v]; p < adj.ptr[v + 1]; ++p) {
        Index u = adj.nbr[p];
        if (label[u] < 0) {
          label[u] = c;
          stack.push_back(u);
        }
      }
    }
    ++c;
  }
  if (count) *count = c;
  return label;
}

inline std::vector<std::vector<Index>> components_from_labels(const std::vector<Index>& label,
                                                              Index count) {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(count));
  for (Index v = 0; v < static_cast<Index>(label.size()); ++v) {
    out[static_cast<std::size_t>(label[v])].push_back(v);
  }
  return out;
}

// Node sets of the connected components, each sorted, ordered by lowest node.
inline std::vector<std::vector<Index>> connected_components(const WeightedGraph& g) {
  Index count = 0;
  auto label = component_labels(adjacency(g), &count);
  return components_from_labels(label, count);
}

enum class GroundPolicy { deterministic, seeded };

// `relative` times the mean conductance. Grounding one node per component
// leaves same-component resistances unchanged, so the magnitude only affects
// conditioning and the common-mode part of the inverse factor columns.
inline double default_ground_value(const WeightedGraph& g, double relative = 0.1) {
  return relative * g.mean_weight();
}

// Adds g_value to the diagonal of one node per connected component: the
// lowest-index node (deterministic) or a uniformly drawn one (seeded).
inline LaplacianMatrix ground_laplacian(const LaplacianMatrix& lap, double g_value,
                                        GroundPolicy policy = GroundPolicy::deterministic,
                                        std::uint64_t seed = 0) {
  if (!(g_value > 0.0)) {
    throw InputError("grounding conductance must be positive, got " + format_double(g_value));
  }
  if (lap.grounded()) throw InputError("Laplacian is already grounded");
  Index count = 0;
  const auto labels = component_labels(adjacency(lap.matrix), &count);
  const auto comps = components_from_labels(labels, count);
  LaplacianMatrix out = lap;
  Rng rng(seed, 0x67726f756e64ULL);
  for (const auto& comp : comps) {
    Index node = comp.front();
    if (policy == GroundPolicy::seeded) node = comp[rng.below(comp.size())];
    const Index pos = out.matrix.find(node, node);
    out.matrix.values[static_cast<std::size_t>(pos)] += g_value;
    out.grounding.push_back({node, g_value});
  }
  return out;
}

struct Query {
  Index p = 0;
  Index q = 0;

  friend bool operator==(const Query&, const Query&) = default;
};

using QuerySet = std::vector<Query>;

inline void validate_queries(const QuerySet& qs, Index n) {
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const auto& x = qs[k];
    if (x.p < 0 || x.p >= n || x.q < 0 || x.q >= n) {
      throw InputError("query " + std::to_string(k) + " (" + std::to_string(x.p) + "," +
                       std::to_string(x.q) + ") outside [0," + std::to_string(n) + ")");
    }
  }
}

inline QuerySet edge_queries(const WeightedGraph& g) {
  QuerySet qs;
  qs.reserve(g.edges().size());
  for (const auto& e : g.edges()) qs.push_back({e.u, e.v});
  return qs;
}

// Uniform sample without replacement of `count` edges (all edges if fewer),
// returned in edge order.
inline QuerySet sample_edge_queries(const WeightedGraph& g, Index count, std::uint64_t seed) {
  const Index m = g.num_edges();
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  const Index take = std::min(count, m);
  Rng rng(seed, 0x73616d706c65ULL);
  // partial Fisher-Yates
  for (Index i = 0; i < take; ++i) {
    Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(m - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(take));
  std::sort(idx.begin(), idx.end());
  QuerySet qs;
  qs.reserve(idx.size());
  for (Index e : idx) qs.push_back({g.edges()[e].u, g.edges()[e].v});
  return qs;
}

}  // namespace effres
