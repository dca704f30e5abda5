#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cstdlib>
#include <iterator>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <vector>

//
// ... effres header files
//
#include <effres/graph.hpp>

namespace effres {

// perm[k] is the node eliminated k-th; inverse_perm[node] is its position.
struct EliminationOrdering {
  std::vector<Index> perm;
  std::vector<Index> inverse_perm;

  Index size() const { return static_cast<Index>(perm.size()); }

  static EliminationOrdering from_perm(std::vector<Index> perm) {
    EliminationOrdering o;
    o.inverse_perm.assign(perm.size(), -1);
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const Index v = perm[k];
      if (v < 0 || v >= static_cast<Index>(perm.size()) || o.inverse_perm[v] >= 0) {
        throw InputError("ordering is not a permutation");
      }
      o.inverse_perm[v] = static_cast<Index>(k);
    }
    o.perm = std::move(perm);
    return o;
  }

  static EliminationOrdering identity(Index n) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Index{0});
    return from_perm(std::move(p));
  }

  friend bool operator==(const EliminationOrdering&, const EliminationOrdering&) = default;
};

enum class OrderingMethod { natural, rcm, amd };

inline std::string to_string(OrderingMethod m) {
  switch (m) {
    case OrderingMethod::natural: return "natural";
    case OrderingMethod::rcm: return "rcm";
    case OrderingMethod::amd: return "amd";
  }
  return "?";
}

inline OrderingMethod ordering_from_string(const std::string& s) {
  if (s == "natural") return OrderingMethod::natural;
  if (s == "rcm") return OrderingMethod::rcm;
  if (s == "amd" || s == "amd-like" || s == "mindeg") return OrderingMethod::amd;
  throw InputError("unknown ordering '" + s + "'");
}

namespace detail {

// BFS levels from `start`; returns the last node reached with minimum degree
// among the deepest level, plus the eccentricity.
inline std::pair<Index, Index> bfs_far_node(const Adjacency& adj, Index start,
                                            std::vector<Index>& level) {
  std::vector<Index> visited{start};
  level[start] = 0;
  Index ecc = 0;
  for (std::size_t head = 0; head < visited.size(); ++head) {
    const Index v = visited[head];
    for (Index p = adj.ptr[v]; p < adj.ptr[v + 1]; ++p) {
      const Index u = adj.nbr[p];
      if (level[u] < 0) {
        level[u] = level[v] + 1;
        ecc = std::max(ecc, level[u]);
        visited.push_back(u);
      }
    }
  }
  Index best = start;
  for (Index v : visited) {
    if (level[v] == ecc && (best == start || adj.degree(v) < adj.degree(best) ||
                            (adj.degree(v) == adj.degree(best) && v < best))) {
      best = v;
    }
  }
  for (Index v : visited) level[v] = -1;
  return {best, ecc};
}

}  // namespace detail

// Reverse Cuthill-McKee, one component at a time starting from a
// pseudo-peripheral node.
inline EliminationOrdering rcm_ordering(const Adjacency& adj) {
  const Index n = static_cast<Index>(adj.ptr.size()) - 1;
  std::vector<Index> level(static_cast<std::size_t>(n), -1);
  std::vector<char> placed(static_cast<std::size_t>(n), 0);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<Index> nbrs;
  for (Index s = 0; s < n; ++s) {
    if (placed[s]) continue;
    Index root = s;
    Index ecc = -1;
    for (int iter = 0; iter < 8; ++iter) {
      auto [far, e] = detail::bfs_far_node(adj, root, level);
      if (e <= ecc) break;
      ecc = e;
      root = far;
    }
    std::size_t head = order.size();
    order.push_back(root);
    placed[root] = 1;
    for (; head < order.size(); ++head) {
      const Index v = order[head];
      nbrs.clear();
      for (Index p = adj.ptr[v]; p < adj.ptr[v + 1]; ++p) {
        if (!placed[adj.nbr[p]]) nbrs.push_back(adj.nbr[p]);
      }
      std::sort(nbrs.begin(), nbrs.end(), [&](Index a, Index b) {
        return adj.degree(a) != adj.degree(b) ? adj.degree(a) < adj.degree(b) : a < b;
      });
      for (Index u : nbrs) {
        placed[u] = 1;
        order.push_back(u);
      }
    }
  }
  std::reverse(order.begin(), order.end());
  return EliminationOrdering::from_perm(std::move(order));
}

// Minimum degree on the explicit elimination graph. Ties go to the lower
// node index. Nodes flagged in `last` are never picked before every other
// node is gone; they are appended in ascending order.
inline EliminationOrdering minimum_degree_ordering(const Adjacency& adj,
                                                   const std::vector<char>& last = {}) {
  const Index n = static_cast<Index>(adj.ptr.size()) - 1;
  std::vector<std::vector<Index>> g(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) g[v].assign(adj.nbr.begin() + adj.ptr[v], adj.nbr.begin() + adj.ptr[v + 1]);
  auto is_last = [&](Index v) { return !last.empty() && last[v]; };

  std::set<std::pair<Index, Index>> queue;
  for (Index v = 0; v < n; ++v) {
    if (!is_last(v)) queue.emplace(static_cast<Index>(g[v].size()), v);
  }
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<Index> merged;
  while (!queue.empty()) {
    const Index v = queue.begin()->second;
    queue.erase(queue.begin());
    order.push_back(v);
    auto nb = std::move(g[v]);
    g[v].clear();
    for (Index u : nb) {
      auto& gu = g[u];
      const Index old_deg = static_cast<Index>(gu.size());
      merged.clear();
      merged.reserve(gu.size() + nb.size());
      // union of gu and nb, minus u and v
      auto a = gu.begin();
      auto b = nb.begin();
      while (a != gu.end() || b != nb.end()) {
        Index x;
        if (b == nb.end() || (a != gu.end() && *a < *b)) {
          x = *a++;
        } else if (a == gu.end() || *b < *a) {
          x = *b++;
        } else {
          x = *a++;
          ++b;
        }
        if (x != u && x != v) merged.push_back(x);
      }
      gu.swap(merged);
      if (!is_last(u) && static_cast<Index>(gu.size()) != old_deg) {
        queue.erase({old_deg, u});
        queue.emplace(static_cast<Index>(gu.size()), u);
      }
    }
  }
  for (Index v = 0; v < n; ++v) {
    if (is_last(v)) order.push_back(v);
  }
  return EliminationOrdering::from_perm(std::move(order));
}

inline EliminationOrdering compute_ordering(const SparseMatrix& m, OrderingMethod method) {
  switch (method) {
    case OrderingMethod::natural: return EliminationOrdering::identity(m.n);
    case OrderingMethod::rcm: return rcm_ordering(adjacency(m));
    case OrderingMethod::amd: return minimum_degree_ordering(adjacency(m));
  }
  throw InputError("unknown ordering");
}

inline EliminationOrdering compute_ordering(const LaplacianMatrix& lap, OrderingMethod method) {
  return compute_ordering(lap.matrix, method);
}

// Max |perm_pos(i) - perm_pos(j)| over stored off-diagonal entries.
inline Index bandwidth(const SparseMatrix& m, const EliminationOrdering& ord) {
  Index bw = 0;
  for (Index j = 0; j < m.n; ++j) {
    for (Index p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p) {
      const Index i = m.row_idx[p];
      bw = std::max(bw, std::abs(ord.inverse_perm[i] - ord.inverse_perm[j]));
    }
  }
  return bw;
}

}  // namespace effres
