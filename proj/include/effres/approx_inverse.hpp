#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

//
// ... effres header files
//
#include <effres/cholesky.hpp>

namespace effres {

// Sparse vector with ascending indices.
struct SparseVector {
  std::vector<Index> indices;
  std::vector<double> values;

  Index nnz() const { return static_cast<Index>(indices.size()); }
  double norm1() const {
    double s = 0.0;
    for (double v : values) s += std::abs(v);
    return s;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

namespace detail {

// Number of smallest entries that fit in the budget eps * sum(values).
// `order` receives positions sorted by (value, index) ascending. The entry at
// position `keep` (if >= 0) is never counted.
inline std::size_t truncation_count(std::span<const Index> indices, std::span<const double> values,
                                    double epsilon, Index keep, std::vector<std::size_t>& order,
                                    double* dropped_mass) {
  order.clear();
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    total += values[k];
    if (static_cast<Index>(k) != keep) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] < values[b] : indices[a] < indices[b];
  });
  const double budget = epsilon * total;
  double mass = 0.0;
  std::size_t k = 0;
  for (; k < order.size(); ++k) {
    const double next = mass + values[order[k]];
    if (next > budget) break;
    mass = next;
  }
  if (dropped_mass) *dropped_mass = mass;
  return k;
}

}  // namespace detail

// Zeroes the largest number k of smallest entries whose total stays within
// epsilon * ||col||_1. Equal values drop the lower index first.
inline SparseVector truncate_column(const SparseVector& col, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in [0, 1)");
  for (double v : col.values) {
    if (v < 0.0) throw InputError("truncate_column expects a nonnegative vector");
  }
  if (epsilon == 0.0) return col;
  std::vector<std::size_t> order;
  const auto k = detail::truncation_count(col.indices, col.values, epsilon, -1, order, nullptr);
  std::vector<char> drop(col.values.size(), 0);
  for (std::size_t t = 0; t < k; ++t) drop[order[t]] = 1;
  SparseVector out;
  for (std::size_t t = 0; t < col.values.size(); ++t) {
    if (!drop[t]) {
      out.indices.push_back(col.indices[t]);
      out.values.push_back(col.values[t]);
    }
  }
  return out;
}

struct ColumnStats {
  Index nnz = 0;
  Index untruncated_nnz = 0;
  double truncated_mass = 0.0;
  double norm1 = 0.0;  // ||z_j*||_1 before truncation
};

// Sparse nonnegative approximation of the inverse Cholesky factor. Column j
// approximates L^{-1} e_j; indices and columns are factor positions.
struct ApproxInverse {
  Index n = 0;
  double epsilon = 0.0;
  std::vector<Index> col_ptr{0};
  std::vector<Index> row_idx;
  std::vector<double> values;
  std::vector<ColumnStats> stats;
  EliminationOrdering ordering;

  Index nnz() const { return static_cast<Index>(row_idx.size()); }

  std::span<const Index> column_rows(Index j) const {
    return {row_idx.data() + col_ptr[j], static_cast<std::size_t>(col_ptr[j + 1] - col_ptr[j])};
  }
  std::span<const double> column_values(Index j) const {
    return {values.data() + col_ptr[j], static_cast<std::size_t>(col_ptr[j + 1] - col_ptr[j])};
  }

  // nnz / (n log2 n)
  double fill_ratio() const {
    if (n < 2) return 0.0;
    return static_cast<double>(nnz()) / (static_cast<double>(n) * std::log2(static_cast<double>(n)));
  }
};

// Builds columns n-1 .. 0 from
//   z_j* = e_j / L_jj + sum_{i > j, L_ij != 0} (-L_ij / L_jj) z~_i
// and keeps z_j* as is when it has at most floor(log2 n) nonzeros, otherwise
// truncates its smallest entries within the epsilon budget. The diagonal
// entry is never truncated.
inline ApproxInverse approximate_inverse(const SparseCholeskyFactor& factor, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in [0, 1)");
  const Index n = factor.n;
  const auto small_column = static_cast<std::size_t>(floor_log2(static_cast<std::uint64_t>(std::max<Index>(n, 1))));

  // columns are produced last-to-first; build order is reversed at the end
  std::vector<Index> start(static_cast<std::size_t>(n + 1), 0);
  std::vector<Index> rows;
  std::vector<double> vals;
  rows.reserve(static_cast<std::size_t>(4 * n));
  vals.reserve(static_cast<std::size_t>(4 * n));
  std::vector<Index> begin(static_cast<std::size_t>(n), 0);
  std::vector<Index> end(static_cast<std::size_t>(n), 0);

  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  std::vector<Index> pattern;
  std::vector<double> pattern_vals;
  std::vector<std::size_t> order;
  std::vector<char> drop;

  ApproxInverse z;
  z.n = n;
  z.epsilon = epsilon;
  z.ordering = factor.ordering;
  z.stats.resize(static_cast<std::size_t>(n));

  for (Index j = n - 1; j >= 0; --j) {
    const Index p0 = factor.col_ptr[j];
    const double ljj = factor.values[p0];
    pattern.clear();
    pattern.push_back(j);
    mark[j] = 1;
    x[j] = 1.0 / ljj;
    for (Index p = p0 + 1; p < factor.col_ptr[j + 1]; ++p) {
      const Index i = factor.row_idx[p];
      const double coef = -factor.values[p] / ljj;
      for (Index q = begin[i]; q < end[i]; ++q) {
        const Index r = rows[q];
        if (!mark[r]) {
          mark[r] = 1;
          pattern.push_back(r);
        }
        x[r] += coef * vals[q];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    pattern_vals.resize(pattern.size());
    for (std::size_t t = 0; t < pattern.size(); ++t) pattern_vals[t] = x[pattern[t]];

    auto& st = z.stats[j];
    st.untruncated_nnz = static_cast<Index>(pattern.size());
    for (double v : pattern_vals) st.norm1 += v;

    drop.assign(pattern.size(), 0);
    if (pattern.size() > small_column && epsilon > 0.0) {
      // j is the smallest index in its own column, so it sits at position 0
      const auto k = detail::truncation_count(pattern, pattern_vals, epsilon, 0, order,
                                              &st.truncated_mass);
      for (std::size_t t = 0; t < k; ++t) drop[order[t]] = 1;
    }

    begin[j] = static_cast<Index>(rows.size());
    for (std::size_t t = 0; t < pattern.size(); ++t) {
      if (!drop[t]) {
        rows.push_back(pattern[t]);
        vals.push_back(pattern_vals[t]);
      }
      x[pattern[t]] = 0.0;
      mark[pattern[t]] = 0;
    }
    end[j] = static_cast<Index>(rows.size());
    st.nnz = end[j] - begin[j];
  }

  z.col_ptr.assign(static_cast<std::size_t>(n + 1), 0);
  for (Index j = 0; j < n; ++j) z.col_ptr[j + 1] = z.col_ptr[j] + (end[j] - begin[j]);
  z.row_idx.resize(rows.size());
  z.values.resize(vals.size());
  for (Index j = 0; j < n; ++j) {
    std::copy(rows.begin() + begin[j], rows.begin() + end[j], z.row_idx.begin() + z.col_ptr[j]);
    std::copy(vals.begin() + begin[j], vals.begin() + end[j], z.values.begin() + z.col_ptr[j]);
  }
  return z;
}

// Per-node bound depth(p) * epsilon on ||z_p - z~_p||_1 / ||z_p||_1. The bound
// is proven for exact factors only.
struct ErrorCertificate {
  double epsilon = 0.0;
  std::vector<double> bound;  // per factor position
  bool exact_factor = true;
};

inline ErrorCertificate error_certificate(const ApproxInverse& z, const DepthProfile& d,
                                          FactorKind kind = FactorKind::full) {
  if (static_cast<Index>(d.depth.size()) != z.n) {
    throw InputError("depth profile has " + std::to_string(d.depth.size()) +
                     " entries, approximate inverse has " + std::to_string(z.n) + " columns");
  }
  ErrorCertificate c;
  c.epsilon = z.epsilon;
  c.exact_factor = kind == FactorKind::full;
  c.bound.resize(d.depth.size());
  for (std::size_t p = 0; p < d.depth.size(); ++p) {
    c.bound[p] = static_cast<double>(d.depth[p]) * z.epsilon;
  }
  return c;
}

namespace detail {

struct PairNorms {
  double diff_sq = 0.0;    // ||a - b||_2^2
  double diff_norm1 = 0.0; // ||a - b||_1
};

inline PairNorms column_pair(std::span<const Index> ai, std::span<const double> av,
                             std::span<const Index> bi, std::span<const double> bv) {
  PairNorms r;
  std::size_t s = 0;
  std::size_t t = 0;
  while (s < ai.size() || t < bi.size()) {
    double d = 0.0;
    if (t == bi.size() || (s < ai.size() && ai[s] < bi[t])) {
      d = av[s++];
    } else if (s == ai.size() || bi[t] < ai[s]) {
      d = -bv[t++];
    } else {
      d = av[s++] - bv[t++];
    }
    r.diff_sq += d * d;
    r.diff_norm1 += std::abs(d);
  }
  return r;
}

}  // namespace detail

// Surrogate for the first-order relative-error factor
//   alpha = 2 ||z_pq||_1 (||z_p||_1 depth(p) + ||z_q||_1 depth(q)) / ||z_pq||_2^2
// evaluated with the stored approximate columns. Diagnostic only. p and q are
// graph nodes.
inline double alpha_surrogate(const ApproxInverse& z, const DepthProfile& d, Index p, Index q) {
  if (p == q) return 0.0;
  const Index a = z.ordering.inverse_perm[p];
  const Index b = z.ordering.inverse_perm[q];
  auto pair = detail::column_pair(z.column_rows(a), z.column_values(a), z.column_rows(b),
                                  z.column_values(b));
  double na = 0.0;
  double nb = 0.0;
  for (double v : z.column_values(a)) na += v;
  for (double v : z.column_values(b)) nb += v;
  if (pair.diff_sq == 0.0) return 0.0;
  return 2.0 * pair.diff_norm1 *
         (na * static_cast<double>(d.depth[a]) + nb * static_cast<double>(d.depth[b])) /
         pair.diff_sq;
}

}  // namespace effres
