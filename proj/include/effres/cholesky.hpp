#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

//
// ... effres header files
//
#include <effres/graph.hpp>
#include <effres/ordering.hpp>

namespace effres {

enum class FactorKind { full, incomplete };

// Lower-triangular factor in compressed column form. Each column stores its
// diagonal first, then off-diagonal rows in ascending order. Indices refer
// to positions in `ordering`, not to graph nodes.
struct SparseCholeskyFactor {
  Index n = 0;
  std::vector<Index> col_ptr{0};
  std::vector<Index> row_idx;
  std::vector<double> values;
  EliminationOrdering ordering;
  FactorKind kind = FactorKind::full;
  double drop_tol = 0.0;
  bool compensated = true;
  Index dropped = 0;
  // parent[j] is the first off-diagonal row of column j, -1 for a root.
  std::vector<Index> parent;

  Index nnz() const { return static_cast<Index>(row_idx.size()); }
  double diag(Index j) const { return values[col_ptr[j]]; }

  std::span<const Index> column_rows(Index j) const {
    return {row_idx.data() + col_ptr[j], static_cast<std::size_t>(col_ptr[j + 1] - col_ptr[j])};
  }
  std::span<const double> column_values(Index j) const {
    return {values.data() + col_ptr[j], static_cast<std::size_t>(col_ptr[j + 1] - col_ptr[j])};
  }
};

// P A P^T with sorted row indices.
inline SparseMatrix permute_symmetric(const SparseMatrix& a, const EliminationOrdering& ord) {
  if (ord.size() != a.n) throw InputError("ordering size does not match matrix");
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(a.row_idx.size());
  for (Index j = 0; j < a.n; ++j) {
    for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      t.push_back({ord.inverse_perm[a.row_idx[p]], ord.inverse_perm[j], a.values[p]});
    }
  }
  return SparseMatrix::from_triplets(a.n, std::move(t));
}

namespace detail {

struct FactorOutput {
  std::vector<Index> col_ptr{0};
  std::vector<Index> row_idx;
  std::vector<double> values;
  Index dropped = 0;
  // Trailing Schur complement (lower triangle, rows/cols shifted by the
  // number of factored columns); empty when every column is factored.
  std::vector<SparseMatrix::Triplet> schur;
};

// Left-looking column Cholesky of an already permuted symmetric matrix.
// Columns [0, factor_cols) are factored; the remaining trailing block is
// updated by them and returned as a Schur complement.
//
// Column k joins the update list of row r when r is the next unprocessed
// row stored in column k, so column j only touches columns with L(j,k) != 0.
//
// Off-diagonal entries with |c_i| < drop_tol * ||c||_1 are discarded (c is
// the column before scaling). With compensation the discarded magnitude is
// added to the pivot.
inline FactorOutput left_looking(const SparseMatrix& a, Index factor_cols, double drop_tol,
                                 bool compensate) {
  const Index n = a.n;
  FactorOutput out;
  out.col_ptr.reserve(static_cast<std::size_t>(factor_cols + 1));
  out.row_idx.reserve(static_cast<std::size_t>(a.nnz()));
  out.values.reserve(static_cast<std::size_t>(a.nnz()));

  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  std::vector<Index> pattern;
  std::vector<Index> head(static_cast<std::size_t>(n), -1);
  std::vector<Index> link(static_cast<std::size_t>(factor_cols), -1);
  std::vector<Index> next(static_cast<std::size_t>(factor_cols), 0);

  auto touch = [&](Index i) {
    if (!mark[i]) {
      mark[i] = 1;
      pattern.push_back(i);
    }
  };

  for (Index j = 0; j < n; ++j) {
    pattern.clear();
    touch(j);
    for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      const Index i = a.row_idx[p];
      if (i < j) continue;
      touch(i);
      x[i] += a.values[p];
    }

    Index k = head[j];
    head[j] = -1;
    while (k >= 0) {
      const Index next_k = link[k];
      const Index pos = next[k];
      const double ljk = out.values[pos];
      const Index end = out.col_ptr[k + 1];
      for (Index p = pos; p < end; ++p) {
        const Index i = out.row_idx[p];
        touch(i);
        x[i] -= out.values[p] * ljk;
      }
      if (pos + 1 < end) {
        next[k] = pos + 1;
        const Index r = out.row_idx[pos + 1];
        link[k] = head[r];
        head[r] = k;
      }
      k = next_k;
    }

    std::sort(pattern.begin(), pattern.end());

    if (j >= factor_cols) {
      for (Index i : pattern) {
        out.schur.push_back({i - factor_cols, j - factor_cols, x[i]});
        x[i] = 0.0;
        mark[i] = 0;
      }
      continue;
    }

    double pivot = x[j];
    double norm1 = 0.0;
    for (Index i : pattern) norm1 += std::abs(x[i]);
    const double threshold = drop_tol * norm1;
    if (drop_tol > 0.0) {
      for (Index i : pattern) {
        if (i != j && std::abs(x[i]) < threshold) {
          if (compensate) pivot += std::abs(x[i]);
          x[i] = 0.0;
          mark[i] = 2;  // dropped
          ++out.dropped;
        }
      }
    }
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw NumericalError("nonpositive pivot " + format_double(pivot) + " at column " +
                               std::to_string(j) + " (matrix not positive definite)",
                           j);
    }
    const double ljj = std::sqrt(pivot);
    out.row_idx.push_back(j);
    out.values.push_back(ljj);
    for (Index i : pattern) {
      if (i != j && mark[i] == 1) {
        out.row_idx.push_back(i);
        out.values.push_back(x[i] / ljj);
      }
      x[i] = 0.0;
      mark[i] = 0;
    }
    const Index first = out.col_ptr.back();
    out.col_ptr.push_back(static_cast<Index>(out.row_idx.size()));
    if (first + 1 < out.col_ptr.back()) {
      next[j] = first + 1;
      const Index r = out.row_idx[first + 1];
      link[j] = head[r];
      head[r] = j;
    }
  }
  return out;
}

inline SparseCholeskyFactor factor_impl(const SparseMatrix& a, const EliminationOrdering& ord,
                                        FactorKind kind, double drop_tol, bool compensate) {
  const auto permuted = permute_symmetric(a, ord);
  auto out = left_looking(permuted, permuted.n, drop_tol, compensate);
  SparseCholeskyFactor f;
  f.n = permuted.n;
  f.col_ptr = std::move(out.col_ptr);
  f.row_idx = std::move(out.row_idx);
  f.values = std::move(out.values);
  f.ordering = ord;
  f.kind = kind;
  f.drop_tol = drop_tol;
  f.compensated = compensate;
  f.dropped = out.dropped;
  f.parent.assign(static_cast<std::size_t>(f.n), -1);
  for (Index j = 0; j < f.n; ++j) {
    if (f.col_ptr[j + 1] - f.col_ptr[j] > 1) f.parent[j] = f.row_idx[f.col_ptr[j] + 1];
  }
  return f;
}

}  // namespace detail

// Exact sparse Cholesky of the permuted (grounded) Laplacian.
inline SparseCholeskyFactor full_cholesky(const LaplacianMatrix& lap, const EliminationOrdering& ord) {
  return detail::factor_impl(lap.matrix, ord, FactorKind::full, 0.0, false);
}

// Any symmetric positive definite matrix (nodal conductance matrices).
inline SparseCholeskyFactor full_cholesky(const SparseMatrix& a, const EliminationOrdering& ord) {
  return detail::factor_impl(a, ord, FactorKind::full, 0.0, false);
}

// Incomplete Cholesky with a relative, per-column drop rule. drop_tol = 0
// reproduces full_cholesky.
inline SparseCholeskyFactor incomplete_cholesky(const LaplacianMatrix& lap,
                                                const EliminationOrdering& ord, double drop_tol,
                                                bool compensate = true) {
  if (!(drop_tol >= 0.0)) throw InputError("drop tolerance must be nonnegative");
  return detail::factor_impl(lap.matrix, ord, drop_tol > 0.0 ? FactorKind::incomplete : FactorKind::full,
                             drop_tol, compensate);
}

// Eliminates the first `eliminate` positions of `ord` exactly and returns the
// Schur complement on the remaining positions, in ordering order, with both
// triangles stored.
inline SparseMatrix schur_complement(const SparseMatrix& a, const EliminationOrdering& ord,
                                     Index eliminate) {
  const auto permuted = permute_symmetric(a, ord);
  auto out = detail::left_looking(permuted, eliminate, 0.0, false);
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(out.schur.size() * 2);
  for (const auto& e : out.schur) {
    t.push_back(e);
    if (e.row != e.col) t.push_back({e.col, e.row, e.value});
  }
  return SparseMatrix::from_triplets(a.n - eliminate, std::move(t));
}

// Solves L y = b in place (b indexed by factor position).
inline void forward_solve(const SparseCholeskyFactor& f, std::span<double> b) {
  for (Index j = 0; j < f.n; ++j) {
    if (b[j] == 0.0) continue;
    const Index p0 = f.col_ptr[j];
    b[j] /= f.values[p0];
    const double yj = b[j];
    for (Index p = p0 + 1; p < f.col_ptr[j + 1]; ++p) b[f.row_idx[p]] -= f.values[p] * yj;
  }
}

// Solves L^T x = y in place.
inline void backward_solve(const SparseCholeskyFactor& f, std::span<double> b) {
  for (Index j = f.n - 1; j >= 0; --j) {
    const Index p0 = f.col_ptr[j];
    double s = b[j];
    for (Index p = p0 + 1; p < f.col_ptr[j + 1]; ++p) s -= f.values[p] * b[f.row_idx[p]];
    b[j] = s / f.values[p0];
  }
}

// Solves (P^T L L^T P) x = b for b in node order.
inline std::vector<double> solve(const SparseCholeskyFactor& f, std::span<const double> b) {
  std::vector<double> y(static_cast<std::size_t>(f.n));
  for (Index k = 0; k < f.n; ++k) y[k] = b[f.ordering.perm[k]];
  forward_solve(f, y);
  backward_solve(f, y);
  std::vector<double> x(static_cast<std::size_t>(f.n));
  for (Index k = 0; k < f.n; ++k) x[f.ordering.perm[k]] = y[k];
  return x;
}

struct DepthProfile {
  std::vector<Index> depth;  // per factor position
  Index max_depth = 0;
};

// depth(p) = 0 for a column with no off-diagonals, otherwise
// 1 + max depth(i) over its off-diagonal rows i > p.
inline DepthProfile depth_profile(const SparseCholeskyFactor& f) {
  DepthProfile d;
  d.depth.assign(static_cast<std::size_t>(f.n), 0);
  for (Index j = f.n - 1; j >= 0; --j) {
    Index best = -1;
    for (Index p = f.col_ptr[j] + 1; p < f.col_ptr[j + 1]; ++p) {
      best = std::max(best, d.depth[f.row_idx[p]]);
    }
    d.depth[j] = best + 1;
    d.max_depth = std::max(d.max_depth, d.depth[j]);
  }
  return d;
}

}  // namespace effres
