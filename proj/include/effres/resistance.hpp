#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

//
// ... effres header files
//
#include <effres/approx_inverse.hpp>
#include <effres/cholesky.hpp>
#include <effres/graph.hpp>
#include <effres/ordering.hpp>

namespace effres {

enum class Method { ainv, exact, jl };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::ainv: return "ainv";
    case Method::exact: return "exact";
    case Method::jl: return "jl";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  if (s == "ainv") return Method::ainv;
  if (s == "exact") return Method::exact;
  if (s == "jl") return Method::jl;
  throw InputError("unknown method '" + s + "'");
}

struct ResistanceResult {
  Index p = 0;
  Index q = 0;
  double value = 0.0;  // ohms
  Method method = Method::ainv;
  std::optional<double> bound;  // relative-error diagnostic, ainv only

  friend bool operator==(const ResistanceResult&, const ResistanceResult&) = default;
};

// ||L^{-1}(e_p - e_q)||_2^2 by one forward substitution per query. The solve
// starts at the earlier of the two positions; entries are consumed as they
// are finalized so the workspace is clean again afterwards.
inline std::vector<ResistanceResult> query_exact(const SparseCholeskyFactor& f,
                                                 const QuerySet& queries, int threads = 1) {
  if (f.kind != FactorKind::full) throw InputError("query_exact requires a full factor");
  validate_queries(queries, f.n);
  std::vector<ResistanceResult> out(queries.size());
  parallel_ranges(static_cast<Index>(queries.size()), threads, [&](Index lo, Index hi) {
    std::vector<double> y(static_cast<std::size_t>(f.n), 0.0);
    for (Index k = lo; k < hi; ++k) {
      const auto [p, q] = queries[k];
      out[k] = {p, q, 0.0, Method::exact, std::nullopt};
      if (p == q) continue;
      const Index a = f.ordering.inverse_perm[p];
      const Index b = f.ordering.inverse_perm[q];
      y[a] = 1.0;
      y[b] = -1.0;
      double sum = 0.0;
      for (Index j = std::min(a, b); j < f.n; ++j) {
        if (y[j] == 0.0) continue;
        const Index p0 = f.col_ptr[j];
        const double yj = y[j] / f.values[p0];
        y[j] = 0.0;
        sum += yj * yj;
        for (Index t = p0 + 1; t < f.col_ptr[j + 1]; ++t) y[f.row_idx[t]] -= f.values[t] * yj;
      }
      out[k].value = sum;
    }
  });
  return out;
}

// ||z~_p - z~_q||_2^2 by a merged walk over the two sorted columns.
inline std::vector<ResistanceResult> query_ainv(const ApproxInverse& z, const QuerySet& queries,
                                                int threads = 1) {
  validate_queries(queries, z.n);
  std::vector<ResistanceResult> out(queries.size());
  parallel_for(static_cast<Index>(queries.size()), threads, [&](Index k) {
    const auto [p, q] = queries[k];
    out[k] = {p, q, 0.0, Method::ainv, std::nullopt};
    if (p == q) return;
    const Index a = z.ordering.inverse_perm[p];
    const Index b = z.ordering.inverse_perm[q];
    // fixed operand order keeps R(p,q) and R(q,p) bitwise equal
    const Index lo = std::min(a, b);
    const Index hi = std::max(a, b);
    out[k].value = detail::column_pair(z.column_rows(lo), z.column_values(lo), z.column_rows(hi),
                                       z.column_values(hi))
                       .diff_sq;
  });
  return out;
}

// k x n random projection Q W^{1/2} B L_G^{-1}; column v is stored
// contiguously at data[v*k .. v*k+k).
struct ProjectionSketch {
  Index k = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  std::vector<double> data;

  std::span<const double> column(Index v) const {
    return {data.data() + v * k, static_cast<std::size_t>(k)};
  }
};

// Row i of Q has entries +-1/sqrt(k) drawn from stream i of the seeded
// generator, one per edge in edge order. Each row costs one pair of
// triangular solves with the full factor.
inline ProjectionSketch build_jl_sketch(const SparseCholeskyFactor& f, const WeightedGraph& g,
                                        Index k, std::uint64_t seed, int threads = 1) {
  if (k < 1) throw InputError("sketch dimension must be at least 1");
  if (f.kind != FactorKind::full) throw InputError("JL sketch requires a full factor");
  if (f.n != g.num_nodes()) throw InputError("factor and graph sizes differ");
  ProjectionSketch s;
  s.k = k;
  s.n = g.num_nodes();
  s.seed = seed;
  s.data.assign(static_cast<std::size_t>(s.n * k), 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  parallel_for(k, threads, [&](Index i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    std::vector<double> y(static_cast<std::size_t>(f.n), 0.0);
    for (const auto& e : g.edges()) {
      const double c = (rng.coin() ? scale : -scale) * std::sqrt(e.w);
      y[f.ordering.inverse_perm[e.u]] += c;
      y[f.ordering.inverse_perm[e.v]] -= c;
    }
    forward_solve(f, y);
    backward_solve(f, y);
    for (Index pos = 0; pos < f.n; ++pos) s.data[f.ordering.perm[pos] * k + i] = y[pos];
  });
  return s;
}

// Orders (minimum degree) and fully factors the grounded Laplacian first.
inline ProjectionSketch build_jl_sketch(const LaplacianMatrix& lap, const WeightedGraph& g,
                                        Index k, std::uint64_t seed, int threads = 1) {
  if (!lap.grounded()) throw InputError("JL sketch needs a grounded Laplacian");
  auto f = full_cholesky(lap, compute_ordering(lap, OrderingMethod::amd));
  return build_jl_sketch(f, g, k, seed, threads);
}

inline std::vector<ResistanceResult> query_jl(const ProjectionSketch& s, const QuerySet& queries,
                                              int threads = 1) {
  validate_queries(queries, s.n);
  std::vector<ResistanceResult> out(queries.size());
  parallel_for(static_cast<Index>(queries.size()), threads, [&](Index k) {
    const auto [p, q] = queries[k];
    out[k] = {p, q, 0.0, Method::jl, std::nullopt};
    if (p == q) return;
    const auto a = s.column(std::min(p, q));
    const auto b = s.column(std::max(p, q));
    double sum = 0.0;
    for (Index i = 0; i < s.k; ++i) {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    out[k].value = sum;
  });
  return out;
}

struct PipelineConfig {
  Method method = Method::ainv;
  double epsilon = 1e-3;
  double drop_tol = 1e-3;
  bool compensate = true;
  OrderingMethod ordering = OrderingMethod::amd;
  // absolute grounding conductance; when unset, ground_relative * mean weight
  std::optional<double> ground_value;
  double ground_relative = 0.1;
  GroundPolicy ground_policy = GroundPolicy::deterministic;
  Index jl_k = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  // attach alpha-surrogate * epsilon to ainv results
  bool diagnostics = false;
};

struct PipelineReport {
  Index n = 0;
  Index m = 0;
  Index queries = 0;
  double t_ground = 0.0;
  double t_order = 0.0;
  double t_factor = 0.0;
  double t_inverse = 0.0;  // approximate inverse or JL sketch
  double t_query = 0.0;
  double t_total = 0.0;
  Index nnz_factor = 0;
  Index nnz_inverse = 0;   // nnz(Z~) or k*n for a sketch
  double fill_ratio = 0.0; // nnz_inverse / (n log2 n)
  Index max_depth = 0;
  Index dropped = 0;
  Index negative_inverse = 0;  // entries of Z~ below zero
};

// ground -> order -> factor -> approximate inverse / sketch -> queries.
// method=exact uses a full factor and forward substitution per query.
inline std::vector<ResistanceResult> run_pipeline(const WeightedGraph& g, const QuerySet& queries,
                                                  const PipelineConfig& cfg,
                                                  PipelineReport* report = nullptr) {
  validate_queries(queries, g.num_nodes());
  PipelineReport rep;
  rep.n = g.num_nodes();
  rep.m = g.num_edges();
  rep.queries = static_cast<Index>(queries.size());
  Stopwatch total;
  Stopwatch sw;

  const double gval = cfg.ground_value ? *cfg.ground_value : default_ground_value(g, cfg.ground_relative);
  auto lap = ground_laplacian(build_laplacian(g), gval, cfg.ground_policy, cfg.seed);
  rep.t_ground = sw.seconds();

  sw.reset();
  auto ord = compute_ordering(lap, cfg.ordering);
  rep.t_order = sw.seconds();

  sw.reset();
  const bool incomplete = cfg.method == Method::ainv && cfg.drop_tol > 0.0;
  auto factor = incomplete ? incomplete_cholesky(lap, ord, cfg.drop_tol, cfg.compensate)
                           : full_cholesky(lap, ord);
  rep.t_factor = sw.seconds();
  rep.nnz_factor = factor.nnz();
  rep.dropped = factor.dropped;
  const auto depth = depth_profile(factor);
  rep.max_depth = depth.max_depth;

  std::vector<ResistanceResult> out;
  switch (cfg.method) {
    case Method::exact: {
      sw.reset();
      out = query_exact(factor, queries, cfg.threads);
      rep.t_query = sw.seconds();
      break;
    }
    case Method::ainv: {
      sw.reset();
      auto z = approximate_inverse(factor, cfg.epsilon);
      rep.t_inverse = sw.seconds();
      rep.nnz_inverse = z.nnz();
      rep.fill_ratio = z.fill_ratio();
      rep.negative_inverse = static_cast<Index>(std::count_if(z.values.begin(), z.values.end(), [](double v) { return v < 0.0; }));
      sw.reset();
      out = query_ainv(z, queries, cfg.threads);
      if (cfg.diagnostics) {
        for (auto& r : out) r.bound = alpha_surrogate(z, depth, r.p, r.q) * cfg.epsilon;
      }
      rep.t_query = sw.seconds();
      break;
    }
    case Method::jl: {
      sw.reset();
      auto s = build_jl_sketch(factor, g, cfg.jl_k, cfg.seed, cfg.threads);
      rep.t_inverse = sw.seconds();
      rep.nnz_inverse = s.k * s.n;
      if (s.n > 1) {
        rep.fill_ratio = static_cast<double>(rep.nnz_inverse) /
                         (static_cast<double>(s.n) * std::log2(static_cast<double>(s.n)));
      }
      sw.reset();
      out = query_jl(s, queries, cfg.threads);
      rep.t_query = sw.seconds();
      break;
    }
  }
  rep.t_total = total.seconds();
  if (report) *report = rep;
  return out;
}

struct ErrorStats {
  double mean = 0.0;  // E_a
  double max = 0.0;   // E_m
  Index count = 0;
};

// Relative errors |approx/exact - 1|, paired by position.
inline ErrorStats relative_errors(const std::vector<ResistanceResult>& approx,
                                  const std::vector<ResistanceResult>& exact) {
  if (approx.size() != exact.size()) throw InputError("result lists differ in length");
  ErrorStats s;
  for (std::size_t k = 0; k < approx.size(); ++k) {
    if (exact[k].value == 0.0) continue;
    const double e = std::abs(approx[k].value / exact[k].value - 1.0);
    s.mean += e;
    s.max = std::max(s.max, e);
    ++s.count;
  }
  if (s.count > 0) s.mean /= static_cast<double>(s.count);
  return s;
}

}  // namespace effres
