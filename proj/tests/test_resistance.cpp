//
// ... Third-party header files
//
#include <gtest/gtest.h>
#include <Eigen/Dense>

//
// ... effres header files
//
#include <effres/resistance.hpp>
#include <effres/synthetic.hpp>

//
// ... Test header files
//
#include "oracles.hpp"

using namespace effres;

namespace {

LaplacianMatrix grounded(const WeightedGraph& g, double rel = 0.1) {
  return ground_laplacian(build_laplacian(g), default_ground_value(g, rel));
}

SparseCholeskyFactor factor(const LaplacianMatrix& lap) {
  return full_cholesky(lap, compute_ordering(lap, OrderingMethod::amd));
}

QuerySet all_pairs(Index n) {
  QuerySet q;
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) q.push_back({a, b});
  }
  return q;
}

double exact_er(const WeightedGraph& g, Index p, Index q) {
  auto f = factor(grounded(g));
  return query_exact(f, {{p, q}})[0].value;
}

}  // namespace

TEST(Exact, SeriesPath) {
  EXPECT_NEAR(exact_er(synthetic::path(3), 0, 2), 2.0, 1e-12);
  auto g = make_graph(5, {{0, 1, 1.0}, {1, 2, 0.5}, {2, 3, 4.0}, {3, 4, 0.25}});
  EXPECT_NEAR(exact_er(g, 0, 4), 1.0 + 2.0 + 0.25 + 4.0, 1e-11);
}

TEST(Exact, UnitTriangle) {
  auto g = make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  auto f = factor(grounded(g));
  for (const auto& r : query_exact(f, all_pairs(3))) EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-12);
}

TEST(Exact, ParallelLaw) {
  auto g = make_graph(2, {{0, 1, 3.0}, {1, 0, 5.0}});
  EXPECT_NEAR(exact_er(g, 0, 1), 1.0 / 8.0, 1e-14);
}

TEST(Exact, MatchesPseudoInverseWithTinyGround) {
  for (int t = 0; t < 10; ++t) {
    auto g = oracle::random_graph(30, 40 + t, t);
    auto f = factor(grounded(g, 1e-8));
    auto pinv = oracle::pseudo_inverse(oracle::dense_laplacian(g));
    auto res = query_exact(f, all_pairs(g.num_nodes()));
    for (const auto& r : res) {
      const double ref = oracle::pinv_resistance(pinv, r.p, r.q);
      EXPECT_LE(std::abs(r.value - ref), 1e-4 * ref) << r.p << "," << r.q;
    }
  }
}

TEST(Exact, GroundingMagnitudeDoesNotChangeResistance) {
  auto g = synthetic::random_connected(40, 50, 3);
  auto a = query_exact(factor(grounded(g, 1e-6)), edge_queries(g));
  auto b = query_exact(factor(grounded(g, 1.0)), edge_queries(g));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k].value, b[k].value, 1e-8 * a[k].value);
}

TEST(Exact, MetricProperties) {
  auto g = oracle::random_graph(25, 17, 0);
  const Index n = g.num_nodes();
  auto f = factor(grounded(g));
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  QuerySet q;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) q.push_back({a, b});
  }
  for (const auto& x : query_exact(f, q)) r(x.p, x.q) = x.value;
  for (Index a = 0; a < n; ++a) {
    EXPECT_EQ(r(a, a), 0.0);
    for (Index b = 0; b < n; ++b) {
      EXPECT_GE(r(a, b), 0.0);
      EXPECT_EQ(r(a, b), r(b, a));
      for (Index c = 0; c < n; ++c) EXPECT_LE(r(a, c), r(a, b) + r(b, c) + 1e-9);
    }
  }
}

TEST(Exact, RayleighMonotonicity) {
  for (int t = 0; t < 6; ++t) {
    auto g = oracle::random_graph(15, 60 + t, t);
    auto before = query_exact(factor(grounded(g)), all_pairs(g.num_nodes()));
    for (std::size_t e = 0; e < g.edges().size(); e += 3) {
      auto edges = g.edges();
      edges[e].w *= 3.0;
      auto h = make_graph(g.num_nodes(), edges);
      auto after = query_exact(factor(grounded(h)), all_pairs(g.num_nodes()));
      for (std::size_t k = 0; k < after.size(); ++k) EXPECT_LE(after[k].value, before[k].value + 1e-9);
    }
  }
}

TEST(Exact, RequiresFullFactor) {
  auto lap = grounded(synthetic::grid(5, 5));
  auto f = incomplete_cholesky(lap, compute_ordering(lap, OrderingMethod::amd), 1e-1);
  EXPECT_THROW(query_exact(f, {{0, 1}}), InputError);
}

TEST(Ainv, SameNodeIsZeroAndSymmetric) {
  auto g = synthetic::grid(6, 6);
  auto z = approximate_inverse(factor(grounded(g)), 1e-3);
  auto r = query_ainv(z, {{4, 4}, {2, 30}, {30, 2}});
  EXPECT_EQ(r[0].value, 0.0);
  EXPECT_EQ(r[1].value, r[2].value);
  EXPECT_EQ(r[1].method, Method::ainv);
}

TEST(Ainv, SingleEdgeExactAtZeroEpsilon) {
  auto g = make_graph(2, {{0, 1, 2.5}});
  auto z = approximate_inverse(factor(grounded(g)), 0.0);
  EXPECT_NEAR(query_ainv(z, {{0, 1}})[0].value, 1.0 / 2.5, 1e-15);
}

TEST(Ainv, Grid15AllEdgesWithinHalfPercent) {
  auto g = synthetic::grid(15, 15);
  auto f = factor(grounded(g));
  auto exact = query_exact(f, edge_queries(g));
  auto approx = query_ainv(approximate_inverse(f, 1e-3), edge_queries(g));
  EXPECT_LE(relative_errors(approx, exact).mean, 5e-3);
}

TEST(Ainv, OutOfRangeQueryRejected) {
  auto g = synthetic::grid(3, 3);
  auto z = approximate_inverse(factor(grounded(g)), 1e-3);
  EXPECT_THROW(query_ainv(z, {{0, 9}}), InputError);
}

TEST(Jl, SingleEdgeIsExactForAnySeed) {
  // m = 1: the projection is a sign, so the estimate equals 1/w exactly
  auto g = make_graph(2, {{0, 1, 4.0}});
  auto lap = grounded(g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = build_jl_sketch(lap, g, 1, seed);
    EXPECT_NEAR(query_jl(s, {{0, 1}})[0].value, 0.25, 1e-14);
  }
}

TEST(Jl, DeterministicAndThreadIndependent) {
  auto g = synthetic::grid(10, 10);
  auto lap = grounded(g);
  auto a = build_jl_sketch(lap, g, 50, 9, 1);
  auto b = build_jl_sketch(lap, g, 50, 9, 3);
  EXPECT_EQ(a.data, b.data);
  auto r = query_jl(a, {{3, 3}, {1, 50}, {50, 1}});
  EXPECT_EQ(r[0].value, 0.0);
  EXPECT_EQ(r[1].value, r[2].value);
}

TEST(Jl, ProjectionEntriesAreScaledSigns) {
  // on a star with unit weights, column differences expose Q directly:
  // sketch(:, leaf) - sketch(:, center) = Q(:, e) / sqrt(w) * R(e) with R(e) = 1
  std::vector<Edge> e;
  for (Index v = 1; v < 5; ++v) e.push_back({0, v, 1.0});
  auto g = make_graph(5, e);
  auto s = build_jl_sketch(grounded(g), g, 16, 2);
  for (Index leaf = 1; leaf < 5; ++leaf) {
    for (Index i = 0; i < 16; ++i) {
      EXPECT_NEAR(std::abs(s.column(leaf)[i] - s.column(0)[i]), 0.25, 1e-12);
    }
  }
}

TEST(Jl, Grid15BandOverSeeds) {
  auto g = synthetic::grid(15, 15);
  auto lap = grounded(g);
  auto f = factor(lap);
  auto exact = query_exact(f, edge_queries(g));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = build_jl_sketch(f, g, 200, seed);
    const double ea = relative_errors(query_jl(s, edge_queries(g)), exact).mean;
    EXPECT_GE(ea, 5e-3) << seed;
    EXPECT_LE(ea, 1e-1) << seed;
  }
}

TEST(Jl, UnbiasedOnAverage) {
  auto g = synthetic::random_connected(20, 15, 4);
  auto lap = grounded(g);
  auto f = factor(lap);
  auto q = edge_queries(g);
  auto exact = query_exact(f, q);
  std::vector<double> mean(q.size(), 0.0);
  const int seeds = 60;
  for (int s = 0; s < seeds; ++s) {
    auto r = query_jl(build_jl_sketch(f, g, 100, s), q);
    for (std::size_t k = 0; k < q.size(); ++k) mean[k] += r[k].value / seeds;
  }
  for (std::size_t k = 0; k < q.size(); ++k) EXPECT_NEAR(mean[k], exact[k].value, 0.05 * exact[k].value);
}

TEST(Pipeline, DefaultsOnGrid15) {
  auto g = synthetic::grid(15, 15);
  auto q = edge_queries(g);
  PipelineConfig cfg;
  PipelineReport rep;
  auto approx = run_pipeline(g, q, cfg, &rep);
  auto exact_cfg = cfg;
  exact_cfg.method = Method::exact;
  auto exact = run_pipeline(g, q, exact_cfg);
  EXPECT_LE(relative_errors(approx, exact).mean, 1e-2);
  EXPECT_EQ(rep.n, 225);
  EXPECT_EQ(rep.queries, static_cast<Index>(q.size()));
  EXPECT_GT(rep.nnz_inverse, 0);
  EXPECT_LE(rep.fill_ratio, 20.0);
}

TEST(Pipeline, ExactDispatchMatchesQueryExactBitwise) {
  auto g = synthetic::random_connected(50, 60, 8);
  auto q = sample_edge_queries(g, 30, 1);
  PipelineConfig cfg;
  cfg.method = Method::exact;
  auto a = run_pipeline(g, q, cfg);
  auto lap = grounded(g);
  auto b = query_exact(full_cholesky(lap, compute_ordering(lap, OrderingMethod::amd)), q);
  EXPECT_EQ(a, b);
}

TEST(Pipeline, HalvingEpsilonDoesNotHurt) {
  auto g = synthetic::grid(15, 15);
  auto q = edge_queries(g);
  PipelineConfig cfg;
  auto exact_cfg = cfg;
  exact_cfg.method = Method::exact;
  auto exact = run_pipeline(g, q, exact_cfg);
  const double e1 = relative_errors(run_pipeline(g, q, cfg), exact).mean;
  cfg.epsilon = 5e-4;
  const double e2 = relative_errors(run_pipeline(g, q, cfg), exact).mean;
  EXPECT_LE(e2, 1.1 * e1);
}

TEST(Pipeline, IncompleteFactorCloseToFull) {
  auto g = synthetic::grid(30, 30);
  auto q = edge_queries(g);
  PipelineConfig full_cfg;
  full_cfg.drop_tol = 0.0;
  full_cfg.epsilon = 0.0;
  auto full = run_pipeline(g, q, full_cfg);
  PipelineConfig inc_cfg;
  inc_cfg.epsilon = 0.0;
  EXPECT_LE(relative_errors(run_pipeline(g, q, inc_cfg), full).mean, 1e-2);
}

TEST(Pipeline, ThreadCountDoesNotChangeResults) {
  auto g = synthetic::grid(20, 20, 0.5, 2.0, 3);
  auto q = edge_queries(g);
  for (auto m : {Method::ainv, Method::exact, Method::jl}) {
    PipelineConfig cfg;
    cfg.method = m;
    cfg.jl_k = 30;
    auto a = run_pipeline(g, q, cfg);
    cfg.threads = 4;
    auto b = run_pipeline(g, q, cfg);
    EXPECT_EQ(a, b) << to_string(m);
  }
}

TEST(Pipeline, DiagnosticsAttachBound) {
  auto g = synthetic::grid(8, 8);
  PipelineConfig cfg;
  cfg.diagnostics = true;
  auto r = run_pipeline(g, {{0, 1}}, cfg);
  ASSERT_TRUE(r[0].bound.has_value());
  EXPECT_GE(*r[0].bound, 0.0);
}

TEST(Pipeline, StringConversions) {
  EXPECT_EQ(method_from_string("jl"), Method::jl);
  EXPECT_EQ(to_string(Method::exact), "exact");
  EXPECT_THROW(method_from_string("cmg"), InputError);
}
