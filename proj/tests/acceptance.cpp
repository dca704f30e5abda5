// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

//
// ... Standard header files
//
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

//
// ... Third-party header files
//
#include <Eigen/Dense>

//
// ... effres header files
//
#include <effres/effres.hpp>

//
// ... Test header files
//
#include "oracles.hpp"

using namespace effres;
namespace fs = std::filesystem;

namespace {

// ---- bookkeeping ------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Negative entries of Z~ seen by any run in this suite.
struct SignLedger {
  Index runs = 0;
  Index negatives = 0;
  void add(Index neg) {
    ++runs;
    negatives += neg;
  }
  void add(const ApproxInverse& z) {
    add(static_cast<Index>(std::count_if(z.values.begin(), z.values.end(), [](double v) { return v < 0.0; })));
  }
  void add(const PipelineReport& r) { add(r.negative_inverse); }
} g_sign;

// Schur verification results seen by any reduction in this suite.
struct SchurLedger {
  Index blocks = 0;
  double worst = 0.0;
  void add(const pg::Reduction& r) {
    for (const auto& b : r.blocks) {
      ++blocks;
      worst = std::max(worst, b.model.schur_check);
    }
  }
} g_schur;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---- shared setup -----------------------------------------------------------

struct GridCase {
  WeightedGraph g;
  QuerySet queries;
  std::vector<ResistanceResult> exact;
  double t_exact = 0.0;
};

const GridCase& grid100() {
  static const GridCase c = [] {
    GridCase c;
    c.g = synthetic::grid(100, 100);
    c.queries = sample_edge_queries(c.g, 1000, 1);
    PipelineConfig cfg;
    cfg.method = Method::exact;
    c.exact = run_pipeline(c.g, c.queries, cfg);
    return c;
  }();
  return c;
}

ErrorStats grid100_errors(const PipelineConfig& cfg, PipelineReport* rep = nullptr) {
  const auto& c = grid100();
  PipelineReport r;
  const auto approx = run_pipeline(c.g, c.queries, cfg, &r);
  if (cfg.method == Method::ainv) g_sign.add(r);
  if (rep) *rep = r;
  return relative_errors(approx, c.exact);
}

Eigen::MatrixXd dense_factor(const SparseCholeskyFactor& f) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(f.n, f.n);
  for (Index j = 0; j < f.n; ++j) {
    for (Index p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) l(f.row_idx[p], j) = f.values[p];
  }
  return l;
}

Eigen::MatrixXd dense_inverse(const ApproxInverse& z) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(z.n, z.n);
  for (Index j = 0; j < z.n; ++j) {
    for (Index p = z.col_ptr[j]; p < z.col_ptr[j + 1]; ++p) d(z.row_idx[p], j) = z.values[p];
  }
  return d;
}

// Scales the resistors inside `block` so its reduced model must change.
pg::Netlist modify_block(const pg::Netlist& net, const pg::PartitionAssignment& part, Index block) {
  pg::Netlist out = net;
  for (auto& r : out.resistors) {
    if (r.a != pg::kGround && r.b != pg::kGround && part.block[r.a] == block && part.block[r.b] == block) {
      r.ohms *= 1.1;
    }
  }
  return out;
}

// ---- criteria ---------------------------------------------------------------

Outcome c1_oracle() {
  Stopwatch sw;
  double worst = 0.0;
  Index graphs = 0;
  Index pairs = 0;
  for (int t = 0; t < 60; ++t) {
    const Index n = 5 + (t * 7) % 46;
    const auto g = oracle::random_graph(n, 1000 + static_cast<std::uint64_t>(t), t % 4);
    QuerySet q = edge_queries(g);
    Rng rng(static_cast<std::uint64_t>(t), 5);
    for (int k = 0; k < 20; ++k) {
      q.push_back({static_cast<Index>(rng.below(static_cast<std::uint64_t>(g.num_nodes()))),
                   static_cast<Index>(rng.below(static_cast<std::uint64_t>(g.num_nodes())))});
    }
    PipelineConfig cfg;
    cfg.method = Method::exact;
    cfg.ground_relative = 1e-8;
    const auto r = run_pipeline(g, q, cfg);
    const auto pinv = oracle::pseudo_inverse(oracle::dense_laplacian(g));
    for (const auto& x : r) {
      const double ref = oracle::pinv_resistance(pinv, x.p, x.q);
      const double err = ref == 0.0 ? std::abs(x.value) : std::abs(x.value / ref - 1.0);
      worst = std::max(worst, err);
      ++pairs;
    }
    ++graphs;
  }
  const double t = sw.seconds();
  return {worst <= 1e-4 && graphs >= 50 && t < 10.0,
          std::to_string(graphs) + " graphs, " + std::to_string(pairs) + " pairs, max rel err " + fmt(worst) +
              " (<= 1e-4), " + fmt(t) + " s (< 10 s)"};
}

Outcome c3_certificate() {
  Stopwatch sw;
  double worst_slack = -1.0;  // max of err - bound
  Index columns = 0;
  std::vector<WeightedGraph> graphs;
  for (Index s : {5, 10, 15, 17}) graphs.push_back(synthetic::grid(s, s, 0.5, 2.0, static_cast<std::uint64_t>(s)));
  for (int t = 0; t < 12; ++t) {
    graphs.push_back(oracle::random_graph(40 + 22 * t, 2000 + static_cast<std::uint64_t>(t), t % 4));
  }
  for (const auto& g : graphs) {
    auto lap = ground_laplacian(build_laplacian(g), default_ground_value(g));
    const auto f = full_cholesky(lap, compute_ordering(lap, OrderingMethod::amd));
    const auto d = depth_profile(f);
    const auto exact = oracle::lower_inverse(dense_factor(f));
    for (double eps : {1e-2, 1e-3}) {
      const auto z = approximate_inverse(f, eps);
      g_sign.add(z);
      const auto cert = error_certificate(z, d);
      const auto approx = dense_inverse(z);
      for (Index j = 0; j < f.n; ++j) {
        const double err = (exact.col(j) - approx.col(j)).lpNorm<1>() / exact.col(j).lpNorm<1>();
        worst_slack = std::max(worst_slack, err - cert.bound[j]);
        ++columns;
      }
    }
  }
  const double t = sw.seconds();
  return {worst_slack <= 1e-12 && t < 60.0,
          std::to_string(graphs.size()) + " graphs (n <= 300), " + std::to_string(columns) +
              " columns, max(err - depth*eps) " + fmt(worst_slack) + " (<= 1e-12), " + fmt(t) + " s (< 60 s)"};
}

Outcome c4_accuracy() {
  Stopwatch sw;
  grid100();
  PipelineConfig cfg;  // drop_tol 1e-3, epsilon 1e-3
  const auto e = grid100_errors(cfg);
  const double t = sw.seconds();
  return {e.mean <= 1e-2 && e.max <= 5e-2 && t < 60.0,
          "100x100 grid, " + std::to_string(e.count) + " edges: E_a " + fmt(e.mean) + " (<= 1e-2), E_m " +
              fmt(e.max) + " (<= 5e-2), " + fmt(t) + " s (< 60 s)"};
}

Outcome c5_linear_trend() {
  PipelineConfig cfg;
  cfg.drop_tol = 0.0;
  std::vector<double> ea;
  for (double eps : {1e-4, 1e-3, 1e-2}) {
    cfg.epsilon = eps;
    ea.push_back(grid100_errors(cfg).mean);
  }
  const double r1 = ea[1] / ea[0];
  const double r2 = ea[2] / ea[1];
  const bool ok = ea[0] <= ea[1] && ea[1] <= ea[2] && r1 >= 2 && r1 <= 50 && r2 >= 2 && r2 <= 50;
  return {ok, "full factor, E_a at eps 1e-4/1e-3/1e-2: " + fmt(ea[0]) + " / " + fmt(ea[1]) + " / " + fmt(ea[2]) +
                  ", ratios " + fmt(r1) + ", " + fmt(r2) + " (in [2, 50])"};
}

Outcome c6_scaling() {
  std::string detail;
  bool ok = true;
  for (Index side : {100, 317}) {
    const auto g = synthetic::grid(side, side);
    PipelineConfig cfg;
    PipelineReport rep;
    run_pipeline(g, sample_edge_queries(g, 1000, 2), cfg, &rep);
    g_sign.add(rep);
    const bool time_ok = side < 317 || rep.t_total < 300.0;
    ok = ok && rep.fill_ratio <= 20.0 && time_ok;
    detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(rep.n) + ": nnz(Z)/(n log2 n) " +
              fmt(rep.fill_ratio) + " (<= 20), " + fmt(rep.t_total) + " s";
  }
  return {ok, detail + " (< 300 s)"};
}

Outcome c7_jl() {
  const auto& c = grid100();
  // accuracy band at k = 200
  double lo = 1.0;
  double hi = 0.0;
  PipelineConfig jl;
  jl.method = Method::jl;
  jl.jl_k = 200;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    jl.seed = seed;
    const auto e = grid100_errors(jl).mean;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  // matched runtime: smallest doubling of k whose time reaches AINV's
  PipelineConfig ainv;
  double t_ainv = 1e300;
  ErrorStats e_ainv;
  for (int rep = 0; rep < 3; ++rep) {
    PipelineReport r;
    e_ainv = grid100_errors(ainv, &r);
    t_ainv = std::min(t_ainv, r.t_total);
  }
  Index k = 4;
  double t_jl = 0.0;
  double e_jl = 0.0;
  for (;; k *= 2) {
    jl.jl_k = k;
    t_jl = 1e300;
    e_jl = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      jl.seed = seed;
      PipelineReport r;
      e_jl += grid100_errors(jl, &r).mean / 3.0;
      t_jl = std::min(t_jl, r.t_total);
    }
    if (t_jl >= t_ainv || k >= c.g.num_nodes()) break;
  }
  const double ratio = e_jl / e_ainv.mean;
  const bool ok = lo >= 5e-3 && hi <= 0.1 && ratio >= 5.0;
  return {ok, "k=200 over 10 seeds: E_a in [" + fmt(lo) + ", " + fmt(hi) + "] (within [5e-3, 0.1]); matched budget " +
                  fmt(t_ainv) + " s -> k=" + std::to_string(k) + " (" + fmt(t_jl) + " s), E_a JL " + fmt(e_jl) +
                  " vs AINV " + fmt(e_ainv.mean) + ", ratio " + fmt(ratio) + " (>= 5)"};
}

struct PgCase {
  pg::Netlist net;
  pg::ReduceConfig cfg;
  pg::PartitionAssignment part;
  pg::Reduction verified;  // AINV reduction with Schur verification
  double t_ainv = 0.0;
  double t_exact = 0.0;
};

const PgCase& pg200() {
  static const PgCase c = [] {
    PgCase c;
    c.net = synthetic::power_grid(200, 200, 400, 20, 3);
    c.cfg.seed = 3;
    c.part = pg::partition_builtin(c.net, pg::default_block_count(c.net), c.cfg.seed);
    auto vcfg = c.cfg;
    vcfg.verify_injections = 5;
    c.verified = pg::reduce(c.net, c.part, vcfg);
    g_schur.add(c.verified);
    Stopwatch sw;
    const auto fast = pg::reduce(c.net, c.part, c.cfg);
    c.t_ainv = sw.seconds();
    auto same = fast.model;
    same.schur_check = c.verified.model.schur_check;  // the only field verification sets
    if (!(same == c.verified.model)) throw NumericalError("verification changed the reduced model");
    auto ecfg = c.cfg;
    ecfg.er.method = Method::exact;
    sw.reset();
    pg::reduce(c.net, c.part, ecfg);
    c.t_exact = sw.seconds();
    return c;
  }();
  return c;
}

Outcome c9_pg() {
  Stopwatch sw;
  const auto& c = pg200();
  const auto reduced = pg::to_netlist(c.verified.model, c.net);
  const auto acc = pg::accuracy_report(pg::port_voltages(c.net, pg::dc_solve(c.net)),
                                       pg::reduced_port_voltages(c.net, c.verified.model, reduced, pg::dc_solve(reduced)),
                                       pg::nominal_voltage(c.net));
  const double rel = acc.rel.value_or(1e300);
  const double speedup = c.t_exact / c.t_ainv;
  const double t = sw.seconds();
  return {rel <= 0.05 && speedup >= 3.0 && t < 300.0,
          "200x200 PG, " + std::to_string(acc.ports) + " ports, " + std::to_string(c.part.blocks) + " blocks: " +
              std::to_string(c.net.size()) + " -> " + std::to_string(reduced.size()) + " nodes, Rel " +
              fmt(100 * rel) + "% (<= 5%); reduce " + fmt(c.t_ainv) + " s AINV vs " + fmt(c.t_exact) +
              " s exact, speedup " + fmt(speedup) + " (>= 3); " + fmt(t) + " s (< 300 s)"};
}

Outcome c10_incremental() {
  const auto& c = pg200();
  const Index changed_count = std::max<Index>(1, c.part.blocks / 10);
  std::vector<Index> changed;
  auto net = c.net;
  for (Index k = 0; k < changed_count; ++k) {
    changed.push_back(k);
    net = modify_block(net, c.part, k);
  }
  auto vcfg = c.cfg;
  vcfg.verify_injections = 5;
  const auto prev = pg::reduce(c.net, c.part, c.cfg);
  Stopwatch sw;
  const auto scratch = pg::reduce(net, c.part, c.cfg);
  const double t_scratch = sw.seconds();
  double t_inc = 1e300;
  pg::Reduction inc;
  for (int rep = 0; rep < 2; ++rep) {
    sw.reset();
    inc = pg::reduce_incremental(prev, changed, net);
    t_inc = std::min(t_inc, sw.seconds());
  }
  g_schur.add(pg::reduce(net, c.part, vcfg));
  const bool equal = inc.model == scratch.model;
  const double frac = t_inc / t_scratch;
  return {equal && frac <= 0.25, std::to_string(changed_count) + " of " + std::to_string(c.part.blocks) +
                                     " blocks modified: bitwise equal " + (equal ? "yes" : "no") + ", " +
                                     fmt(t_inc) + " s vs " + fmt(t_scratch) + " s from scratch (" + fmt(100 * frac) +
                                     "%, <= 25%)"};
}

Outcome c8_schur() {
  // extra reductions with mixed block counts and ER methods
  const auto net = synthetic::power_grid(60, 60, 80, 10, 17);
  for (Index blocks : {1, 3, 8}) {
    for (auto method : {Method::ainv, Method::exact}) {
      pg::ReduceConfig cfg;
      cfg.blocks = blocks;
      cfg.er.method = method;
      cfg.verify_injections = 5;
      cfg.seed = static_cast<std::uint64_t>(blocks);
      g_schur.add(pg::reduce(net, cfg));
    }
  }
  return {g_schur.blocks > 0 && g_schur.worst <= 1e-8,
          std::to_string(g_schur.blocks) + " blocks verified with 5 injections each, worst relative mismatch " +
              fmt(g_schur.worst) + " (<= 1e-8)"};
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome c11_determinism() {
  const fs::path dir = fs::temp_directory_path() / "effres_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream g(dir / "g.mtx");
    io::write_matrix_market(g, synthetic::random_connected(3000, 6000, 21));
    std::ofstream p(dir / "pg.sp");
    pg::write_spice(p, synthetic::power_grid(50, 50, 100, 10, 8));
  }
  const std::string g = (dir / "g.mtx").string();
  const std::string pgf = (dir / "pg.sp").string();
  struct Command {
    std::string name;
    std::string args;                 // {out} expands to the output prefix
    std::vector<std::string> outputs;  // suffixes written under the prefix
  };
  const std::vector<Command> commands{
      {"effres", "effres -i " + g + " --all-edges --seed 5 -o {out}.r --report {out}.rep", {".r", ".rep"}},
      {"effres-exact", "effres -i " + g + " --sample 500 --method exact -o {out}.r", {".r"}},
      {"effres-diag", "effres -i " + g + " --sample 500 --diagnostics --drop-tol 0 -o {out}.r", {".r"}},
      {"sketch", "sketch -i " + g + " --sample 500 --k 64 --seed 9 -o {out}.r --report {out}.rep", {".r", ".rep"}},
      {"validate", "validate -i " + g + " --sample 1000 --seed 7 --report {out}.rep", {".rep"}},
      {"bench", "bench --grid 60x60 --sample 300 --report {out}.rep", {".rep"}},
      {"reduce",
       "reduce -i " + pgf + " --seed 4 --validate -o {out}.sp --provenance {out}.prov --write-partition {out}.part",
       {".sp", ".prov", ".part"}},
      {"reduce-merge", "reduce -i " + pgf + " --blocks 3 --merge-tau 0.05 --method exact -o {out}.sp", {".sp"}},
  };
  Index compared = 0;
  std::string mismatch;
  for (const auto& c : commands) {
    std::vector<std::string> prefixes;
    for (const char* run : {"t1a", "t1b", "t3"}) {
      const std::string prefix = (dir / (c.name + "." + run)).string();
      std::string args = c.args;
      for (auto pos = args.find("{out}"); pos != std::string::npos; pos = args.find("{out}")) {
        args.replace(pos, 5, prefix);
      }
      const std::string threads = std::string(run) == "t3" ? "3" : "1";
      const std::string cmd = std::string(EFFRES_CLI_PATH) + " " + args + " --threads " + threads + " > " + prefix +
                              ".stdout 2> " + prefix + ".stderr";
      if (std::system(cmd.c_str()) != 0) {
        mismatch += " " + c.name + "(exit)";
        break;
      }
      prefixes.push_back(prefix);
    }
    if (prefixes.size() != 3) continue;
    for (const auto& suffix : c.outputs) {
      const auto ref = slurp(prefixes[0] + suffix);
      if (ref.empty()) mismatch += " " + c.name + suffix + "(empty)";
      for (std::size_t k = 1; k < prefixes.size(); ++k) {
        ++compared;
        if (slurp(prefixes[k] + suffix) != ref) mismatch += " " + c.name + suffix;
      }
    }
  }
  fs::remove_all(dir);
  return {mismatch.empty(), std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
                                " file comparisons (repeat and threads 1 vs 3): " +
                                (mismatch.empty() ? std::string("all byte-identical") : "differ:" + mismatch)};
}

Outcome c2_sign() {
  // a few extra direct runs so the criterion also covers incomplete factors and weighted graphs
  for (int t = 0; t < 8; ++t) {
    const auto g = oracle::random_graph(200, 3000 + static_cast<std::uint64_t>(t), t % 4);
    auto lap = ground_laplacian(build_laplacian(g), default_ground_value(g));
    const auto o = compute_ordering(lap, OrderingMethod::amd);
    for (double drop : {0.0, 1e-3, 1e-2}) {
      const auto f = drop > 0 ? incomplete_cholesky(lap, o, drop) : full_cholesky(lap, o);
      for (double eps : {0.0, 1e-3, 1e-1}) g_sign.add(approximate_inverse(f, eps));
    }
  }
  return {g_sign.negatives == 0 && g_sign.runs > 0,
          std::to_string(g_sign.runs) + " approximate inverses built in this suite, " +
              std::to_string(g_sign.negatives) + " negative entries (must be 0)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1", c1_oracle},    {"C3", c3_certificate}, {"C4", c4_accuracy},    {"C5", c5_linear_trend},
      {"C6", c6_scaling},   {"C7", c7_jl},          {"C9", c9_pg},          {"C10", c10_incremental},
      {"C8", c8_schur},     {"C11", c11_determinism}, {"C2", c2_sign},
  };
  std::vector<std::pair<std::string, Outcome>> results;
  for (const auto& [id, fn] : criteria) {
    Stopwatch sw;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cerr << id << " done in " << fmt(sw.seconds()) << " s\n";
    results.emplace_back(id, o);
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return std::stoi(a.first.substr(1)) < std::stoi(b.first.substr(1));
  });
  int failed = 0;
  for (const auto& [id, o] : results) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << ": " << o.detail << '\n';
    failed += !o.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
