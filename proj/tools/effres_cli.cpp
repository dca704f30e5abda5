//
// ... Standard header files
//
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

//
// ... Vendored header files
//
#include <CLI11.hpp>

//
// ... effres header files
//
#include <effres/effres.hpp>

namespace {

using namespace effres;

// Options shared by the effective-resistance commands.
struct GraphOptions {
  std::string input;
  std::string format;
  bool one_indexed = false;
  std::string grid;  // "RxC" synthetic grid instead of --input
};

struct EngineOptions {
  std::string method = "ainv";
  double epsilon = 1e-3;
  double drop_tol = 1e-3;
  bool no_compensate = false;
  std::string ordering = "amd";
  std::optional<double> ground;
  double ground_relative = 0.1;
  std::string ground_policy = "deterministic";
  Index jl_k = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  bool diagnostics = false;
};

void add_graph_options(CLI::App* cmd, GraphOptions& g, bool allow_grid) {
  cmd->add_option("-i,--input", g.input, "graph file (edge list, Matrix Market or SPICE)");
  cmd->add_option("--format", g.format, "edgelist | matrixmarket | spice (default: by extension)");
  cmd->add_flag("--one-indexed", g.one_indexed, "edge list / query indices start at 1");
  if (allow_grid) cmd->add_option("--grid", g.grid, "synthetic RxC unit grid instead of --input");
}

void add_engine_options(CLI::App* cmd, EngineOptions& e, bool method_option) {
  if (method_option) {
    cmd->add_option("--method", e.method, "ainv | exact | jl")->check(CLI::IsMember({"ainv", "exact", "jl"}));
  }
  cmd->add_option("--epsilon", e.epsilon, "column truncation budget")->check(CLI::NonNegativeNumber);
  cmd->add_option("--drop-tol", e.drop_tol, "incomplete Cholesky drop tolerance (0: exact factor)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--no-compensate", e.no_compensate, "do not add dropped magnitude to the pivot");
  cmd->add_option("--ordering", e.ordering, "amd | rcm | natural");
  cmd->add_option("--ground", e.ground, "absolute grounding conductance");
  cmd->add_option("--ground-relative", e.ground_relative, "grounding conductance relative to mean weight")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ground-policy", e.ground_policy, "deterministic | seeded")
      ->check(CLI::IsMember({"deterministic", "seeded"}));
  cmd->add_option("--jl-k,--k", e.jl_k, "rows of the random projection")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", e.seed, "random seed")->envname("EFFRES_SEED");
  cmd->add_option("--threads", e.threads, "worker threads")->envname("EFFRES_THREADS")->check(CLI::PositiveNumber);
  cmd->add_flag("--diagnostics", e.diagnostics, "append the alpha-surrogate bound to ainv results");
}

PipelineConfig pipeline_config(const EngineOptions& e) {
  PipelineConfig c;
  c.method = method_from_string(e.method);
  c.epsilon = e.epsilon;
  c.drop_tol = e.drop_tol;
  c.compensate = !e.no_compensate;
  c.ordering = ordering_from_string(e.ordering);
  c.ground_value = e.ground;
  c.ground_relative = e.ground_relative;
  c.ground_policy = e.ground_policy == "seeded" ? GroundPolicy::seeded : GroundPolicy::deterministic;
  c.jl_k = e.jl_k;
  c.seed = e.seed;
  c.threads = e.threads;
  c.diagnostics = e.diagnostics;
  return c;
}

WeightedGraph load_graph(const GraphOptions& g) {
  if (!g.grid.empty()) {
    const auto x = g.grid.find('x');
    if (x == std::string::npos) throw InputError("--grid expects RxC, got '" + g.grid + "'");
    return synthetic::grid(parse_index(g.grid.substr(0, x)), parse_index(g.grid.substr(x + 1)));
  }
  if (g.input.empty()) throw InputError("no input graph (use --input)");
  const auto fmt = g.format.empty() ? io::format_from_path(g.input) : io::format_from_string(g.format);
  return io::read_graph(g.input, fmt, g.one_indexed);
}

void pipeline_report(io::Report& r, const PipelineConfig& c, const PipelineReport& p) {
  r.add("method", to_string(c.method));
  r.add("n", p.n);
  r.add("m", p.m);
  r.add("queries", p.queries);
  r.add("epsilon", c.epsilon);
  r.add("drop_tol", c.drop_tol);
  r.add("compensate", c.compensate);
  r.add("ordering", to_string(c.ordering));
  r.add("seed", c.seed);
  if (c.method == Method::jl) r.add("jl_k", c.jl_k);
  r.add("nnz_factor", p.nnz_factor);
  r.add("nnz_inverse", p.nnz_inverse);
  r.add("fill_ratio", p.fill_ratio);
  r.add("max_depth", p.max_depth);
  r.add("dropped", p.dropped);
}

void timing_report(io::Report& r, const PipelineReport& p) {
  r.add("t_ground", p.t_ground);
  r.add("t_order", p.t_order);
  r.add("t_factor", p.t_factor);
  r.add("t_inverse", p.t_inverse);
  r.add("t_query", p.t_query);
  r.add("t_total", p.t_total);
}

void write_report_file(const std::string& path, const io::Report& r) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  r.write(out);
}

// ---- effres / sketch ------------------------------------------------------

struct QueryOptions {
  std::string queries;
  bool all_edges = false;
  Index sample = 0;
  std::string output;
  std::string report;
};

void add_query_options(CLI::App* cmd, QueryOptions& q) {
  cmd->add_option("-q,--queries", q.queries, "file of 'p q' pairs");
  cmd->add_flag("--all-edges", q.all_edges, "query every edge");
  cmd->add_option("--sample", q.sample, "query a seeded sample of edges");
  cmd->add_option("-o,--output", q.output, "result file ('p q R' per line, default stdout)");
  cmd->add_option("--report", q.report, "key=value report file (deterministic fields only)");
}

QuerySet collect_queries(const QueryOptions& q, const WeightedGraph& g, bool one_indexed, std::uint64_t seed) {
  const int modes = (q.queries.empty() ? 0 : 1) + (q.all_edges ? 1 : 0) + (q.sample > 0 ? 1 : 0);
  if (modes != 1) throw InputError("choose exactly one of --queries, --all-edges, --sample");
  if (q.all_edges) return edge_queries(g);
  if (q.sample > 0) return sample_edge_queries(g, q.sample, seed);
  std::ifstream in(q.queries);
  if (!in) throw InputError("cannot open " + q.queries);
  return io::read_queries(in, one_indexed);
}

int run_effres(const GraphOptions& go, const EngineOptions& eo, const QueryOptions& qo) {
  const auto g = load_graph(go);
  const auto cfg = pipeline_config(eo);
  const auto queries = collect_queries(qo, g, go.one_indexed, cfg.seed);
  PipelineReport rep;
  const auto results = run_pipeline(g, queries, cfg, &rep);
  if (qo.output.empty()) {
    io::write_results(std::cout, results);
  } else {
    std::ofstream out(qo.output);
    if (!out) throw InputError("cannot write " + qo.output);
    io::write_results(out, results);
    if (cfg.diagnostics) {
      std::ofstream diag(qo.output + ".bound");
      for (const auto& r : results) diag << r.p << ' ' << r.q << ' ' << format_double(r.bound.value_or(0.0)) << '\n';
    }
  }
  io::Report r;
  pipeline_report(r, cfg, rep);
  write_report_file(qo.report, r);
  io::Report t;
  timing_report(t, rep);
  if (!qo.output.empty()) {
    r.write(std::cerr);
    t.write(std::cerr);
  }
  return 0;
}

// ---- validate ---------------------------------------------------------------

struct ValidateOptions {
  Index sample = 1000;
  std::string report;
};

ErrorStats validate(const WeightedGraph& g, const PipelineConfig& cfg, Index sample, PipelineReport* approx_rep,
                    PipelineReport* exact_rep) {
  const auto queries = sample_edge_queries(g, sample, cfg.seed);
  const auto approx = run_pipeline(g, queries, cfg, approx_rep);
  auto exact_cfg = cfg;
  exact_cfg.method = Method::exact;
  const auto exact = run_pipeline(g, queries, exact_cfg, exact_rep);
  return relative_errors(approx, exact);
}

int run_validate(const GraphOptions& go, const EngineOptions& eo, const ValidateOptions& vo) {
  const auto g = load_graph(go);
  const auto cfg = pipeline_config(eo);
  PipelineReport rep;
  PipelineReport exact_rep;
  const auto stats = validate(g, cfg, vo.sample, &rep, &exact_rep);
  io::Report r;
  pipeline_report(r, cfg, rep);
  r.add("sample", stats.count);
  r.add("E_a", stats.mean);
  r.add("E_m", stats.max);
  r.write(std::cout);
  write_report_file(vo.report, r);
  return 0;
}

// ---- bench ------------------------------------------------------------------

int run_bench(const GraphOptions& go, const EngineOptions& eo, const ValidateOptions& vo) {
  const auto g = load_graph(go);
  const auto cfg = pipeline_config(eo);
  PipelineReport rep;
  PipelineReport exact_rep;
  const auto stats = validate(g, cfg, vo.sample, &rep, &exact_rep);

  const double nlogn = g.num_nodes() > 1 ? static_cast<double>(g.num_nodes()) *
                                               std::log2(static_cast<double>(g.num_nodes()))
                                         : 1.0;
  std::cout << "stage        seconds\n";
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "ground     " << std::setw(10) << rep.t_ground << '\n';
  std::cout << "order      " << std::setw(10) << rep.t_order << '\n';
  std::cout << "factor     " << std::setw(10) << rep.t_factor << '\n';
  std::cout << "inverse    " << std::setw(10) << rep.t_inverse << '\n';
  std::cout << "query      " << std::setw(10) << rep.t_query << '\n';
  std::cout << "total      " << std::setw(10) << rep.t_total << '\n';
  std::cout << std::defaultfloat << std::setprecision(4);
  std::cout << "n=" << rep.n << " m=" << rep.m << "  nnz(L)/nlogn=" << static_cast<double>(rep.nnz_factor) / nlogn
            << "  nnz(Z)/nlogn=" << rep.fill_ratio << "  depth=" << rep.max_depth << "  E_a=" << stats.mean
            << "  E_m=" << stats.max << "\n";
  std::cout << std::setprecision(6);

  io::Report r;
  pipeline_report(r, cfg, rep);
  r.add("nnz_factor_ratio", static_cast<double>(rep.nnz_factor) / nlogn);
  r.add("sample", stats.count);
  r.add("E_a", stats.mean);
  r.add("E_m", stats.max);
  r.write(std::cout);
  io::Report t;
  timing_report(t, rep);
  t.add("t_exact_total", exact_rep.t_total);
  t.write(std::cout);
  write_report_file(vo.report, r);
  return 0;
}

// ---- reduce -----------------------------------------------------------------

struct ReduceOptions {
  std::string input;
  std::string output;
  std::string partition;
  std::string write_partition;
  std::string provenance;
  Index blocks = 0;
  double merge_tau = 0.0;
  double sample_fraction = 0.65;
  bool validate = false;
};

int run_reduce(const ReduceOptions& ro, const EngineOptions& eo) {
  if (ro.input.empty()) throw InputError("no input netlist (use --input)");
  const auto net = pg::read_spice(ro.input);
  pg::ReduceConfig cfg;
  cfg.blocks = ro.blocks;
  cfg.er = pipeline_config(eo);
  cfg.er.threads = 1;
  cfg.merge_tau = ro.merge_tau;
  cfg.sample_fraction = ro.sample_fraction;
  cfg.seed = eo.seed;
  cfg.threads = eo.threads;

  Stopwatch sw;
  const auto part = ro.partition.empty()
                        ? pg::partition_builtin(net, cfg.blocks > 0 ? cfg.blocks : pg::default_block_count(net),
                                                cfg.seed)
                        : pg::read_partition(ro.partition, net);
  const auto red = pg::reduce(net, part, cfg);
  const double t_reduce = sw.seconds();
  const auto reduced = pg::to_netlist(red.model, net);

  if (!ro.write_partition.empty()) {
    std::ofstream out(ro.write_partition);
    if (!out) throw InputError("cannot write " + ro.write_partition);
    pg::write_partition(out, part, net);
  }
  if (ro.output.empty()) {
    pg::write_spice(std::cout, reduced);
  } else {
    std::ofstream out(ro.output);
    if (!out) throw InputError("cannot write " + ro.output);
    pg::write_spice(out, reduced);
  }

  const auto ports = net.port_mask();
  io::Report r;
  r.add("input", ro.input);
  r.add("nodes_original", net.size());
  r.add("resistors_original", static_cast<Index>(net.resistors.size()));
  r.add("ports", static_cast<Index>(std::count(ports.begin(), ports.end(), 1)));
  r.add("blocks", part.blocks);
  r.add("partition", ro.partition.empty() ? std::string("builtin") : ro.partition);
  r.add("er_method", to_string(cfg.er.method));
  r.add("epsilon", cfg.er.epsilon);
  r.add("drop_tol", cfg.er.drop_tol);
  r.add("merge_tau", cfg.merge_tau);
  r.add("sample_fraction", cfg.sample_fraction);
  r.add("seed", cfg.seed);
  r.add("nodes_reduced", static_cast<Index>(red.model.nodes.size()));
  r.add("edges_reduced", static_cast<Index>(red.model.edges.size()));
  r.add("shunts_reduced", static_cast<Index>(red.model.shunts.size()));
  r.add("eliminated", red.model.eliminated);
  r.add("merged", red.model.merged);
  r.add("edges_before_sparsify", red.model.edges_before);
  r.add("samples", red.model.sampled);
  if (ro.validate) {
    const auto v0 = pg::dc_solve(net);
    const auto v1 = pg::dc_solve(reduced);
    const auto acc = pg::accuracy_report(pg::port_voltages(net, v0),
                                         pg::reduced_port_voltages(net, red.model, reduced, v1),
                                         pg::nominal_voltage(net));
    r.add("err_volts", acc.err);
    r.add("max_drop_volts", acc.max_drop);
    r.add("rel", acc.rel ? format_double(*acc.rel) : std::string("undefined"));
  }
  if (!ro.provenance.empty()) write_report_file(ro.provenance, r);
  r.write(std::cerr);
  std::cerr << "t_reduce=" << format_double(t_reduce) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective resistances via a sparse approximate inverse, and power-grid reduction"};
  app.require_subcommand(1);

  GraphOptions go;
  EngineOptions eo;
  QueryOptions qo;
  ValidateOptions vo;
  ReduceOptions ro;

  auto* effres_cmd = app.add_subcommand("effres", "effective resistances for query pairs");
  add_graph_options(effres_cmd, go, true);
  add_engine_options(effres_cmd, eo, true);
  add_query_options(effres_cmd, qo);

  auto* sketch_cmd = app.add_subcommand("sketch", "effective resistances from a random projection");
  add_graph_options(sketch_cmd, go, true);
  add_engine_options(sketch_cmd, eo, false);
  add_query_options(sketch_cmd, qo);

  auto* validate_cmd = app.add_subcommand("validate", "errors against exact resistances on sampled edges");
  add_graph_options(validate_cmd, go, true);
  add_engine_options(validate_cmd, eo, true);
  validate_cmd->add_option("--sample", vo.sample, "number of sampled edges")->check(CLI::PositiveNumber);
  validate_cmd->add_option("--report", vo.report, "key=value report file");

  auto* bench_cmd = app.add_subcommand("bench", "stage timings, fill and accuracy");
  add_graph_options(bench_cmd, go, true);
  add_engine_options(bench_cmd, eo, true);
  bench_cmd->add_option("--sample", vo.sample, "number of sampled edges")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--report", vo.report, "key=value report file (deterministic fields only)");

  auto* reduce_cmd = app.add_subcommand("reduce", "reduce a SPICE power grid");
  reduce_cmd->add_option("-i,--input", ro.input, "SPICE netlist")->required();
  reduce_cmd->add_option("-o,--output", ro.output, "reduced netlist (default stdout)");
  reduce_cmd->add_option("--partition", ro.partition, "partition file ('node block' per line)");
  reduce_cmd->add_option("--write-partition", ro.write_partition, "write the partition used");
  reduce_cmd->add_option("--provenance", ro.provenance, "key=value provenance sidecar");
  reduce_cmd->add_option("--blocks", ro.blocks, "block count (default #ports/50)");
  reduce_cmd->add_option("--merge-tau", ro.merge_tau, "port merge threshold (0: off)")->check(CLI::NonNegativeNumber);
  reduce_cmd->add_option("--sample-fraction", ro.sample_fraction, "samples per pre-sparsification edge")
      ->check(CLI::PositiveNumber);
  reduce_cmd->add_flag("--validate", ro.validate, "compare DC port voltages with the original");
  add_engine_options(reduce_cmd, eo, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*effres_cmd) return run_effres(go, eo, qo);
    if (*sketch_cmd) {
      eo.method = "jl";
      return run_effres(go, eo, qo);
    }
    if (*validate_cmd) return run_validate(go, eo, vo);
    if (*bench_cmd) return run_bench(go, eo, vo);
    if (*reduce_cmd) return run_reduce(ro, eo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
