#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

//
// ... effres header files
//
#include <effres/approx_inverse.hpp>
#include <effres/cholesky.hpp>
#include <effres/graph.hpp>
#include <effres/resistance.hpp>
#include <effres/pg/netlist.hpp>

namespace effres::io {

enum class GraphFormat { edgelist, matrixmarket, spice };

inline GraphFormat format_from_string(const std::string& s) {
  if (s == "edgelist" || s == "edges") return GraphFormat::edgelist;
  if (s == "matrixmarket" || s == "mtx") return GraphFormat::matrixmarket;
  if (s == "spice") return GraphFormat::spice;
  throw InputError("unknown graph format '" + s + "'");
}

// By extension: .mtx, .sp/.spi/.cir/.spice, anything else is an edge list.
inline GraphFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == "mtx") return GraphFormat::matrixmarket;
  if (ext == "sp" || ext == "spi" || ext == "cir" || ext == "spice") return GraphFormat::spice;
  return GraphFormat::edgelist;
}

namespace detail {

inline std::string at_line(Index lineno, const std::string& what) {
  return "line " + std::to_string(lineno) + ": " + what;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

}  // namespace detail

// "u v w" per line; '#' and '%' start comments. A "# nodes N" comment fixes
// the node count, otherwise it is one past the largest index. With
// one_indexed every index is shifted down by one.
inline WeightedGraph read_edgelist(std::istream& in, bool one_indexed = false, LoadStats* stats = nullptr) {
  std::vector<Edge> edges;
  Index n = -1;
  Index max_index = -1;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string a;
    if (!(ss >> a)) continue;
    if (a[0] == '#' || a[0] == '%') {
      std::string key;
      std::string value;
      if (a.size() == 1 && ss >> key >> value && key == "nodes") {
        try {
          n = parse_index(value);
        } catch (const InputError& e) {
          throw InputError(detail::at_line(lineno, e.what()));
        }
      }
      continue;
    }
    std::string b;
    std::string w;
    std::string extra;
    if (!(ss >> b >> w) || (ss >> extra)) throw InputError(detail::at_line(lineno, "expected 'u v w'"));
    Edge e;
    try {
      e.u = parse_index(a);
      e.v = parse_index(b);
      e.w = parse_double(w);
    } catch (const InputError& err) {
      throw InputError(detail::at_line(lineno, err.what()));
    }
    if (one_indexed) {
      --e.u;
      --e.v;
    }
    if (e.u < 0 || e.v < 0) throw InputError(detail::at_line(lineno, "negative node index"));
    if (!(e.w > 0.0)) throw InputError(detail::at_line(lineno, "nonpositive weight"));
    max_index = std::max({max_index, e.u, e.v});
    edges.push_back(e);
  }
  if (n < 0) n = max_index + 1;
  if (max_index >= n) throw InputError("edge index exceeds the declared node count");
  return make_graph(n, std::move(edges), stats);
}

inline void write_edgelist(std::ostream& out, const WeightedGraph& g) {
  out << "# nodes " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << format_double(e.w) << '\n';
}

// Symmetric coordinate Matrix Market (real, integer or pattern). Off-diagonal
// magnitudes become edge weights, diagonal and zero entries are ignored.
inline WeightedGraph read_matrix_market(std::istream& in, LoadStats* stats = nullptr) {
  std::string line;
  Index lineno = 0;
  if (!std::getline(in, line)) throw InputError("empty Matrix Market file");
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, layout, field, symmetry;
  hs >> banner >> object >> layout >> field >> symmetry;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  };
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(layout) != "coordinate") {
    throw InputError(detail::at_line(1, "expected a '%%MatrixMarket matrix coordinate' header"));
  }
  field = lower(field);
  if (field != "real" && field != "integer" && field != "pattern") {
    throw InputError(detail::at_line(1, "unsupported field '" + field + "'"));
  }
  if (lower(symmetry) != "symmetric") throw InputError(detail::at_line(1, "only symmetric matrices are accepted"));
  const bool pattern = field == "pattern";

  Index rows = -1;
  Index cols = -1;
  Index entries = -1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string a;
    if (!(ss >> a) || a[0] == '%') continue;
    std::string b;
    std::string c;
    if (!(ss >> b >> c)) throw InputError(detail::at_line(lineno, "expected 'rows cols entries'"));
    try {
      rows = parse_index(a);
      cols = parse_index(b);
      entries = parse_index(c);
    } catch (const InputError& e) {
      throw InputError(detail::at_line(lineno, e.what()));
    }
    break;
  }
  if (rows < 0) throw InputError("missing Matrix Market size line");
  if (rows != cols) throw InputError(detail::at_line(lineno, "matrix is not square"));

  std::vector<Edge> edges;
  Index seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string a;
    if (!(ss >> a) || a[0] == '%') continue;
    std::string b;
    std::string v;
    if (!(ss >> b)) throw InputError(detail::at_line(lineno, "expected 'i j value'"));
    if (!pattern && !(ss >> v)) throw InputError(detail::at_line(lineno, "missing value"));
    Index i = 0;
    Index j = 0;
    double x = 1.0;
    try {
      i = parse_index(a) - 1;
      j = parse_index(b) - 1;
      if (!pattern) x = parse_double(v);
    } catch (const InputError& e) {
      throw InputError(detail::at_line(lineno, e.what()));
    }
    if (i < 0 || j < 0 || i >= rows || j >= rows) throw InputError(detail::at_line(lineno, "index out of range"));
    ++seen;
    if (i == j || x == 0.0) continue;
    edges.push_back({i, j, std::abs(x)});
  }
  if (seen != entries) {
    throw InputError("Matrix Market declares " + std::to_string(entries) + " entries, found " +
                     std::to_string(seen));
  }
  return make_graph(rows, std::move(edges), stats);
}

// Laplacian off-diagonals, lower triangle, column-major order.
inline void write_matrix_market(std::ostream& out, const WeightedGraph& g) {
  std::vector<Edge> e(g.edges().begin(), g.edges().end());
  std::sort(e.begin(), e.end(), [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << g.num_nodes() << ' ' << g.num_nodes() << ' ' << e.size() << '\n';
  for (const auto& x : e) out << x.v + 1 << ' ' << x.u + 1 << ' ' << format_double(-x.w) << '\n';
}

// Resistor network between non-ground nodes; resistors to ground are skipped.
inline WeightedGraph netlist_graph(const pg::Netlist& net) {
  std::vector<Edge> edges;
  for (const auto& r : net.resistors) {
    if (r.a != pg::kGround && r.b != pg::kGround) edges.push_back({r.a, r.b, r.conductance()});
  }
  return make_graph(net.size(), std::move(edges));
}

inline WeightedGraph read_graph(const std::string& path, GraphFormat format, bool one_indexed = false,
                                LoadStats* stats = nullptr) {
  auto in = detail::open_in(path);
  switch (format) {
    case GraphFormat::edgelist: return read_edgelist(in, one_indexed, stats);
    case GraphFormat::matrixmarket: return read_matrix_market(in, stats);
    case GraphFormat::spice: return netlist_graph(pg::parse_spice(in));
  }
  throw InputError("unknown graph format");
}

inline void write_graph(const std::string& path, const WeightedGraph& g, GraphFormat format) {
  auto out = detail::open_out(path);
  switch (format) {
    case GraphFormat::edgelist: write_edgelist(out, g); break;
    case GraphFormat::matrixmarket: write_matrix_market(out, g); break;
    case GraphFormat::spice: throw InputError("graphs are not written as SPICE");
  }
}

// "p q R" lines, round-trip exact.
inline void write_results(std::ostream& out, const std::vector<ResistanceResult>& results) {
  for (const auto& r : results) out << r.p << ' ' << r.q << ' ' << format_double(r.value) << '\n';
}

inline std::vector<ResistanceResult> read_results(std::istream& in, Method method) {
  std::vector<ResistanceResult> out;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string p, q, v;
    if (!(ss >> p) || p[0] == '#') continue;
    if (!(ss >> q >> v)) throw InputError(detail::at_line(lineno, "expected 'p q R'"));
    try {
      out.push_back({parse_index(p), parse_index(q), parse_double(v), method, std::nullopt});
    } catch (const InputError& e) {
      throw InputError(detail::at_line(lineno, e.what()));
    }
  }
  return out;
}

// Query pairs "p q" per line.
inline QuerySet read_queries(std::istream& in, bool one_indexed = false) {
  QuerySet out;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string p, q;
    if (!(ss >> p) || p[0] == '#' || p[0] == '%') continue;
    if (!(ss >> q)) throw InputError(detail::at_line(lineno, "expected 'p q'"));
    try {
      Query x{parse_index(p), parse_index(q)};
      if (one_indexed) {
        --x.p;
        --x.q;
      }
      out.push_back(x);
    } catch (const InputError& e) {
      throw InputError(detail::at_line(lineno, e.what()));
    }
  }
  return out;
}

// Triplet dumps "i j value" in factor positions.
inline void write_factor(std::ostream& out, const SparseCholeskyFactor& f) {
  for (Index j = 0; j < f.n; ++j) {
    for (Index p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) {
      out << f.row_idx[p] << ' ' << j << ' ' << format_double(f.values[p]) << '\n';
    }
  }
}

inline void write_inverse(std::ostream& out, const ApproxInverse& z) {
  for (Index j = 0; j < z.n; ++j) {
    for (Index p = z.col_ptr[j]; p < z.col_ptr[j + 1]; ++p) {
      out << z.row_idx[p] << ' ' << j << ' ' << format_double(z.values[p]) << '\n';
    }
  }
}

// Flat key=value report.
class Report {
 public:
  void add(std::string key, std::string value) { items_.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), format_double(value)); }
  void add(std::string key, Index value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, int value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, std::uint64_t value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, bool value) { add(std::move(key), std::string(value ? "true" : "false")); }
  void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : items_) out << k << '=' << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

}  // namespace effres::io
