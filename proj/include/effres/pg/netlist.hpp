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
#include <unordered_map>
#include <vector>

//
// ... effres header files
//
#include <effres/common.hpp>

namespace effres::pg {

inline constexpr Index kGround = -1;

struct Resistor {
  std::string name;
  Index a = 0;
  Index b = 0;  // kGround for a resistor to ground
  double ohms = 0.0;

  double conductance() const { return 1.0 / ohms; }
  friend bool operator==(const Resistor&, const Resistor&) = default;
};

// Current `amps` flows from `from` through the source into `to`, i.e. it
// leaves node `from` and enters node `to`.
struct CurrentSource {
  std::string name;
  Index from = 0;
  Index to = kGround;
  double amps = 0.0;

  friend bool operator==(const CurrentSource&, const CurrentSource&) = default;
};

// Fixes v(node) = volts relative to ground.
struct VoltageSource {
  std::string name;
  Index node = 0;
  double volts = 0.0;

  friend bool operator==(const VoltageSource&, const VoltageSource&) = default;
};

// Resistive network with sources. Node indices are dense in [0, size());
// ground ("0") is not a node.
class Netlist {
 public:
  Index size() const { return static_cast<Index>(names_.size()); }
  const std::string& name(Index v) const { return names_[v]; }
  const std::vector<std::string>& names() const { return names_; }

  // Index of `name`, creating the node if needed. "0" maps to kGround.
  Index node(const std::string& name) {
    if (name == "0") return kGround;
    auto [it, inserted] = index_.try_emplace(name, size());
    if (inserted) names_.push_back(name);
    return it->second;
  }

  // -2 if unknown.
  Index find(const std::string& name) const {
    if (name == "0") return kGround;
    auto it = index_.find(name);
    return it == index_.end() ? -2 : it->second;
  }

  void add_resistor(std::string name, Index a, Index b, double ohms) {
    if (!(ohms > 0.0)) throw InputError("resistor " + name + " has nonpositive value");
    check_node(a);
    check_node(b);
    if (a == kGround && b == kGround) throw InputError("resistor " + name + " shorts ground");
    resistors.push_back({std::move(name), a, b, ohms});
  }
  void add_current_source(std::string name, Index from, Index to, double amps) {
    check_node(from);
    check_node(to);
    current_sources.push_back({std::move(name), from, to, amps});
  }
  void add_voltage_source(std::string name, Index node, double volts) {
    if (node == kGround) throw InputError("voltage source " + name + " has no non-ground node");
    check_node(node);
    voltage_sources.push_back({std::move(name), node, volts});
  }

  // Renumbers nodes by first appearance over resistors, then current
  // sources, then voltage sources (the order the writer emits).
  void canonicalize() {
    std::vector<Index> remap(names_.size(), -1);
    std::vector<std::string> names;
    auto visit = [&](Index& v) {
      if (v == kGround) return;
      if (remap[v] < 0) {
        remap[v] = static_cast<Index>(names.size());
        names.push_back(names_[v]);
      }
      v = remap[v];
    };
    for (auto& r : resistors) {
      visit(r.a);
      visit(r.b);
    }
    for (auto& s : current_sources) {
      visit(s.from);
      visit(s.to);
    }
    for (auto& s : voltage_sources) visit(s.node);
    names_ = std::move(names);
    index_.clear();
    for (Index v = 0; v < size(); ++v) index_.emplace(names_[v], v);
  }

  // True when v has a current or voltage source attached.
  std::vector<char> port_mask() const {
    std::vector<char> m(names_.size(), 0);
    for (const auto& s : current_sources) {
      if (s.from != kGround) m[s.from] = 1;
      if (s.to != kGround) m[s.to] = 1;
    }
    for (const auto& s : voltage_sources) m[s.node] = 1;
    return m;
  }

  friend bool operator==(const Netlist& a, const Netlist& b) {
    return a.names_ == b.names_ && a.resistors == b.resistors &&
           a.current_sources == b.current_sources && a.voltage_sources == b.voltage_sources;
  }

  std::vector<Resistor> resistors;
  std::vector<CurrentSource> current_sources;
  std::vector<VoltageSource> voltage_sources;

 private:
  void check_node(Index v) const {
    if (v != kGround && (v < 0 || v >= size())) throw InputError("node index out of range");
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

// Parses a SPICE value with an optional scale suffix (f p n u m k meg g t).
// Trailing unit letters after the suffix are ignored, as in SPICE.
inline double parse_spice_value(const std::string& token) {
  std::size_t pos = 0;
  while (pos < token.size() &&
         (std::isdigit(static_cast<unsigned char>(token[pos])) || token[pos] == '.' ||
          token[pos] == '-' || token[pos] == '+' ||
          ((token[pos] == 'e' || token[pos] == 'E') && pos + 1 < token.size() &&
           (std::isdigit(static_cast<unsigned char>(token[pos + 1])) || token[pos + 1] == '-' ||
            token[pos + 1] == '+')))) {
    ++pos;
  }
  const double base = parse_double(token.substr(0, pos));
  std::string suffix;
  for (std::size_t k = pos; k < token.size(); ++k) {
    suffix.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(token[k]))));
  }
  if (suffix.empty()) return base;
  if (!std::all_of(suffix.begin(), suffix.end(), [](unsigned char c) { return std::isalpha(c); })) {
    throw InputError("bad value '" + token + "'");
  }
  if (suffix.rfind("meg", 0) == 0) return base * 1e6;
  switch (suffix[0]) {
    case 'f': return base * 1e-15;
    case 'p': return base * 1e-12;
    case 'n': return base * 1e-9;
    case 'u': return base * 1e-6;
    case 'm': return base * 1e-3;
    case 'k': return base * 1e3;
    case 'g': return base * 1e9;
    case 't': return base * 1e12;
    default: return base;  // unit only, e.g. "5ohm"
  }
}

// SPICE subset: R/I/V elements (case-insensitive letter), '*' comments,
// other dot-commands ignored, '.end' terminates. Node "0" is ground.
inline Netlist parse_spice(std::istream& in) {
  Netlist net;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '*') continue;
    if (tok[0][0] == '.') {
      std::string cmd = tok[0];
      std::transform(cmd.begin(), cmd.end(), cmd.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (cmd == ".end") break;
      continue;
    }
    auto fail = [&](const std::string& why) {
      throw InputError("line " + std::to_string(lineno) + ": " + why);
    };
    if (tok.size() < 4) fail("expected '<name> <node> <node> <value>'");
    double value = 0.0;
    try {
      value = parse_spice_value(tok[3]);
    } catch (const InputError& e) {
      fail(e.what());
    }
    const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0][0])));
    const Index a = net.node(tok[1]);
    const Index b = net.node(tok[2]);
    try {
      switch (kind) {
        case 'R':
          net.add_resistor(tok[0], a, b, value);
          break;
        case 'I':
          net.add_current_source(tok[0], a, b, value);
          break;
        case 'V':
          if (a != kGround && b != kGround) fail("voltage source must connect to ground");
          if (a != kGround) {
            net.add_voltage_source(tok[0], a, value);
          } else {
            net.add_voltage_source(tok[0], b, -value);
          }
          break;
        default:
          fail("unsupported element '" + tok[0] + "'");
      }
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      fail(e.what());
    }
  }
  net.canonicalize();
  return net;
}

inline Netlist read_spice(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_spice(in);
}

inline void write_spice(std::ostream& out, const Netlist& net) {
  auto nm = [&](Index v) { return v == kGround ? std::string("0") : net.name(v); };
  for (const auto& r : net.resistors) {
    out << r.name << ' ' << nm(r.a) << ' ' << nm(r.b) << ' ' << format_double(r.ohms) << '\n';
  }
  for (const auto& s : net.current_sources) {
    out << s.name << ' ' << nm(s.from) << ' ' << nm(s.to) << ' ' << format_double(s.amps) << '\n';
  }
  for (const auto& s : net.voltage_sources) {
    out << s.name << ' ' << nm(s.node) << " 0 " << format_double(s.volts) << '\n';
  }
  out << ".end\n";
}

}  // namespace effres::pg
