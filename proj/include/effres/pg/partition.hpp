#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

//
// ... effres header files
//
#include <effres/graph.hpp>
#include <effres/pg/netlist.hpp>

namespace effres::pg {

struct PartitionAssignment {
  std::vector<Index> block;  // per node
  Index blocks = 0;

  friend bool operator==(const PartitionAssignment&, const PartitionAssignment&) = default;
};

enum class NodeClass { port, interface, interior };

// Resistor connectivity between non-ground nodes.
inline Adjacency resistor_adjacency(const Netlist& net) {
  std::vector<Edge> edges;
  for (const auto& r : net.resistors) {
    if (r.a != kGround && r.b != kGround && r.a != r.b) edges.push_back({r.a, r.b, 1.0});
  }
  return adjacency(make_graph(net.size(), std::move(edges)));
}

namespace detail {

// Hop distances from a set of sources (-1 where unreachable).
inline std::vector<Index> bfs_distance(const Adjacency& adj, const std::vector<Index>& sources) {
  std::vector<Index> dist(adj.ptr.size() - 1, -1);
  std::deque<Index> queue;
  for (Index s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    for (Index p = adj.ptr[v]; p < adj.ptr[v + 1]; ++p) {
      const Index u = adj.nbr[p];
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

}  // namespace detail

// Region growing from spread seeds. The first seed is the node farthest from
// a seeded random start; each further seed maximizes the hop distance to the
// seeds chosen so far. Regions then grow breadth-first, the smallest region
// with a nonempty frontier taking the next node, each capped at ceil(n/blocks).
inline PartitionAssignment partition_builtin(const Netlist& net, Index blocks, std::uint64_t seed) {
  if (blocks < 1) throw InputError("block count must be at least 1");
  const Index n = net.size();
  PartitionAssignment part;
  part.block.assign(static_cast<std::size_t>(n), blocks == 1 ? 0 : -1);
  part.blocks = blocks;
  if (blocks == 1 || n == 0) return part;
  if (blocks > n) throw InputError("more blocks than nodes");

  const auto adj = resistor_adjacency(net);
  Rng rng(seed, 0x7061727469ULL);
  const auto start = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));

  std::vector<Index> seeds;
  auto farthest = [&](const std::vector<Index>& dist) {
    Index best = -1;
    for (Index v = 0; v < n; ++v) {
      if (std::find(seeds.begin(), seeds.end(), v) != seeds.end()) continue;
      // unreachable nodes count as infinitely far
      const Index d = dist[v] < 0 ? std::numeric_limits<Index>::max() : dist[v];
      const Index bd = best < 0 ? -1 : (dist[best] < 0 ? std::numeric_limits<Index>::max() : dist[best]);
      if (d > bd) best = v;
    }
    return best;
  };
  seeds.push_back(farthest(detail::bfs_distance(adj, {start})));
  while (static_cast<Index>(seeds.size()) < blocks) seeds.push_back(farthest(detail::bfs_distance(adj, seeds)));

  const Index cap = (n + blocks - 1) / blocks;
  std::vector<Index> size(static_cast<std::size_t>(blocks), 0);
  std::vector<std::deque<Index>> frontier(static_cast<std::size_t>(blocks));
  auto assign = [&](Index v, Index b) {
    part.block[v] = b;
    ++size[b];
    for (Index p = adj.ptr[v]; p < adj.ptr[v + 1]; ++p) {
      if (part.block[adj.nbr[p]] < 0) frontier[b].push_back(adj.nbr[p]);
    }
  };
  for (Index b = 0; b < blocks; ++b) assign(seeds[b], b);

  for (;;) {
    Index pick = -1;
    for (Index b = 0; b < blocks; ++b) {
      while (!frontier[b].empty() && part.block[frontier[b].front()] >= 0) frontier[b].pop_front();
      if (frontier[b].empty() || size[b] >= cap) continue;
      if (pick < 0 || size[b] < size[pick]) pick = b;
    }
    if (pick < 0) break;
    const Index v = frontier[pick].front();
    frontier[pick].pop_front();
    assign(v, pick);
  }

  // Leftovers (trapped pockets or other components) join the smallest
  // adjacent region, or the smallest region overall when isolated.
  bool changed = true;
  while (changed) {
    changed = false;
    for (Index v = 0; v < n; ++v) {
      if (part.block[v] >= 0) continue;
      Index best = -1;
      for (Index p = adj.ptr[v]; p < adj.ptr[v + 1]; ++p) {
        const Index b = part.block[adj.nbr[p]];
        if (b >= 0 && (best < 0 || size[b] < size[best] || (size[b] == size[best] && b < best))) best = b;
      }
      if (best >= 0) {
        part.block[v] = best;
        ++size[best];
        changed = true;
      }
    }
  }
  for (Index v = 0; v < n; ++v) {
    if (part.block[v] >= 0) continue;
    const auto b = static_cast<Index>(std::min_element(size.begin(), size.end()) - size.begin());
    // grow the whole stray component into b
    for (Index u : std::vector<Index>{v}) {
      std::vector<Index> stack{u};
      part.block[u] = b;
      ++size[b];
      while (!stack.empty()) {
        const Index x = stack.back();
        stack.pop_back();
        for (Index p = adj.ptr[x]; p < adj.ptr[x + 1]; ++p) {
          const Index y = adj.nbr[p];
          if (part.block[y] < 0) {
            part.block[y] = b;
            ++size[b];
            stack.push_back(y);
          }
        }
      }
    }
  }
  return part;
}

// "node_name block_id" per line; '#' or '*' starts a comment.
inline PartitionAssignment read_partition(std::istream& in, const Netlist& net) {
  PartitionAssignment part;
  part.block.assign(static_cast<std::size_t>(net.size()), -1);
  std::string line;
  Index lineno = 0;
  Index max_block = -1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string name;
    std::string id;
    if (!(ss >> name) || name[0] == '#' || name[0] == '*') continue;
    if (!(ss >> id)) throw InputError("line " + std::to_string(lineno) + ": missing block id");
    const Index v = net.find(name);
    if (v < 0) throw InputError("line " + std::to_string(lineno) + ": unknown node '" + name + "'");
    Index b = 0;
    try {
      b = parse_index(id);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (b < 0) throw InputError("line " + std::to_string(lineno) + ": negative block id");
    part.block[v] = b;
    max_block = std::max(max_block, b);
  }
  for (Index v = 0; v < net.size(); ++v) {
    if (part.block[v] < 0) throw InputError("partition file has no block for node '" + net.name(v) + "'");
  }
  // compact ids to [0, blocks), keeping their relative order
  std::vector<Index> remap(static_cast<std::size_t>(max_block + 1), -1);
  for (Index b : part.block) remap[b] = 0;
  Index next = 0;
  for (auto& r : remap) {
    if (r == 0) r = next++;
  }
  for (auto& b : part.block) b = remap[b];
  part.blocks = next;
  return part;
}

inline PartitionAssignment read_partition(const std::string& path, const Netlist& net) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_partition(in, net);
}

inline void write_partition(std::ostream& out, const PartitionAssignment& part, const Netlist& net) {
  for (Index v = 0; v < net.size(); ++v) out << net.name(v) << ' ' << part.block[v] << '\n';
}

// port: a source is attached; interface: non-port with a resistor neighbor
// in another block; interior: everything else.
inline std::vector<NodeClass> classify_nodes(const Netlist& net, const PartitionAssignment& part) {
  if (static_cast<Index>(part.block.size()) != net.size()) {
    throw InputError("partition covers " + std::to_string(part.block.size()) + " nodes, netlist has " +
                     std::to_string(net.size()));
  }
  const auto ports = net.port_mask();
  std::vector<NodeClass> cls(static_cast<std::size_t>(net.size()), NodeClass::interior);
  for (const auto& r : net.resistors) {
    if (r.a == kGround || r.b == kGround) continue;
    if (part.block[r.a] != part.block[r.b]) {
      cls[r.a] = NodeClass::interface;
      cls[r.b] = NodeClass::interface;
    }
  }
  for (Index v = 0; v < net.size(); ++v) {
    if (ports[v]) cls[v] = NodeClass::port;
  }
  return cls;
}

}  // namespace effres::pg
