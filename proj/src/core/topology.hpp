#ifndef MFSIM_CORE_TOPOLOGY_HPP
#define MFSIM_CORE_TOPOLOGY_HPP

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/types.hpp"

namespace mfsim {

enum class NodeRole : uint8_t { PrefillGPU, DecodeGPU, Switch };

struct Node {
  NodeId id = -1;
  NodeRole role = NodeRole::Switch;
  std::string name;
};

// Directed link (full-duplex fabrics are two links), capacity in bytes/s.
struct Link {
  LinkId id = -1;
  NodeId from = -1;
  NodeId to = -1;
  double capacity = 0.0;
};

class Topology {
 public:
  NodeId add_node(NodeRole role, std::string name);
  LinkId add_link(NodeId from, NodeId to, double capacity);
  void add_duplex(NodeId a, NodeId b, double capacity);

  // Deterministic shortest-path routes, ties broken by lowest link id.
  // Same-node transfers route over no links (intra-host, no contention).
  void build_routes();

  const std::vector<LinkId>& route(NodeId src, NodeId dst) const;
  bool has_route(NodeId src, NodeId dst) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_[id]; }
  int host_count() const { return host_count_; }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_links_;  // per node, sorted by link id
  // routes_[src][dst]; empty vector for src==dst, sentinel {-1} for unreachable
  std::vector<std::vector<std::vector<LinkId>>> routes_;
  bool routes_built_ = false;
  int host_count_ = 0;

  friend Topology build_star(int hosts, double capacity);
  friend Topology build_fattree(int hosts, double capacity);
};

// Star: every host gets one duplex attachment to a single switch.
Topology build_star(int hosts, double capacity);

// Folded-Clos fat-tree with even arity k derived from the host count
// (smallest even k with k^3/4 >= hosts); surplus ports are left unused.
Topology build_fattree(int hosts, double capacity);

// From config keys: topology.kind in {star, fattree}, topology.hosts,
// topology.link_gbps, topology.nics_per_host (aggregated into capacity).
Topology build_topology(const Config& cfg);

}  // namespace mfsim

#endif
