#include "core/topology.hpp"

#include <algorithm>
#include <deque>

namespace mfsim {

NodeId Topology::add_node(NodeRole role, std::string name) {
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{id, role, std::move(name)});
  out_links_.emplace_back();
  routes_built_ = false;
  return id;
}

LinkId Topology::add_link(NodeId from, NodeId to, double capacity) {
  MFSIM_CHECK(from >= 0 && from < static_cast<NodeId>(nodes_.size()), "link endpoint out of range");
  MFSIM_CHECK(to >= 0 && to < static_cast<NodeId>(nodes_.size()), "link endpoint out of range");
  if (capacity <= 0.0) throw ConfigError("link capacity must be positive");
  LinkId id = static_cast<LinkId>(links_.size());
  links_.push_back(Link{id, from, to, capacity});
  out_links_[from].push_back(id);
  routes_built_ = false;
  return id;
}

void Topology::add_duplex(NodeId a, NodeId b, double capacity) {
  add_link(a, b, capacity);
  add_link(b, a, capacity);
}

void Topology::build_routes() {
  const int n = static_cast<int>(nodes_.size());
  for (auto& v : out_links_) std::sort(v.begin(), v.end());

  // incoming adjacency for the reverse BFS
  std::vector<std::vector<LinkId>> in_links(n);
  for (const Link& l : links_) in_links[l.to].push_back(l.id);

  routes_.assign(n, std::vector<std::vector<LinkId>>(n));
  std::vector<int> dist(n);
  for (NodeId dst = 0; dst < n; ++dst) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[dst] = 0;
    std::deque<NodeId> q{dst};
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      for (LinkId lid : in_links[u]) {
        NodeId v = links_[lid].from;
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push_back(v);
        }
      }
    }
    for (NodeId src = 0; src < n; ++src) {
      if (src == dst) continue;  // intra-host: empty route
      auto& path = routes_[src][dst];
      if (dist[src] < 0) {
        path.assign(1, -1);  // unreachable sentinel
        continue;
      }
      NodeId u = src;
      while (u != dst) {
        LinkId pick = -1;
        for (LinkId lid : out_links_[u]) {  // sorted: lowest id wins ties
          NodeId v = links_[lid].to;
          if (dist[v] == dist[u] - 1) {
            pick = lid;
            break;
          }
        }
        MFSIM_CHECK(pick >= 0, "route reconstruction failed");
        path.push_back(pick);
        u = links_[pick].to;
      }
    }
  }
  routes_built_ = true;
}

const std::vector<LinkId>& Topology::route(NodeId src, NodeId dst) const {
  MFSIM_CHECK(routes_built_, "routes not built");
  const auto& r = routes_[src][dst];
  if (!r.empty() && r[0] == -1)
    throw SimError("no route from node " + std::to_string(src) + " to node " + std::to_string(dst));
  return r;
}

bool Topology::has_route(NodeId src, NodeId dst) const {
  MFSIM_CHECK(routes_built_, "routes not built");
  if (src == dst) return true;
  const auto& r = routes_[src][dst];
  return r.empty() ? false : r[0] != -1;
}

Topology build_star(int hosts, double capacity) {
  Topology t;
  for (int h = 0; h < hosts; ++h) t.add_node(NodeRole::PrefillGPU, "h" + std::to_string(h));
  NodeId sw = t.add_node(NodeRole::Switch, "sw");
  for (int h = 0; h < hosts; ++h) t.add_duplex(h, sw, capacity);
  t.host_count_ = hosts;
  t.build_routes();
  return t;
}

Topology build_fattree(int hosts, double capacity) {
  int k = 2;
  while (k * k * k / 4 < hosts) k += 2;
  const int half = k / 2;

  Topology t;
  for (int h = 0; h < hosts; ++h) t.add_node(NodeRole::PrefillGPU, "h" + std::to_string(h));

  std::vector<std::vector<NodeId>> edge(k), agg(k);
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < half; ++j)
      edge[p].push_back(t.add_node(NodeRole::Switch, "edge_p" + std::to_string(p) + "_" + std::to_string(j)));
    for (int j = 0; j < half; ++j)
      agg[p].push_back(t.add_node(NodeRole::Switch, "agg_p" + std::to_string(p) + "_" + std::to_string(j)));
  }
  std::vector<NodeId> core;
  for (int c = 0; c < half * half; ++c)
    core.push_back(t.add_node(NodeRole::Switch, "core" + std::to_string(c)));

  // hosts fill pods edge by edge
  for (int h = 0; h < hosts; ++h) {
    int slot = h / half;         // edge switch index across the fabric
    int p = slot / half;         // pod
    int j = slot % half;         // edge within pod
    MFSIM_CHECK(p < k, "fat-tree host count exceeds fabric");
    t.add_duplex(h, edge[p][j], capacity);
  }
  for (int p = 0; p < k; ++p)
    for (int e = 0; e < half; ++e)
      for (int a = 0; a < half; ++a) t.add_duplex(edge[p][e], agg[p][a], capacity);
  for (int p = 0; p < k; ++p)
    for (int a = 0; a < half; ++a)
      for (int c = a * half; c < (a + 1) * half; ++c) t.add_duplex(agg[p][a], core[c], capacity);

  t.host_count_ = hosts;
  t.build_routes();
  return t;
}

Topology build_topology(const Config& cfg) {
  std::string kind = cfg.get_string("topology.kind", "star");
  long hosts = cfg.get_long("topology.hosts", 2);
  if (hosts < 1) throw ConfigError("config key 'topology.hosts': must be >= 1");
  long nics = cfg.get_long("topology.nics_per_host", 1);
  if (nics < 1) throw ConfigError("config key 'topology.nics_per_host': must be >= 1");
  double capacity;
  if (cfg.has("topology.link_bytes_per_s")) {
    capacity = cfg.require_double("topology.link_bytes_per_s") * static_cast<double>(nics);
  } else {
    double gbps = cfg.get_double("topology.link_gbps", 1.0);
    capacity = gbps * 1e9 / 8.0 * static_cast<double>(nics);
  }
  if (!(capacity > 0.0)) throw ConfigError("config key 'topology.link_gbps': capacity must be positive");

  if (kind == "star") return build_star(static_cast<int>(hosts), capacity);
  if (kind == "fattree") return build_fattree(static_cast<int>(hosts), capacity);
  throw ConfigError("config key 'topology.kind': unknown kind '" + kind + "'");
}

}  // namespace mfsim
