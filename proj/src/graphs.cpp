#include "sensynth/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <tuple>

namespace sensynth::graphs {

bool CellGraph::adjacent(int u, int v) const {
  const auto& nb = adjacency[u];
  return std::binary_search(nb.begin(), nb.end(), v);
}

int CellGraph::edge_count() const {
  size_t total = 0;
  for (const auto& nb : adjacency) total += nb.size();
  return static_cast<int>(total / 2);
}

namespace {

CellGraph empty_graph_over(const GridRegion& region) {
  CellGraph g;
  g.vertices = region.open_cells();
  g.adjacency.assign(g.vertices.size(), {});
  g.self_cover.assign(g.vertices.size(), false);
  g.vertex_of_cell.assign(region.cell_count(), -1);
  for (int v = 0; v < g.size(); ++v) {
    g.vertex_of_cell[region.index(g.vertices[v])] = v;
  }
  return g;
}

// Relaxed distance depends only on the index offset, so both graph builders
// only scan cells within radius reach.
int reach_in_cells(double radius, double cell_size) {
  return std::max(0, static_cast<int>(std::floor(radius / cell_size)));
}

template <typename EdgeTest>
CellGraph build_graph(const GridRegion& region, double radius, EdgeTest test) {
  CellGraph g = empty_graph_over(region);
  const int reach = reach_in_cells(radius, region.cell_size());
  for (int u = 0; u < g.size(); ++u) {
    const Cell a = g.vertices[u];
    g.self_cover[u] = relaxed_distance(a, a, region) <= radius;
    for (int r = std::max(0, a.row - reach);
         r <= std::min(region.height() - 1, a.row + reach); ++r) {
      for (int c = std::max(0, a.col - reach);
           c <= std::min(region.width() - 1, a.col + reach); ++c) {
        const Cell b{c, r};
        const int v = g.vertex_of_cell[region.index(b)];
        if (v < 0 || v == u) continue;
        if (relaxed_distance(a, b, region) <= radius && test(a, b)) {
          g.adjacency[u].push_back(v);
        }
      }
    }
    std::sort(g.adjacency[u].begin(), g.adjacency[u].end());
  }
  return g;
}

}  // namespace

CellGraph build_visibility_graph(const GridRegion& region, double r_s) {
  return build_graph(region, r_s, [&](Cell a, Cell b) {
    return relaxed_visibility(a, b, region);
  });
}

CellGraph build_connectivity_graph(const GridRegion& region, double r_c) {
  CellGraph g = build_graph(region, r_c, [](Cell, Cell) { return true; });
  std::fill(g.self_cover.begin(), g.self_cover.end(), false);
  return g;
}

ComponentLabeling connected_components(const CellGraph& graph,
                                       std::span<const int> active) {
  ComponentLabeling out;
  out.label.assign(graph.size(), -1);
  std::vector<bool> is_active(graph.size(), false);
  for (int v : active) is_active.at(v) = true;
  for (int s : active) {
    if (out.label[s] >= 0) continue;
    const int id = out.count++;
    std::deque<int> queue{s};
    out.label[s] = id;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : graph.adjacency[u]) {
        if (is_active[v] && out.label[v] < 0) {
          out.label[v] = id;
          queue.push_back(v);
        }
      }
    }
  }
  return out;
}

BoolMatrix hop_matrix(const BoolMatrix& adjacency, int hops) {
  const size_t n = adjacency.size();
  BoolMatrix reach(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i) reach[i][i] = true;
  // reach_{h} = reach_{h-1} * (I + A) over (or, and).
  for (int h = 0; h < hops; ++h) {
    BoolMatrix next = reach;
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < n; ++k) {
        if (!reach[i][k]) continue;
        for (size_t j = 0; j < n; ++j) {
          if (adjacency[k][j]) next[i][j] = true;
        }
      }
    }
    if (next == reach) break;
    reach = std::move(next);
  }
  return reach;
}

bool hop_connectivity(const BoolMatrix& adjacency) {
  const size_t n = adjacency.size();
  if (n <= 1) return true;
  const BoolMatrix reach = hop_matrix(adjacency, static_cast<int>(n) - 1);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i != j && !reach[i][j]) return false;
    }
  }
  return true;
}

bool bfs_connected(const BoolMatrix& adjacency) {
  const size_t n = adjacency.size();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::deque<size_t> queue{0};
  seen[0] = true;
  size_t visited = 1;
  while (!queue.empty()) {
    const size_t u = queue.front();
    queue.pop_front();
    for (size_t v = 0; v < n; ++v) {
      if (adjacency[u][v] && !seen[v]) {
        seen[v] = true;
        ++visited;
        queue.push_back(v);
      }
    }
  }
  return visited == n;
}

std::vector<int> CollapsedGraph::terminals() const {
  std::vector<int> out;
  for (int v = 0; v < node_count; ++v) {
    if (is_terminal[v]) out.push_back(v);
  }
  return out;
}

void CollapsedGraph::add_edge(int u, int v) {
  if (u == v) return;
  auto insert = [](std::vector<int>& nb, int x) {
    auto it = std::lower_bound(nb.begin(), nb.end(), x);
    if (it == nb.end() || *it != x) nb.insert(it, x);
  };
  insert(adjacency[u], v);
  insert(adjacency[v], u);
}

CollapsedGraph collapse(std::span<const int> deployed, const CellGraph& g_c) {
  if (deployed.empty()) {
    throw std::invalid_argument("collapse needs a nonempty deployed set");
  }
  const ComponentLabeling comps = connected_components(g_c, deployed);
  CollapsedGraph cg;
  cg.node_count = comps.count;
  std::vector<int> node_of_vertex(g_c.size(), -1);
  for (int v = 0; v < g_c.size(); ++v) {
    if (comps.label[v] >= 0) node_of_vertex[v] = comps.label[v];
  }
  for (int v = 0; v < g_c.size(); ++v) {
    if (comps.label[v] < 0) node_of_vertex[v] = cg.node_count++;
  }
  cg.adjacency.assign(cg.node_count, {});
  cg.is_terminal.assign(cg.node_count, false);
  cg.cell_vertex.assign(cg.node_count, -1);
  cg.component.assign(cg.node_count, -1);
  for (int c = 0; c < comps.count; ++c) {
    cg.is_terminal[c] = true;
    cg.component[c] = c;
  }
  for (int v = 0; v < g_c.size(); ++v) {
    if (comps.label[v] < 0) cg.cell_vertex[node_of_vertex[v]] = v;
  }
  for (int u = 0; u < g_c.size(); ++u) {
    for (int v : g_c.adjacency[u]) {
      if (v <= u) continue;
      const int a = node_of_vertex[u], b = node_of_vertex[v];
      if (a != b) cg.add_edge(a, b);
    }
  }
  return cg;
}

namespace {

std::vector<int> bfs_distances(const CollapsedGraph& cg, int source) {
  std::vector<int> dist(cg.node_count, -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : cg.adjacency[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Lexicographically smallest shortest path from `from` to the BFS root whose
// distance table is `dist_to_root`.
std::vector<int> lex_shortest_path(const CollapsedGraph& cg, int from,
                                   const std::vector<int>& dist_to_root) {
  std::vector<int> path{from};
  int u = from;
  while (dist_to_root[u] > 0) {
    for (int v : cg.adjacency[u]) {  // sorted ascending
      if (dist_to_root[v] == dist_to_root[u] - 1) {
        u = v;
        break;
      }
    }
    path.push_back(u);
  }
  return path;
}

struct DisjointSets {
  explicit DisjointSets(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<int> parent;
};

}  // namespace

SteinerTree steiner_tree(const CollapsedGraph& cg) {
  const std::vector<int> terms = cg.terminals();
  SteinerTree tree;
  if (terms.empty()) return tree;
  if (terms.size() == 1) {
    tree.nodes = terms;
    return tree;
  }
  const int t = static_cast<int>(terms.size());

  // Metric closure over terminals.
  std::vector<std::vector<int>> dist_from(t);
  for (int a = 0; a < t; ++a) dist_from[a] = bfs_distances(cg, terms[a]);
  std::vector<int> isolated;
  for (int b = 1; b < t; ++b) {
    if (dist_from[0][terms[b]] < 0) isolated.push_back(cg.component[terms[b]]);
  }
  if (!isolated.empty()) {
    std::string msg = "terminals not mutually reachable; isolated components:";
    for (int c : isolated) msg += " " + std::to_string(c);
    throw InfeasibleRepair(msg, isolated);
  }

  // MST of the closure (Kruskal, ties by terminal order).
  std::vector<std::tuple<int, int, int>> closure_edges;
  for (int a = 0; a < t; ++a) {
    for (int b = a + 1; b < t; ++b) {
      closure_edges.emplace_back(dist_from[a][terms[b]], a, b);
    }
  }
  std::sort(closure_edges.begin(), closure_edges.end());
  DisjointSets closure_sets(t);
  std::vector<std::pair<int, int>> expanded;
  for (const auto& [w, a, b] : closure_edges) {
    if (!closure_sets.unite(a, b)) continue;
    // Expand to a shortest path in the collapsed graph.
    const std::vector<int> path = lex_shortest_path(cg, terms[a], dist_from[b]);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      expanded.emplace_back(std::min(path[i], path[i + 1]),
                            std::max(path[i], path[i + 1]));
    }
  }
  std::sort(expanded.begin(), expanded.end());
  expanded.erase(std::unique(expanded.begin(), expanded.end()),
                 expanded.end());

  // MST of the expanded subgraph (unit weights, so any spanning forest).
  DisjointSets sub_sets(cg.node_count);
  std::vector<std::vector<int>> tree_adj(cg.node_count);
  std::vector<bool> in_tree(cg.node_count, false);
  for (const auto& [u, v] : expanded) {
    if (!sub_sets.unite(u, v)) continue;
    tree_adj[u].push_back(v);
    tree_adj[v].push_back(u);
    in_tree[u] = in_tree[v] = true;
  }

  // Prune non-terminal leaves until none remain.
  std::vector<int> degree(cg.node_count, 0);
  for (int v = 0; v < cg.node_count; ++v) {
    degree[v] = static_cast<int>(tree_adj[v].size());
  }
  std::deque<int> leaves;
  for (int v = 0; v < cg.node_count; ++v) {
    if (in_tree[v] && !cg.is_terminal[v] && degree[v] <= 1) leaves.push_back(v);
  }
  while (!leaves.empty()) {
    const int v = leaves.front();
    leaves.pop_front();
    if (!in_tree[v]) continue;
    in_tree[v] = false;
    for (int u : tree_adj[v]) {
      if (!in_tree[u]) continue;
      if (--degree[u] <= 1 && !cg.is_terminal[u]) leaves.push_back(u);
    }
  }
  for (int v = 0; v < cg.node_count; ++v) {
    if (!in_tree[v]) continue;
    tree.nodes.push_back(v);
    for (int u : tree_adj[v]) {
      if (in_tree[u] && v < u) tree.edges.emplace_back(v, u);
    }
  }
  return tree;
}

std::vector<int> steiner_repair(const CollapsedGraph& cg) {
  const SteinerTree tree = steiner_tree(cg);
  std::vector<int> added;
  for (int v : tree.nodes) {
    if (!cg.is_terminal[v]) added.push_back(cg.cell_vertex[v]);
  }
  std::sort(added.begin(), added.end());
  return added;
}

}  // namespace sensynth::graphs
