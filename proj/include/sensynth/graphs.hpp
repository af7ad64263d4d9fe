#ifndef SENSYNTH_GRAPHS_HPP_
#define SENSYNTH_GRAPHS_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sensynth/geometry.hpp"

namespace sensynth::graphs {

// Undirected graph over the open cells of a region. Vertex ids follow the
// row-major order of GridRegion::open_cells().
struct CellGraph {
  std::vector<Cell> vertices;
  std::vector<std::vector<int>> adjacency;  // sorted, no self loops
  // Visibility graphs only: a sensor in the cell covers the cell itself.
  std::vector<bool> self_cover;
  // Grid cell index -> vertex id, -1 for occupied cells.
  std::vector<int> vertex_of_cell;

  int size() const { return static_cast<int>(vertices.size()); }
  bool adjacent(int u, int v) const;
  int edge_count() const;
};

CellGraph build_visibility_graph(const GridRegion& region, double r_s);
CellGraph build_connectivity_graph(const GridRegion& region, double r_c);

struct ComponentLabeling {
  // Per graph vertex: component id, or -1 when the vertex is inactive.
  std::vector<int> label;
  int count = 0;
};

ComponentLabeling connected_components(const CellGraph& graph,
                                       std::span<const int> active);

// Dense boolean adjacency over n nodes.
using BoolMatrix = std::vector<std::vector<bool>>;

// Connectivity via the (n-1)-hop reachability matrix computed in the boolean
// semiring: true iff every off-diagonal entry is positive.
bool hop_connectivity(const BoolMatrix& adjacency);

// Reachability-in-at-most-h-hops matrix (boolean semiring power of I + A).
BoolMatrix hop_matrix(const BoolMatrix& adjacency, int hops);

// Plain BFS verdict, used to cross-check hop_connectivity.
bool bfs_connected(const BoolMatrix& adjacency);

// Deployed components contracted to terminal supernodes; every other open
// cell stays as a candidate node. All edges weigh one hop.
struct CollapsedGraph {
  int node_count = 0;
  std::vector<std::vector<int>> adjacency;  // sorted
  std::vector<bool> is_terminal;
  // For candidate nodes: the CellGraph vertex id; -1 for terminals.
  std::vector<int> cell_vertex;
  // For terminals: the component id in the deployed labeling; -1 otherwise.
  std::vector<int> component;

  std::vector<int> terminals() const;
  void add_edge(int u, int v);
};

CollapsedGraph collapse(std::span<const int> deployed, const CellGraph& g_c);

class InfeasibleRepair : public std::runtime_error {
 public:
  InfeasibleRepair(const std::string& what, std::vector<int> isolated)
      : std::runtime_error(what), isolated_components(std::move(isolated)) {}
  // Component ids (CollapsedGraph::component) that cannot reach the first
  // terminal.
  std::vector<int> isolated_components;
};

struct SteinerTree {
  std::vector<int> nodes;  // collapsed node ids in the tree
  std::vector<std::pair<int, int>> edges;
  int weight() const { return static_cast<int>(edges.size()); }
};

// Kou-Markowsky-Berman approximation: metric closure over terminals, MST of
// the closure, expansion to shortest paths, MST of the expansion, pruning of
// non-terminal leaves. Throws InfeasibleRepair when terminals are split.
SteinerTree steiner_tree(const CollapsedGraph& cg);

// Candidate cells (CellGraph vertex ids) whose addition connects the
// deployed set.
std::vector<int> steiner_repair(const CollapsedGraph& cg);

}  // namespace sensynth::graphs

#endif  // SENSYNTH_GRAPHS_HPP_
