#include "sgr/scene_graph.hpp"

#include <algorithm>
#include <set>

#include "sgr/errors.hpp"

namespace sgr {

Topology parse_topology(const std::string& name) {
  if (name == "star") return Topology::star;
  if (name == "complete") return Topology::complete;
  throw UsageError("unknown topology '" + name + "' (expected star or complete)");
}

std::string topology_name(Topology t) {
  return t == Topology::star ? "star" : "complete";
}

bool SceneGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  const auto p = std::minmax(i, j);
  return std::find(edges.begin(), edges.end(), std::make_pair(p.first, p.second)) !=
         edges.end();
}

SceneGraph build_scene_graph(const std::vector<GraphNode>& nodes, Topology topology,
                             const std::vector<Interaction>* interactions) {
  if (nodes.empty()) throw DataError("scene graph needs at least one node");

  std::set<int> ids;
  int tissue = -1;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (!ids.insert(n.node_id).second)
      throw DataError("duplicate node id " + std::to_string(n.node_id));
    if (n.node_id != static_cast<int>(i))
      throw DataError("node ids must be contiguous 0..N-1 in order");
    if (object_class(n.class_id).is_tissue) {
      if (tissue >= 0) throw DataError("a scene graph holds at most one tissue node");
      tissue = n.node_id;
    }
  }

  SceneGraph graph;
  graph.nodes = nodes;
  const int n = graph.size();
  switch (topology) {
    case Topology::star:
      if (tissue >= 0)
        for (int i = 0; i < n; ++i)
          if (i != tissue) graph.edges.emplace_back(std::min(i, tissue), std::max(i, tissue));
      break;
    case Topology::complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) graph.edges.emplace_back(i, j);
      break;
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  if (interactions) graph.annotations = *interactions;
  return graph;
}

NormalizedAdjacency normalized_adjacency(const SceneGraph& graph) {
  const int n = graph.size();
  if (n < 1) throw DataError("normalized adjacency needs at least one node");

  NormalizedAdjacency out;
  out.a_tilde = Eigen::MatrixXd::Identity(n, n);
  for (const auto& [i, j] : graph.edges) {
    out.a_tilde(i, j) = 1.0;
    out.a_tilde(j, i) = 1.0;
  }
  out.d_tilde = out.a_tilde.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(out.d_tilde(i));
  out.a_hat = inv_sqrt.asDiagonal() * out.a_tilde * inv_sqrt.asDiagonal();
  return out;
}

}  // namespace sgr
