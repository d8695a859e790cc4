#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "sgr/corpus.hpp"

namespace sgr {

enum class Provenance { detected, tracked };

struct GraphNode {
  int node_id = 0;  // must equal the node's position: ids are 0..N-1
  int class_id = 0;
  Provenance provenance = Provenance::detected;
};

enum class Topology { star, complete };
Topology parse_topology(const std::string& name);  // throws UsageError
std::string topology_name(Topology t);

struct SceneGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> edges;  // unordered pairs stored (i < j)
  std::vector<Interaction> annotations;    // carried through, never shape topology

  int size() const { return static_cast<int>(nodes.size()); }
  bool has_edge(int i, int j) const;
};

// `star` connects every instrument to the tissue node (no edges when no
// tissue is present); `complete` connects all pairs. Interactions, when
// given, are attached as annotations only.
SceneGraph build_scene_graph(const std::vector<GraphNode>& nodes, Topology topology,
                             const std::vector<Interaction>* interactions = nullptr);

struct NormalizedAdjacency {
  Eigen::MatrixXd a_tilde;  // adjacency with self-connections, A + I
  Eigen::VectorXd d_tilde;  // row sums of a_tilde
  Eigen::MatrixXd a_hat;    // D^{-1/2} (A + I) D^{-1/2}
};

// Self-loops guarantee every degree is >= 1, so this never divides by zero.
NormalizedAdjacency normalized_adjacency(const SceneGraph& graph);

}  // namespace sgr
