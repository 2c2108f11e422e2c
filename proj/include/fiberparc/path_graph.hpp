#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fiberparc {

struct GraphEdge {
  int a = 0;
  int b = 0;       // a < b
  double w = 0.0;  // > 0
};

/// A weighted undirected graph whose components are paths. The base graph of
/// a resampled streamline is a unit-weight chain; coarsened graphs carry
/// accumulated weights and may contain isolated (fake) padding nodes, which
/// have degree zero.
struct PathGraph {
  int num_nodes = 0;
  std::vector<GraphEdge> edges;
  std::vector<double> degrees;

  Eigen::MatrixXd dense_adjacency() const;
  double total_edge_weight() const;
};

/// Chain of n nodes with unit weights on consecutive-node edges.
/// Throws std::invalid_argument for n < 1.
PathGraph build_path_graph(int n);

/// Builds a graph from explicit edges; recomputes degrees.
PathGraph make_graph(int num_nodes, std::vector<GraphEdge> edges);

/// Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2} as a dense matrix.
/// Rows and columns of isolated nodes are identically zero.
Eigen::MatrixXd normalized_laplacian(const PathGraph& g);

}  // namespace fiberparc
