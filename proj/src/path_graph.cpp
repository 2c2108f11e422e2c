#include "fiberparc/path_graph.hpp"

#include <cmath>
#include <stdexcept>

namespace fiberparc {

Eigen::MatrixXd PathGraph::dense_adjacency() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
  for (const auto& e : edges) {
    w(e.a, e.b) = e.w;
    w(e.b, e.a) = e.w;
  }
  return w;
}

double PathGraph::total_edge_weight() const {
  double total = 0.0;
  for (const auto& e : edges) {
    total += e.w;
  }
  return total;
}

PathGraph build_path_graph(int n) {
  if (n < 1) {
    throw std::invalid_argument("build_path_graph: n must be >= 1");
  }
  std::vector<GraphEdge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 0; i + 1 < n; ++i) {
    edges.push_back(GraphEdge{i, i + 1, 1.0});
  }
  return make_graph(n, std::move(edges));
}

PathGraph make_graph(int num_nodes, std::vector<GraphEdge> edges) {
  if (num_nodes < 1) {
    throw std::invalid_argument("make_graph: need at least one node");
  }
  PathGraph g;
  g.num_nodes = num_nodes;
  g.degrees.assign(static_cast<std::size_t>(num_nodes), 0.0);
  for (auto& e : edges) {
    if (e.a > e.b) {
      std::swap(e.a, e.b);
    }
    if (e.a < 0 || e.b >= num_nodes || e.a == e.b) {
      throw std::invalid_argument("make_graph: edge endpoints out of range");
    }
    if (!(e.w > 0.0) || !std::isfinite(e.w)) {
      throw std::invalid_argument("make_graph: edge weights must be positive and finite");
    }
    g.degrees[e.a] += e.w;
    g.degrees[e.b] += e.w;
  }
  g.edges = std::move(edges);
  return g;
}

Eigen::MatrixXd normalized_laplacian(const PathGraph& g) {
  const int n = g.num_nodes;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (g.degrees[i] > 0.0) {
      lap(i, i) = 1.0;
    }
  }
  for (const auto& e : g.edges) {
    const double v = -e.w / std::sqrt(g.degrees[e.a] * g.degrees[e.b]);
    lap(e.a, e.b) = v;
    lap(e.b, e.a) = v;
  }
  return lap;
}

}  // namespace fiberparc
