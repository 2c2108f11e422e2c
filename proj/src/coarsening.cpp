#include "fiberparc/coarsening.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace fiberparc {

namespace {

struct MatchResult {
  std::vector<MatchedPair> pairs;   // indexed by coarse node id
  std::vector<int> cluster_of;      // fine node -> coarse node id
};

MatchResult greedy_match(const PathGraph& g) {
  const int n = g.num_nodes;
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const GraphEdge& e : g.edges) {
    adj[e.a].emplace_back(e.b, e.w);
    adj[e.b].emplace_back(e.a, e.w);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
  }

  MatchResult res;
  res.cluster_of.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (res.cluster_of[i] >= 0) continue;
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& [nb, w] : adj[i]) {
      if (res.cluster_of[nb] >= 0) continue;
      // Ascending neighbor order plus strict > keeps the smaller index on ties.
      const double score = w * (1.0 / g.degrees[i] + 1.0 / g.degrees[nb]);
      if (score > best_score) {
        best_score = score;
        best = nb;
      }
    }
    const int cid = static_cast<int>(res.pairs.size());
    res.cluster_of[i] = cid;
    if (best >= 0) {
      res.cluster_of[best] = cid;
      res.pairs.push_back({i, best});
    } else {
      res.pairs.push_back({i, -1});
    }
  }
  return res;
}

PathGraph coarse_graph(const PathGraph& fine, const std::vector<int>& cluster_of, int num_coarse) {
  std::map<std::pair<int, int>, double> acc;
  for (const GraphEdge& e : fine.edges) {
    const int ca = cluster_of[e.a];
    const int cb = cluster_of[e.b];
    if (ca == cb) continue;
    acc[{std::min(ca, cb), std::max(ca, cb)}] += e.w;
  }
  std::vector<GraphEdge> edges;
  edges.reserve(acc.size());
  for (const auto& [key, w] : acc) {
    edges.push_back({key.first, key.second, w});
  }
  return make_graph(num_coarse, edges);
}

}  // namespace

CoarseningHierarchy graclus_coarsen(const PathGraph& g, int num_levels) {
  if (num_levels < 1) {
    throw std::invalid_argument("graclus_coarsen: num_levels must be >= 1");
  }
  if (g.num_nodes < 1) {
    throw std::invalid_argument("graclus_coarsen: graph has no nodes");
  }

  CoarseningHierarchy h;
  h.num_input_nodes = g.num_nodes;

  std::vector<PathGraph> unpadded;
  unpadded.reserve(static_cast<size_t>(num_levels));
  unpadded.push_back(g);
  for (int lvl = 0; lvl + 1 < num_levels; ++lvl) {
    MatchResult m = greedy_match(unpadded.back());
    const int num_coarse = static_cast<int>(m.pairs.size());
    unpadded.push_back(coarse_graph(unpadded.back(), m.cluster_of, num_coarse));
    h.matchings.push_back(std::move(m.pairs));
  }

  // Padded sizes: round the coarsest level up to even, then double downward.
  std::vector<int> padded(static_cast<size_t>(num_levels));
  {
    const int top = unpadded.back().num_nodes;
    padded[static_cast<size_t>(num_levels - 1)] = (num_levels == 1) ? top : top + (top & 1);
    for (int lvl = num_levels - 2; lvl >= 0; --lvl) {
      padded[static_cast<size_t>(lvl)] = 2 * padded[static_cast<size_t>(lvl + 1)];
    }
  }

  // Slot assignment, coarsest first. orig_at[lvl][slot] is the original node
  // id at that level, -1 for fakes. Coarsest real nodes keep their ids as
  // slots; finer levels place cluster c's children at slots 2s and 2s+1 of
  // its slot s, first (smaller) child at the even slot.
  std::vector<std::vector<int>> orig_at(static_cast<size_t>(num_levels));
  {
    auto& top = orig_at[static_cast<size_t>(num_levels - 1)];
    top.assign(static_cast<size_t>(padded[static_cast<size_t>(num_levels - 1)]), -1);
    for (int i = 0; i < unpadded.back().num_nodes; ++i) top[static_cast<size_t>(i)] = i;
  }
  for (int lvl = num_levels - 2; lvl >= 0; --lvl) {
    std::vector<std::vector<int>> kids(static_cast<size_t>(unpadded[static_cast<size_t>(lvl + 1)].num_nodes));
    const auto& step = h.matchings[static_cast<size_t>(lvl)];
    for (size_t c = 0; c < step.size(); ++c) {
      kids[c].push_back(step[c].a);
      if (step[c].b >= 0) kids[c].push_back(step[c].b);
    }
    auto& fine = orig_at[static_cast<size_t>(lvl)];
    fine.assign(static_cast<size_t>(padded[static_cast<size_t>(lvl)]), -1);
    const auto& coarse = orig_at[static_cast<size_t>(lvl + 1)];
    for (size_t s = 0; s < coarse.size(); ++s) {
      const int c = coarse[s];
      if (c < 0) continue;  // fake parent keeps two fake children
      const auto& ch = kids[static_cast<size_t>(c)];
      fine[2 * s] = ch[0];
      if (ch.size() == 2) fine[2 * s + 1] = ch[1];
    }
  }

  h.padded_length = padded[0];
  h.input_permutation = orig_at[0];
  h.slot_of_input.assign(static_cast<size_t>(g.num_nodes), -1);
  for (size_t slot = 0; slot < orig_at[0].size(); ++slot) {
    if (orig_at[0][slot] >= 0) h.slot_of_input[static_cast<size_t>(orig_at[0][slot])] = static_cast<int>(slot);
  }

  h.levels.resize(static_cast<size_t>(num_levels));
  for (int lvl = 0; lvl < num_levels; ++lvl) {
    CoarseningLevel& level = h.levels[static_cast<size_t>(lvl)];
    const PathGraph& src = unpadded[static_cast<size_t>(lvl)];
    const auto& placement = orig_at[static_cast<size_t>(lvl)];
    std::vector<int> slot_of(static_cast<size_t>(src.num_nodes), -1);
    level.real_mask.assign(placement.size(), false);
    for (size_t slot = 0; slot < placement.size(); ++slot) {
      if (placement[slot] >= 0) {
        slot_of[static_cast<size_t>(placement[slot])] = static_cast<int>(slot);
        level.real_mask[slot] = true;
      }
    }
    std::vector<GraphEdge> edges;
    edges.reserve(src.edges.size());
    for (const GraphEdge& e : src.edges) {
      edges.push_back({slot_of[static_cast<size_t>(e.a)], slot_of[static_cast<size_t>(e.b)], e.w});
    }
    level.graph = make_graph(padded[static_cast<size_t>(lvl)], edges);
    level.basis = eigendecompose(normalized_laplacian(level.graph));
    if (lvl + 1 < num_levels) {
      level.parent_of.resize(placement.size());
      for (size_t slot = 0; slot < placement.size(); ++slot) {
        level.parent_of[slot] = static_cast<int>(slot / 2);
      }
    }
  }
  return h;
}

Eigen::MatrixXd permute_signal(const CoarseningHierarchy& h, const Eigen::MatrixXd& values) {
  if (values.rows() != h.num_input_nodes) {
    throw std::invalid_argument("permute_signal: signal length does not match graph size");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(h.padded_length, values.cols());
  for (int slot = 0; slot < h.padded_length; ++slot) {
    const int orig = h.input_permutation[static_cast<size_t>(slot)];
    if (orig >= 0) out.row(slot) = values.row(orig);
  }
  return out;
}

Eigen::MatrixXd unpermute_signal(const CoarseningHierarchy& h, const Eigen::MatrixXd& padded) {
  if (padded.rows() != h.padded_length) {
    throw std::invalid_argument("unpermute_signal: signal length does not match padded size");
  }
  Eigen::MatrixXd out(h.num_input_nodes, padded.cols());
  for (int i = 0; i < h.num_input_nodes; ++i) {
    out.row(i) = padded.row(h.slot_of_input[static_cast<size_t>(i)]);
  }
  return out;
}

std::vector<int> reversal_permutation(const CoarseningHierarchy& h) {
  std::vector<int> rev(static_cast<size_t>(h.padded_length));
  for (int slot = 0; slot < h.padded_length; ++slot) {
    const int orig = h.input_permutation[static_cast<size_t>(slot)];
    if (orig >= 0) {
      rev[static_cast<size_t>(slot)] =
          h.slot_of_input[static_cast<size_t>(h.num_input_nodes - 1 - orig)];
    } else {
      rev[static_cast<size_t>(slot)] = slot;
    }
  }
  return rev;
}

}  // namespace fiberparc
