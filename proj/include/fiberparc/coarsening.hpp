#pragma once

#include <vector>

#include "fiberparc/eigensolver.hpp"
#include "fiberparc/path_graph.hpp"

namespace fiberparc {

/// One level of the multiscale hierarchy, in rearranged (binary-tree) node
/// order: the two children of the node at coarser slot s sit at slots 2s and
/// 2s+1, so pooling is a plain stride-2 pass over adjacent indices. Fake
/// padding nodes are isolated.
struct CoarseningLevel {
  PathGraph graph;              // padded graph in rearranged order
  SpectralBasis basis;          // eigenbasis of the padded graph's Laplacian
  std::vector<bool> real_mask;  // true = real node, false = fake
  std::vector<int> parent_of;   // slot -> slot at the next-coarser level; empty at the coarsest
};

/// A matched pair from one greedy coarsening step, in the fine level's
/// original labels, ordered by the coarse node they form. b = -1 marks a
/// singleton (its coarse node gets a fake second child).
struct MatchedPair {
  int a = 0;
  int b = -1;
};

struct CoarseningHierarchy {
  std::vector<CoarseningLevel> levels;         // finest first
  std::vector<int> input_permutation;          // finest slot -> original node, -1 = fake
  std::vector<int> slot_of_input;              // original node -> finest slot
  std::vector<std::vector<MatchedPair>> matchings;  // one entry per coarsening step
  int num_input_nodes = 0;                     // n, real nodes of the finest graph
  int padded_length = 0;                       // k, padded finest size

  int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Builds a num_levels-deep hierarchy over g (counting g itself).
///
/// Each step visits unmarked nodes in ascending index order and pairs each
/// with the unmarked neighbor maximizing w * (1/d_i + 1/d_j), ties to the
/// smaller index; leftovers become singletons. Coarse edge weights sum the
/// crossing fine weights. The coarsest level is padded to an even node
/// count, singleton parents get a fake second child, and fake parents get
/// two fake children, which fixes every padded size to
/// 2^(levels-1-L) * (coarsest padded size).
CoarseningHierarchy graclus_coarsen(const PathGraph& g, int num_levels);

/// Scatters an n-row signal (one column per channel) into the k-row padded
/// layout; fake rows are zero. Throws std::invalid_argument on a row-count
/// mismatch.
Eigen::MatrixXd permute_signal(const CoarseningHierarchy& h, const Eigen::MatrixXd& values);

/// Gathers the real rows back out of a padded signal (inverse of
/// permute_signal).
Eigen::MatrixXd unpermute_signal(const CoarseningHierarchy& h, const Eigen::MatrixXd& padded);

/// Slot-to-slot map that realizes reversal of the underlying streamline:
/// output[slot] = padded position of original node n-1-i when slot holds
/// original node i. Fake slots map to themselves.
std::vector<int> reversal_permutation(const CoarseningHierarchy& h);

}  // namespace fiberparc
