#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fiberparc/gcnn.hpp"
#include "fiberparc/streamline.hpp"

namespace fiberparc {

struct DatasetSample {
  Eigen::MatrixXd coords;  // k x 3, padded layout
  int label = 0;
  std::uint64_t id = 0;
};

struct BinaryDataset {
  std::vector<DatasetSample> samples;
  int num_positive = 0;
  int num_negative = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double lambda = 1e-4;  // L2 coefficient over weights, biases excluded
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool reversal_augmentation = true;
  std::ostream* log = nullptr;  // optional per-epoch progress lines
};

/// First/second moment accumulators mirroring every model parameter.
struct OptimizerState {
  std::vector<Eigen::MatrixXd> conv1_m, conv1_v;
  std::vector<Eigen::MatrixXd> conv2_m, conv2_v;
  Eigen::MatrixXd fc_Wm, fc_Wv, out_Wm, out_Wv;
  Eigen::VectorXd fc_bm, fc_bv, out_bm, out_bv;
  long long step = 0;
};

struct EpochStats {
  double train_loss = 0.0;  // optimized objective averaged over the epoch's steps
  double val_loss = 0.0;    // cross-entropy only
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;  // index of the kept model's epoch
  int stop_epoch = -1;  // index of the last epoch run
};

struct TrainResult {
  GcnnModel model;
  TrainReport report;
};

/// Builds the binary classification set for one target bundle: all target
/// streamlines as positives; up to N_pos negatives sampled uniformly without
/// replacement from bundles whose axis-aligned bounding boxes intersect the
/// target's, then min(N_pos, available) more from all remaining bundles.
/// Unlabeled streamlines belong to no bundle and are never sampled. Samples
/// are resampled to the hierarchy's node count, normalized, and padded;
/// order is positives, neighbor negatives, random negatives. Deterministic
/// under seed. Throws if the target bundle is absent or empty.
BinaryDataset assemble_binary_dataset(const StreamlineSet& all, const std::string& target_bundle,
                                      const CoarseningHierarchy& h,
                                      const NormalizationTransform& norm, std::uint64_t seed);

OptimizerState init_optimizer_state(const GcnnModel& model);

/// Adaptive-moment update: m <- b1*m + (1-b1)*g, v <- b2*v + (1-b2)*g^2,
/// bias-corrected, theta <- theta - lr * m^ / (sqrt(v^) + eps).
void optimizer_step(OptimizerState& state, GcnnModel& model, const GcnnGradients& grads,
                    const TrainConfig& config);

/// Trains a fresh model (seeded init) with shuffled mini-batches, loss =
/// cross-entropy + lambda * squared weights, early stopping on validation
/// cross-entropy, keeping the best-validation model. When reversal
/// augmentation is on, the training split is doubled with node-order-reversed
/// copies (same labels). Throws on a single-class split or a non-finite loss.
TrainResult train(const BinaryDataset& train_set, const BinaryDataset& val_set,
                  const TrainConfig& config, const CoarseningHierarchy& hierarchy,
                  const NormalizationTransform& norm, const std::string& bundle,
                  const GcnnArchitecture& arch = GcnnArchitecture{});

}  // namespace fiberparc
