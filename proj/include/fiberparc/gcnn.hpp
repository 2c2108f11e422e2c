#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fiberparc/coarsening.hpp"
#include "fiberparc/streamline.hpp"

namespace fiberparc {

/// Mini-batch of node signals on one hierarchy level. Column s*channels + c
/// holds sample s, channel c, so each sample's node-by-channel block is
/// contiguous and the Fourier transform of the whole batch is one GEMM.
struct FeatureBatch {
  int nodes = 0;
  int channels = 0;
  int batch = 0;
  Eigen::MatrixXd data;  // nodes x (batch*channels)

  static FeatureBatch zeros(int nodes, int channels, int batch);
  void set_sample(int s, const Eigen::MatrixXd& values);  // values: nodes x channels
  Eigen::MatrixXd sample(int s) const;
};

/// Spectral filter bank for one convolution layer: one coefficient per
/// (output channel, input channel, eigen-index) triple. g[i] is the
/// out_channels x in_channels mixing matrix at eigen-index i; the flat
/// parameter order (used by init, serialization, and gradient indexing) is
/// (out, in, eigen-index), slowest to fastest.
struct SpectralConvParams {
  int level = 0;
  int in_channels = 0;
  int out_channels = 0;
  int num_nodes = 0;                // padded node count of the level
  std::vector<Eigen::MatrixXd> g;   // num_nodes entries, each out x in

  std::size_t parameter_count() const;
  double& coeff(std::size_t flat);
  double coeff(std::size_t flat) const;
};

struct DenseParams {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;  // out
};

struct GcnnArchitecture {
  int points = 100;        // real nodes of the finest path graph
  int levels = 3;          // hierarchy depth (two pooling stages)
  int conv1_channels = 32;
  int conv2_channels = 64;
  int fc_size = 512;
  int num_classes = 2;
};

struct GcnnModel {
  GcnnArchitecture arch;
  CoarseningHierarchy hierarchy;
  SpectralConvParams conv1;  // 3 -> conv1_channels on level 0
  SpectralConvParams conv2;  // conv1_channels -> conv2_channels on level 1
  DenseParams fc;            // (level-2 padded size * conv2_channels) -> fc_size
  DenseParams out;           // fc_size -> num_classes
  NormalizationTransform normalization;
  std::string bundle;
};

/// Intermediates cached by forward for the exact backward pass.
struct ForwardTape {
  int batch = 0;
  Eigen::MatrixXd xhat1T;   // (batch*3) x k0, Fourier transform of the input
  Eigen::MatrixXd z1;       // k0 x (batch*c1), conv1 pre-activation
  Eigen::MatrixXi argmax1;  // k1 x (batch*c1), winning fine row per pooled slot
  Eigen::MatrixXd xhat2T;   // (batch*c1) x k1
  Eigen::MatrixXd z2;       // k1 x (batch*c2)
  Eigen::MatrixXi argmax2;  // k2 x (batch*c2)
  Eigen::MatrixXd flat;     // (k2*c2) x batch, node-major then channel
  Eigen::MatrixXd hfc;      // fc_size x batch, post-ReLU
  Eigen::MatrixXd logits;   // batch x classes
};

struct GcnnGradients {
  std::vector<Eigen::MatrixXd> conv1_g;
  std::vector<Eigen::MatrixXd> conv2_g;
  Eigen::MatrixXd fc_W;
  Eigen::VectorXd fc_b;
  Eigen::MatrixXd out_W;
  Eigen::VectorXd out_b;
};

struct SoftmaxResult {
  double loss = 0.0;          // mean over the batch of -log p(label)
  Eigen::MatrixXd probs;      // batch x classes, rows sum to 1
};

struct ForwardResult {
  Eigen::MatrixXd logits;  // batch x classes
  ForwardTape tape;
};

/// Initializes a model over the hierarchy: spectral coefficients from
/// N(0, 2/(p*m)), dense weights from N(0, 2/in), biases zero, all drawn in
/// flat parameter order from a generator seeded with seed. Throws
/// std::invalid_argument if the hierarchy has fewer than 3 levels or does
/// not match arch.
GcnnModel init_model(CoarseningHierarchy hierarchy, std::uint64_t seed,
                     const NormalizationTransform& norm, const std::string& bundle,
                     const GcnnArchitecture& arch = GcnnArchitecture{});

/// Per output channel k: f_k = sum_{k'} Phi diag(g[.](k,k')) Phi^T f_{k'}.
/// Pre-activation only. if xhatT is non-null it receives the transposed
/// Fourier transform of the input, (batch*p) x m, for reuse in backward.
FeatureBatch spectral_conv_forward(const SpectralConvParams& params, const SpectralBasis& basis,
                                   const FeatureBatch& input, Eigen::MatrixXd* xhatT = nullptr);

FeatureBatch relu(const FeatureBatch& input);

/// Stride-2 max over the rearranged binary-tree order of the given level;
/// ties go to the lower index. Returns the pooled batch and the absolute
/// fine row index of every winner.
std::pair<FeatureBatch, Eigen::MatrixXi> graph_max_pool(const CoarseningHierarchy& h, int level,
                                                        const FeatureBatch& input);

/// W*x + b per sample column. input: in x batch, result: out x batch.
Eigen::MatrixXd dense_forward(const DenseParams& params, const Eigen::MatrixXd& input);

/// Numerically stable softmax + mean cross-entropy. logits: batch x classes.
SoftmaxResult softmax_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

/// conv1 -> ReLU -> pool -> conv2 -> ReLU -> pool -> flatten -> FC -> ReLU
/// -> output logits. batch must be k0 x 3 per sample.
ForwardResult forward(const GcnnModel& model, const FeatureBatch& batch);

/// Exact gradients of mean cross-entropy + lambda * (sum of squared weights,
/// biases excluded) with respect to every parameter.
GcnnGradients backward(const GcnnModel& model, const ForwardTape& tape,
                       const std::vector<int>& labels, double lambda);

/// Sum of squared weight entries (spectral coefficients and dense W, biases
/// excluded); the L2 penalty is lambda times this.
double weight_squared_norm(const GcnnModel& model);

/// Resamples to the hierarchy's real node count, applies the normalization,
/// and scatters the n x 3 coordinate matrix into the padded layout (k x 3).
Eigen::MatrixXd streamline_to_padded_coords(const Streamline& s, const CoarseningHierarchy& h,
                                            const NormalizationTransform& norm);

}  // namespace fiberparc
