#include "fiberparc/gcnn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace fiberparc {

FeatureBatch FeatureBatch::zeros(int nodes, int channels, int batch) {
  FeatureBatch fb;
  fb.nodes = nodes;
  fb.channels = channels;
  fb.batch = batch;
  fb.data = Eigen::MatrixXd::Zero(nodes, static_cast<Eigen::Index>(batch) * channels);
  return fb;
}

void FeatureBatch::set_sample(int s, const Eigen::MatrixXd& values) {
  if (s < 0 || s >= batch || values.rows() != nodes || values.cols() != channels) {
    throw std::invalid_argument("FeatureBatch::set_sample: shape mismatch");
  }
  data.block(0, static_cast<Eigen::Index>(s) * channels, nodes, channels) = values;
}

Eigen::MatrixXd FeatureBatch::sample(int s) const {
  if (s < 0 || s >= batch) {
    throw std::out_of_range("FeatureBatch::sample: index out of range");
  }
  return data.block(0, static_cast<Eigen::Index>(s) * channels, nodes, channels);
}

std::size_t SpectralConvParams::parameter_count() const {
  return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels) *
         static_cast<std::size_t>(num_nodes);
}

double& SpectralConvParams::coeff(std::size_t flat) {
  const std::size_t i = flat % static_cast<std::size_t>(num_nodes);
  const std::size_t rest = flat / static_cast<std::size_t>(num_nodes);
  const std::size_t kp = rest % static_cast<std::size_t>(in_channels);
  const std::size_t k = rest / static_cast<std::size_t>(in_channels);
  return g[i](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(kp));
}

double SpectralConvParams::coeff(std::size_t flat) const {
  return const_cast<SpectralConvParams*>(this)->coeff(flat);
}

namespace {

void init_conv(SpectralConvParams& prm, int level, int p, int q, int m, std::mt19937_64& rng) {
  prm.level = level;
  prm.in_channels = p;
  prm.out_channels = q;
  prm.num_nodes = m;
  prm.g.assign(static_cast<size_t>(m), Eigen::MatrixXd::Zero(q, p));
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (static_cast<double>(p) * m)));
  for (int k = 0; k < q; ++k) {
    for (int kp = 0; kp < p; ++kp) {
      for (int i = 0; i < m; ++i) {
        prm.g[static_cast<size_t>(i)](k, kp) = dist(rng);
      }
    }
  }
}

void init_dense(DenseParams& d, int out, int in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(in)));
  d.W.resize(out, in);
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) {
      d.W(r, c) = dist(rng);
    }
  }
  d.b = Eigen::VectorXd::Zero(out);
}

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

}  // namespace

GcnnModel init_model(CoarseningHierarchy hierarchy, std::uint64_t seed,
                     const NormalizationTransform& norm, const std::string& bundle,
                     const GcnnArchitecture& arch) {
  if (hierarchy.num_levels() < 3) {
    throw std::invalid_argument("init_model: hierarchy too shallow, need at least 3 levels");
  }
  if (hierarchy.num_input_nodes != arch.points || hierarchy.num_levels() != arch.levels) {
    throw std::invalid_argument("init_model: architecture does not match hierarchy");
  }
  GcnnModel model;
  model.arch = arch;
  model.hierarchy = std::move(hierarchy);
  model.normalization = norm;
  model.bundle = bundle;

  const int k0 = model.hierarchy.levels[0].graph.num_nodes;
  const int k1 = model.hierarchy.levels[1].graph.num_nodes;
  const int k2 = model.hierarchy.levels[2].graph.num_nodes;
  std::mt19937_64 rng(seed);
  init_conv(model.conv1, 0, 3, arch.conv1_channels, k0, rng);
  init_conv(model.conv2, 1, arch.conv1_channels, arch.conv2_channels, k1, rng);
  init_dense(model.fc, arch.fc_size, k2 * arch.conv2_channels, rng);
  init_dense(model.out, arch.num_classes, arch.fc_size, rng);
  return model;
}

FeatureBatch spectral_conv_forward(const SpectralConvParams& params, const SpectralBasis& basis,
                                   const FeatureBatch& input, Eigen::MatrixXd* xhatT_out) {
  const int m = params.num_nodes;
  const int p = params.in_channels;
  const int q = params.out_channels;
  const int B = input.batch;
  if (input.channels != p || input.nodes != m || basis.eigenvectors.rows() != m) {
    throw std::invalid_argument("spectral_conv_forward: shape mismatch");
  }

  Eigen::MatrixXd xhatT = input.data.transpose() * basis.eigenvectors;  // (B*p) x m
  Eigen::MatrixXd yhatT(static_cast<Eigen::Index>(B) * q, m);
  for (int i = 0; i < m; ++i) {
    Eigen::Map<const Eigen::MatrixXd> x(xhatT.col(i).data(), p, B);
    Eigen::Map<Eigen::MatrixXd> y(yhatT.col(i).data(), q, B);
    y.noalias() = params.g[static_cast<size_t>(i)] * x;
  }

  FeatureBatch out;
  out.nodes = m;
  out.channels = q;
  out.batch = B;
  out.data.noalias() = basis.eigenvectors * yhatT.transpose();
  if (xhatT_out != nullptr) *xhatT_out = std::move(xhatT);
  return out;
}

FeatureBatch relu(const FeatureBatch& input) {
  FeatureBatch out = input;
  out.data = out.data.cwiseMax(0.0);
  return out;
}

std::pair<FeatureBatch, Eigen::MatrixXi> graph_max_pool(const CoarseningHierarchy& h, int level,
                                                        const FeatureBatch& input) {
  if (level < 0 || level + 1 >= h.num_levels()) {
    throw std::out_of_range("graph_max_pool: level out of range");
  }
  const int m = h.levels[static_cast<size_t>(level)].graph.num_nodes;
  if (input.nodes != m || m % 2 != 0) {
    throw std::invalid_argument("graph_max_pool: input length does not match level size");
  }
  const int half = m / 2;
  FeatureBatch out = FeatureBatch::zeros(half, input.channels, input.batch);
  Eigen::MatrixXi arg(half, input.data.cols());
  for (Eigen::Index col = 0; col < input.data.cols(); ++col) {
    for (int j = 0; j < half; ++j) {
      const double a = input.data(2 * j, col);
      const double b = input.data(2 * j + 1, col);
      if (b > a) {
        out.data(j, col) = b;
        arg(j, col) = 2 * j + 1;
      } else {
        out.data(j, col) = a;
        arg(j, col) = 2 * j;
      }
    }
  }
  return {std::move(out), std::move(arg)};
}

Eigen::MatrixXd dense_forward(const DenseParams& params, const Eigen::MatrixXd& input) {
  if (input.rows() != params.W.cols()) {
    throw std::invalid_argument("dense_forward: input length does not match weight shape");
  }
  return (params.W * input).colwise() + params.b;
}

SoftmaxResult softmax_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  const Eigen::Index B = logits.rows();
  const Eigen::Index C = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != B) {
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  }
  SoftmaxResult res;
  res.probs.resize(B, C);
  double total = 0.0;
  for (Eigen::Index s = 0; s < B; ++s) {
    const int label = labels[static_cast<size_t>(s)];
    if (label < 0 || label >= C) {
      throw std::invalid_argument("softmax_cross_entropy: label out of range");
    }
    const double mx = logits.row(s).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(s).array() - mx).exp().transpose();
    const double sum = e.sum();
    res.probs.row(s) = (e / sum).transpose();
    total += std::log(sum) - (logits(s, label) - mx);
  }
  res.loss = B > 0 ? total / static_cast<double>(B) : 0.0;
  return res;
}

ForwardResult forward(const GcnnModel& model, const FeatureBatch& batch) {
  const auto& lv = model.hierarchy.levels;
  if (batch.nodes != lv[0].graph.num_nodes || batch.channels != model.conv1.in_channels) {
    throw std::invalid_argument("forward: batch shape does not match model");
  }

  ForwardResult r;
  ForwardTape& t = r.tape;
  t.batch = batch.batch;

  FeatureBatch z1 = spectral_conv_forward(model.conv1, lv[0].basis, batch, &t.xhat1T);
  FeatureBatch a1 = relu(z1);
  t.z1 = std::move(z1.data);
  auto [p1, am1] = graph_max_pool(model.hierarchy, 0, a1);
  t.argmax1 = std::move(am1);

  FeatureBatch z2 = spectral_conv_forward(model.conv2, lv[1].basis, p1, &t.xhat2T);
  FeatureBatch a2 = relu(z2);
  t.z2 = std::move(z2.data);
  auto [p2, am2] = graph_max_pool(model.hierarchy, 1, a2);
  t.argmax2 = std::move(am2);

  // Flatten node-major then channel: flat[node*C + c] = p2(node, c).
  const int k2 = p2.nodes;
  const int C2 = p2.channels;
  const int B = p2.batch;
  t.flat.resize(static_cast<Eigen::Index>(k2) * C2, B);
  for (int s = 0; s < B; ++s) {
    Eigen::Map<Eigen::MatrixXd>(t.flat.col(s).data(), C2, k2) =
        p2.data.block(0, static_cast<Eigen::Index>(s) * C2, k2, C2).transpose();
  }

  const Eigen::MatrixXd zfc = dense_forward(model.fc, t.flat);
  t.hfc = zfc.cwiseMax(0.0);
  r.logits = dense_forward(model.out, t.hfc).transpose();
  t.logits = r.logits;
  return r;
}

GcnnGradients backward(const GcnnModel& model, const ForwardTape& tape,
                       const std::vector<int>& labels, double lambda) {
  const int B = tape.batch;
  if (B <= 0 || static_cast<int>(labels.size()) != B) {
    throw std::invalid_argument("backward: label count does not match tape batch");
  }
  if (tape.logits.rows() != B || tape.logits.cols() != model.arch.num_classes) {
    throw std::invalid_argument("backward: tape does not match model");
  }

  const SoftmaxResult sm = softmax_cross_entropy(tape.logits, labels);
  Eigen::MatrixXd dlogitsT = sm.probs.transpose();  // classes x B
  for (int s = 0; s < B; ++s) {
    dlogitsT(labels[static_cast<size_t>(s)], s) -= 1.0;
  }
  dlogitsT /= static_cast<double>(B);

  GcnnGradients grad;
  grad.out_W.noalias() = dlogitsT * tape.hfc.transpose();
  grad.out_W += 2.0 * lambda * model.out.W;
  grad.out_b = dlogitsT.rowwise().sum();

  Eigen::MatrixXd dhfc = model.out.W.transpose() * dlogitsT;
  Eigen::MatrixXd dzfc = dhfc.cwiseProduct(relu_mask(tape.hfc));

  grad.fc_W.noalias() = dzfc * tape.flat.transpose();
  grad.fc_W += 2.0 * lambda * model.fc.W;
  grad.fc_b = dzfc.rowwise().sum();

  Eigen::MatrixXd dflat = model.fc.W.transpose() * dzfc;  // (k2*C2) x B

  const int k2 = model.hierarchy.levels[2].graph.num_nodes;
  const int k1 = model.hierarchy.levels[1].graph.num_nodes;
  const int k0 = model.hierarchy.levels[0].graph.num_nodes;
  const int C2 = model.arch.conv2_channels;
  const int C1 = model.arch.conv1_channels;

  Eigen::MatrixXd dp2(k2, static_cast<Eigen::Index>(B) * C2);
  for (int s = 0; s < B; ++s) {
    dp2.block(0, static_cast<Eigen::Index>(s) * C2, k2, C2) =
        Eigen::Map<const Eigen::MatrixXd>(dflat.col(s).data(), C2, k2).transpose();
  }

  Eigen::MatrixXd da2 = Eigen::MatrixXd::Zero(k1, static_cast<Eigen::Index>(B) * C2);
  for (Eigen::Index col = 0; col < dp2.cols(); ++col) {
    for (int j = 0; j < k2; ++j) {
      da2(tape.argmax2(j, col), col) += dp2(j, col);
    }
  }
  Eigen::MatrixXd dz2 = da2.cwiseProduct(relu_mask(tape.z2));

  const Eigen::MatrixXd& phi1 = model.hierarchy.levels[1].basis.eigenvectors;
  Eigen::MatrixXd dyhat2T = dz2.transpose() * phi1;  // (B*C2) x k1
  grad.conv2_g.assign(static_cast<size_t>(k1), Eigen::MatrixXd());
  Eigen::MatrixXd dxhat2T(static_cast<Eigen::Index>(B) * C1, k1);
  for (int i = 0; i < k1; ++i) {
    Eigen::Map<const Eigen::MatrixXd> dy(dyhat2T.col(i).data(), C2, B);
    Eigen::Map<const Eigen::MatrixXd> x(tape.xhat2T.col(i).data(), C1, B);
    auto& gi = grad.conv2_g[static_cast<size_t>(i)];
    gi.noalias() = dy * x.transpose();
    gi += 2.0 * lambda * model.conv2.g[static_cast<size_t>(i)];
    Eigen::Map<Eigen::MatrixXd> dx(dxhat2T.col(i).data(), C1, B);
    dx.noalias() = model.conv2.g[static_cast<size_t>(i)].transpose() * dy;
  }
  Eigen::MatrixXd dp1 = phi1 * dxhat2T.transpose();  // k1 x (B*C1)

  Eigen::MatrixXd da1 = Eigen::MatrixXd::Zero(k0, static_cast<Eigen::Index>(B) * C1);
  for (Eigen::Index col = 0; col < dp1.cols(); ++col) {
    for (int j = 0; j < k1; ++j) {
      da1(tape.argmax1(j, col), col) += dp1(j, col);
    }
  }
  Eigen::MatrixXd dz1 = da1.cwiseProduct(relu_mask(tape.z1));

  const Eigen::MatrixXd& phi0 = model.hierarchy.levels[0].basis.eigenvectors;
  Eigen::MatrixXd dyhat1T = dz1.transpose() * phi0;  // (B*C1) x k0
  const int Cin = model.conv1.in_channels;
  grad.conv1_g.assign(static_cast<size_t>(k0), Eigen::MatrixXd());
  for (int i = 0; i < k0; ++i) {
    Eigen::Map<const Eigen::MatrixXd> dy(dyhat1T.col(i).data(), C1, B);
    Eigen::Map<const Eigen::MatrixXd> x(tape.xhat1T.col(i).data(), Cin, B);
    auto& gi = grad.conv1_g[static_cast<size_t>(i)];
    gi.noalias() = dy * x.transpose();
    gi += 2.0 * lambda * model.conv1.g[static_cast<size_t>(i)];
  }
  return grad;
}

double weight_squared_norm(const GcnnModel& model) {
  double total = 0.0;
  for (const auto& gi : model.conv1.g) total += gi.squaredNorm();
  for (const auto& gi : model.conv2.g) total += gi.squaredNorm();
  total += model.fc.W.squaredNorm();
  total += model.out.W.squaredNorm();
  return total;
}

Eigen::MatrixXd streamline_to_padded_coords(const Streamline& s, const CoarseningHierarchy& h,
                                            const NormalizationTransform& norm) {
  const Streamline r = apply_normalization(norm, resample_uniform(s, h.num_input_nodes));
  Eigen::MatrixXd coords(h.num_input_nodes, 3);
  for (int i = 0; i < h.num_input_nodes; ++i) {
    const Point3& p = r.points[static_cast<size_t>(i)];
    coords(i, 0) = p.x;
    coords(i, 1) = p.y;
    coords(i, 2) = p.z;
  }
  return permute_signal(h, coords);
}

}  // namespace fiberparc
