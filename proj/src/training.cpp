#include "fiberparc/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace fiberparc {

namespace {

struct Aabb {
  std::array<double, 3> lo{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  std::array<double, 3> hi{-std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity()};

  void grow(const Point3& p) {
    lo[0] = std::min(lo[0], p.x);
    lo[1] = std::min(lo[1], p.y);
    lo[2] = std::min(lo[2], p.z);
    hi[0] = std::max(hi[0], p.x);
    hi[1] = std::max(hi[1], p.y);
    hi[2] = std::max(hi[2], p.z);
  }

  bool intersects(const Aabb& o) const {
    for (int a = 0; a < 3; ++a) {
      if (lo[a] > o.hi[a] || o.lo[a] > hi[a]) return false;
    }
    return true;
  }
};

Aabb bundle_box(const StreamlineSet& all, const std::vector<std::size_t>& members) {
  Aabb box;
  for (const std::size_t idx : members) {
    for (const Point3& p : all.streamlines[idx].points) box.grow(p);
  }
  return box;
}

}  // namespace

BinaryDataset assemble_binary_dataset(const StreamlineSet& all, const std::string& target_bundle,
                                      const CoarseningHierarchy& h,
                                      const NormalizationTransform& norm, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_bundle;
  for (std::size_t i = 0; i < all.streamlines.size(); ++i) {
    if (!all.streamlines[i].label.empty()) by_bundle[all.streamlines[i].label].push_back(i);
  }
  const auto target_it = by_bundle.find(target_bundle);
  if (target_it == by_bundle.end() || target_it->second.empty()) {
    throw std::invalid_argument("assemble_binary_dataset: target bundle absent or empty: " +
                                target_bundle);
  }
  const std::vector<std::size_t>& positives = target_it->second;
  const Aabb target_box = bundle_box(all, positives);

  std::vector<std::size_t> neighbor_pool;
  std::vector<std::size_t> random_pool;
  for (const auto& [name, members] : by_bundle) {
    if (name == target_bundle) continue;
    auto& pool = bundle_box(all, members).intersects(target_box) ? neighbor_pool : random_pool;
    pool.insert(pool.end(), members.begin(), members.end());
  }

  std::mt19937_64 rng(seed);
  const auto take = [&rng](std::vector<std::size_t>& pool, std::size_t want) {
    std::shuffle(pool.begin(), pool.end(), rng);
    if (pool.size() > want) pool.resize(want);
  };
  take(neighbor_pool, positives.size());
  take(random_pool, positives.size());

  BinaryDataset ds;
  ds.samples.reserve(positives.size() + neighbor_pool.size() + random_pool.size());
  const auto add = [&](std::size_t idx, int label) {
    const Streamline& s = all.streamlines[idx];
    ds.samples.push_back({streamline_to_padded_coords(s, h, norm), label, s.id});
  };
  for (const std::size_t idx : positives) add(idx, 1);
  for (const std::size_t idx : neighbor_pool) add(idx, 0);
  for (const std::size_t idx : random_pool) add(idx, 0);
  ds.num_positive = static_cast<int>(positives.size());
  ds.num_negative = static_cast<int>(neighbor_pool.size() + random_pool.size());
  return ds;
}

OptimizerState init_optimizer_state(const GcnnModel& model) {
  OptimizerState st;
  const auto conv_zeros = [](const SpectralConvParams& prm) {
    return std::vector<Eigen::MatrixXd>(
        prm.g.size(), Eigen::MatrixXd::Zero(prm.out_channels, prm.in_channels));
  };
  st.conv1_m = conv_zeros(model.conv1);
  st.conv1_v = conv_zeros(model.conv1);
  st.conv2_m = conv_zeros(model.conv2);
  st.conv2_v = conv_zeros(model.conv2);
  st.fc_Wm = Eigen::MatrixXd::Zero(model.fc.W.rows(), model.fc.W.cols());
  st.fc_Wv = st.fc_Wm;
  st.out_Wm = Eigen::MatrixXd::Zero(model.out.W.rows(), model.out.W.cols());
  st.out_Wv = st.out_Wm;
  st.fc_bm = Eigen::VectorXd::Zero(model.fc.b.size());
  st.fc_bv = st.fc_bm;
  st.out_bm = Eigen::VectorXd::Zero(model.out.b.size());
  st.out_bv = st.out_bm;
  return st;
}

void optimizer_step(OptimizerState& state, GcnnModel& model, const GcnnGradients& grads,
                    const TrainConfig& config) {
  if (grads.conv1_g.size() != model.conv1.g.size() || grads.conv2_g.size() != model.conv2.g.size() ||
      grads.fc_W.rows() != model.fc.W.rows() || grads.fc_W.cols() != model.fc.W.cols() ||
      grads.out_W.rows() != model.out.W.rows() || grads.out_W.cols() != model.out.W.cols() ||
      grads.fc_b.size() != model.fc.b.size() || grads.out_b.size() != model.out.b.size()) {
    throw std::invalid_argument("optimizer_step: gradient shapes do not match model");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    theta.array() -=
        config.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.epsilon);
  };
  for (std::size_t i = 0; i < model.conv1.g.size(); ++i) {
    update(model.conv1.g[i], grads.conv1_g[i], state.conv1_m[i], state.conv1_v[i]);
  }
  for (std::size_t i = 0; i < model.conv2.g.size(); ++i) {
    update(model.conv2.g[i], grads.conv2_g[i], state.conv2_m[i], state.conv2_v[i]);
  }
  update(model.fc.W, grads.fc_W, state.fc_Wm, state.fc_Wv);
  update(model.fc.b, grads.fc_b, state.fc_bm, state.fc_bv);
  update(model.out.W, grads.out_W, state.out_Wm, state.out_Wv);
  update(model.out.b, grads.out_b, state.out_bm, state.out_bv);
}

namespace {

void check_two_classes(const BinaryDataset& ds, const char* which) {
  if (ds.samples.empty()) {
    throw std::invalid_argument(std::string("train: ") + which + " dataset is empty");
  }
  bool has0 = false;
  bool has1 = false;
  for (const DatasetSample& s : ds.samples) {
    (s.label == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1) {
    throw std::invalid_argument(std::string("train: ") + which +
                                " dataset does not contain both classes");
  }
}

}  // namespace

TrainResult train(const BinaryDataset& train_set, const BinaryDataset& val_set,
                  const TrainConfig& config, const CoarseningHierarchy& hierarchy,
                  const NormalizationTransform& norm, const std::string& bundle,
                  const GcnnArchitecture& arch) {
  if (!(config.learning_rate > 0.0) || config.batch_size < 1 || config.max_epochs < 1 ||
      config.patience < 1 || config.patience > config.max_epochs || config.lambda < 0.0) {
    throw std::invalid_argument("train: invalid configuration");
  }
  check_two_classes(train_set, "training");
  check_two_classes(val_set, "validation");

  GcnnModel model = init_model(hierarchy, config.seed, norm, bundle, arch);
  const int k0 = model.hierarchy.levels[0].graph.num_nodes;

  std::vector<DatasetSample> samples = train_set.samples;
  if (config.reversal_augmentation) {
    const std::vector<int> rev = reversal_permutation(model.hierarchy);
    const std::size_t base = samples.size();
    samples.reserve(2 * base);
    for (std::size_t i = 0; i < base; ++i) {
      DatasetSample r = samples[i];
      for (int slot = 0; slot < k0; ++slot) {
        r.coords.row(slot) = samples[i].coords.row(rev[static_cast<std::size_t>(slot)]);
      }
      samples.push_back(std::move(r));
    }
  }

  OptimizerState opt = init_optimizer_state(model);
  std::mt19937_64 shuffle_rng(config.seed + 1);  // init_model consumed config.seed
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const auto eval_validation = [&](const GcnnModel& m, EpochStats& st) {
    double ce_sum = 0.0;
    std::size_t correct = 0;
    const std::size_t n = val_set.samples.size();
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, begin + static_cast<std::size_t>(config.batch_size));
      const int B = static_cast<int>(end - begin);
      FeatureBatch fb = FeatureBatch::zeros(k0, 3, B);
      std::vector<int> labels(static_cast<std::size_t>(B));
      for (int b = 0; b < B; ++b) {
        const DatasetSample& s = val_set.samples[begin + static_cast<std::size_t>(b)];
        fb.set_sample(b, s.coords);
        labels[static_cast<std::size_t>(b)] = s.label;
      }
      const ForwardResult fr = forward(m, fb);
      const SoftmaxResult sm = softmax_cross_entropy(fr.logits, labels);
      ce_sum += sm.loss * B;
      for (int b = 0; b < B; ++b) {
        const int pred = sm.probs(b, 1) >= 0.5 ? 1 : 0;
        if (pred == labels[static_cast<std::size_t>(b)]) ++correct;
      }
    }
    st.val_loss = ce_sum / static_cast<double>(n);
    st.val_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  };

  TrainReport report;
  GcnnModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_improve = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const int B = static_cast<int>(end - begin);
      FeatureBatch fb = FeatureBatch::zeros(k0, 3, B);
      std::vector<int> labels(static_cast<std::size_t>(B));
      for (int b = 0; b < B; ++b) {
        const DatasetSample& s = samples[order[begin + static_cast<std::size_t>(b)]];
        fb.set_sample(b, s.coords);
        labels[static_cast<std::size_t>(b)] = s.label;
      }
      const ForwardResult fr = forward(model, fb);
      const SoftmaxResult sm = softmax_cross_entropy(fr.logits, labels);
      const double objective = sm.loss + config.lambda * weight_squared_norm(model);
      if (!std::isfinite(objective)) {
        throw std::runtime_error("train: loss diverged (not finite) at epoch " +
                                 std::to_string(epoch));
      }
      loss_sum += objective * B;
      const GcnnGradients grads = backward(model, fr.tape, labels, config.lambda);
      optimizer_step(opt, model, grads, config);
    }

    EpochStats st;
    st.train_loss = loss_sum / static_cast<double>(order.size());
    eval_validation(model, st);
    if (!std::isfinite(st.val_loss)) {
      throw std::runtime_error("train: validation loss diverged (not finite) at epoch " +
                               std::to_string(epoch));
    }
    report.epochs.push_back(st);
    report.stop_epoch = epoch;
    if (config.log != nullptr) {
      (*config.log) << "epoch " << epoch << " train_loss " << st.train_loss << " val_loss "
                    << st.val_loss << " val_acc " << st.val_accuracy << "\n";
    }
    if (st.val_loss < best_val) {
      best_val = st.val_loss;
      best = model;
      report.best_epoch = epoch;
      epochs_since_improve = 0;
    } else if (++epochs_since_improve >= config.patience) {
      break;
    }
  }
  return {std::move(best), std::move(report)};
}

}  // namespace fiberparc
