#include "fiberparc/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fiberparc {

namespace {

double loss_at(const GcnnModel& model, const FeatureBatch& batch, const std::vector<int>& labels,
               double lambda) {
  const ForwardResult r = forward(model, batch);
  return softmax_cross_entropy(r.logits, labels).loss + lambda * weight_squared_norm(model);
}

double& dense_entry(DenseParams& d, std::size_t flat) {
  const std::size_t in = static_cast<std::size_t>(d.W.cols());
  return d.W(static_cast<Eigen::Index>(flat / in), static_cast<Eigen::Index>(flat % in));
}

std::vector<std::size_t> pick_indices(std::size_t count, int cap, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count > static_cast<std::size_t>(cap)) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(cap));
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

}  // namespace

std::vector<GradientCheckGroup> finite_difference_check(const GcnnModel& model,
                                                        const FeatureBatch& batch,
                                                        const std::vector<int>& labels, double step,
                                                        double lambda, std::uint64_t seed,
                                                        int max_per_group) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite_difference_check: step must be > 0");
  }

  GcnnModel work = model;
  const ForwardResult base = forward(work, batch);
  const GcnnGradients analytic = backward(work, base.tape, labels, lambda);

  struct Group {
    std::string name;
    std::size_t count;
    std::function<double&(std::size_t)> param;
    std::function<double(std::size_t)> grad;
  };

  const std::size_t conv1_n = work.conv1.parameter_count();
  const std::size_t conv2_n = work.conv2.parameter_count();
  const auto conv_grad = [](const std::vector<Eigen::MatrixXd>& g, const SpectralConvParams& prm,
                            std::size_t flat) {
    const std::size_t m = static_cast<std::size_t>(prm.num_nodes);
    const std::size_t p = static_cast<std::size_t>(prm.in_channels);
    const std::size_t i = flat % m;
    const std::size_t kp = (flat / m) % p;
    const std::size_t k = flat / m / p;
    return g[i](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(kp));
  };

  std::vector<Group> groups;
  groups.push_back({"conv1", conv1_n, [&](std::size_t f) -> double& { return work.conv1.coeff(f); },
                    [&](std::size_t f) { return conv_grad(analytic.conv1_g, work.conv1, f); }});
  groups.push_back({"conv2", conv2_n, [&](std::size_t f) -> double& { return work.conv2.coeff(f); },
                    [&](std::size_t f) { return conv_grad(analytic.conv2_g, work.conv2, f); }});
  groups.push_back({"fc_W", static_cast<std::size_t>(work.fc.W.size()),
                    [&](std::size_t f) -> double& { return dense_entry(work.fc, f); },
                    [&](std::size_t f) {
                      const std::size_t in = static_cast<std::size_t>(work.fc.W.cols());
                      return analytic.fc_W(static_cast<Eigen::Index>(f / in),
                                           static_cast<Eigen::Index>(f % in));
                    }});
  groups.push_back({"fc_b", static_cast<std::size_t>(work.fc.b.size()),
                    [&](std::size_t f) -> double& { return work.fc.b(static_cast<Eigen::Index>(f)); },
                    [&](std::size_t f) { return analytic.fc_b(static_cast<Eigen::Index>(f)); }});
  groups.push_back({"out_W", static_cast<std::size_t>(work.out.W.size()),
                    [&](std::size_t f) -> double& { return dense_entry(work.out, f); },
                    [&](std::size_t f) {
                      const std::size_t in = static_cast<std::size_t>(work.out.W.cols());
                      return analytic.out_W(static_cast<Eigen::Index>(f / in),
                                            static_cast<Eigen::Index>(f % in));
                    }});
  groups.push_back({"out_b", static_cast<std::size_t>(work.out.b.size()),
                    [&](std::size_t f) -> double& { return work.out.b(static_cast<Eigen::Index>(f)); },
                    [&](std::size_t f) { return analytic.out_b(static_cast<Eigen::Index>(f)); }});

  std::mt19937_64 rng(seed);
  std::vector<GradientCheckGroup> report;
  report.reserve(groups.size());
  for (const Group& group : groups) {
    GradientCheckGroup rg;
    rg.name = group.name;
    for (const std::size_t f : pick_indices(group.count, max_per_group, rng)) {
      double& theta = group.param(f);
      const double saved = theta;
      theta = saved + step;
      const double lp = loss_at(work, batch, labels, lambda);
      theta = saved - step;
      const double lm = loss_at(work, batch, labels, lambda);
      theta = saved;
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = group.grad(f);
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      rg.max_rel_error = std::max(rg.max_rel_error, rel);
      ++rg.checked;
    }
    report.push_back(std::move(rg));
  }
  return report;
}

}  // namespace fiberparc
