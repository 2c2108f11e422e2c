#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberparc/gcnn.hpp"

namespace fiberparc {

struct GradientCheckGroup {
  std::string name;
  int checked = 0;
  double max_rel_error = 0.0;
};

/// Central-difference verification of backward. Perturbs each sampled
/// parameter by +-step, recomputes the full loss (mean cross-entropy +
/// lambda * sum of squared weights), and compares (L+ - L-) / (2*step)
/// against the analytic gradient with relative error
/// |a - n| / max(|a|, |n|, 1e-8). Each parameter group is subsampled to at
/// most max_per_group entries, deterministically under seed; groups at or
/// below the cap are checked exhaustively. Throws on step <= 0.
std::vector<GradientCheckGroup> finite_difference_check(const GcnnModel& model,
                                                        const FeatureBatch& batch,
                                                        const std::vector<int>& labels, double step,
                                                        double lambda, std::uint64_t seed,
                                                        int max_per_group = 200);

}  // namespace fiberparc
