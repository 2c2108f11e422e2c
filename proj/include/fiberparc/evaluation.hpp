#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fiberparc/gcnn.hpp"
#include "fiberparc/streamline.hpp"

namespace fiberparc {

struct Prediction {
  std::uint64_t id = 0;
  double probability = 0.0;  // softmax probability of the positive class
  int label = 0;             // 1 iff probability >= threshold
};

struct PredictionResult {
  std::vector<Prediction> predictions;  // set order, minus skipped
  std::vector<std::uint64_t> skipped;   // degenerate streamlines (zero arc length)
};

/// Resamples, normalizes with the model's stored transform, pads, and
/// forward-passes every streamline in batches.
PredictionResult predict_labels(const GcnnModel& model, const StreamlineSet& set,
                                double threshold = 0.5);

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;
};

struct LabeledId {
  std::uint64_t id = 0;
  int label = 0;
};

/// Tallies the 2x2 confusion table; predicted and truth must list the same
/// ids in the same order.
ConfusionCounts confusion_counts(const std::vector<LabeledId>& predicted,
                                 const std::vector<LabeledId>& truth);

struct PrecisionRecall {
  std::optional<double> precision;  // empty when TP+FP = 0
  std::optional<double> recall;     // empty when TP+FN = 0
};

PrecisionRecall precision_recall(const ConfusionCounts& c);

struct VisitationMap {
  double voxel_size = 1.0;
  std::set<std::array<long long, 3>> voxels;
};

/// Supersamples every segment at arc-length steps <= v/2 (endpoints
/// included) and marks voxel (floor(x/v), floor(y/v), floor(z/v)) for each
/// sample point. Throws on v <= 0.
VisitationMap voxelize_streamlines(const StreamlineSet& set, double voxel_size);

/// 2|A&B| / (|A|+|B|); both maps empty -> 1.0. Throws on voxel-size mismatch.
double dice_score(const VisitationMap& a, const VisitationMap& b);

struct SubjectScore {
  std::string subject;
  ConfusionCounts counts;
  std::optional<double> precision;
  std::optional<double> recall;
  double dice = 0.0;
};

struct BundleEvaluation {
  std::string bundle;
  std::vector<SubjectScore> subjects;
  std::optional<double> mean_precision, sd_precision;  // over subjects where defined
  std::optional<double> mean_recall, sd_recall;
  double mean_dice = 0.0, sd_dice = 0.0;
};

struct EvaluationReport {
  std::vector<BundleEvaluation> bundles;
};

struct SubjectSet {
  std::string name;
  StreamlineSet set;
};

/// Per (model, subject): predict, confusion against the truth labels, Dice
/// between the predicted-positive visitation map and the ground-truth bundle
/// map; aggregates use the population standard deviation across subjects.
/// Throws when a model's bundle never appears in the truth labels.
EvaluationReport evaluate_report(const std::vector<GcnnModel>& models,
                                 const std::vector<SubjectSet>& subjects, double voxel_size,
                                 double threshold = 0.5);

/// One line per (bundle, subject): `bundle subject TP FP FN TN precision
/// recall dice`, then `bundle MEAN precision recall dice` and `bundle SD
/// ...`; floats at 6 significant digits, undefined values as `nan`.
std::string report_to_text(const EvaluationReport& report);

}  // namespace fiberparc
