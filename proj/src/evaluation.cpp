#include "fiberparc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fiberparc {

PredictionResult predict_labels(const GcnnModel& model, const StreamlineSet& set,
                                double threshold) {
  PredictionResult res;
  std::vector<const Streamline*> usable;
  usable.reserve(set.streamlines.size());
  for (const Streamline& s : set.streamlines) {
    if (s.points.size() < 2 || !(arc_length(s) > 0.0)) {
      res.skipped.push_back(s.id);
    } else {
      usable.push_back(&s);
    }
  }

  const int k0 = model.hierarchy.levels[0].graph.num_nodes;
  constexpr std::size_t kBatch = 64;
  for (std::size_t begin = 0; begin < usable.size(); begin += kBatch) {
    const std::size_t end = std::min(usable.size(), begin + kBatch);
    const int B = static_cast<int>(end - begin);
    FeatureBatch fb = FeatureBatch::zeros(k0, 3, B);
    for (int b = 0; b < B; ++b) {
      fb.set_sample(b, streamline_to_padded_coords(*usable[begin + static_cast<std::size_t>(b)],
                                                   model.hierarchy, model.normalization));
    }
    const ForwardResult fr = forward(model, fb);
    const std::vector<int> dummy(static_cast<std::size_t>(B), 0);
    const SoftmaxResult sm = softmax_cross_entropy(fr.logits, dummy);
    for (int b = 0; b < B; ++b) {
      const double p1 = sm.probs(b, 1);
      res.predictions.push_back(
          {usable[begin + static_cast<std::size_t>(b)]->id, p1, p1 >= threshold ? 1 : 0});
    }
  }
  return res;
}

ConfusionCounts confusion_counts(const std::vector<LabeledId>& predicted,
                                 const std::vector<LabeledId>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("confusion_counts: length mismatch");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].id != truth[i].id) {
      throw std::invalid_argument("confusion_counts: id mismatch at position " +
                                  std::to_string(i));
    }
    const bool pred = predicted[i].label == 1;
    const bool pos = truth[i].label == 1;
    if (pred && pos) ++c.tp;
    if (pred && !pos) ++c.fp;
    if (!pred && pos) ++c.fn;
    if (!pred && !pos) ++c.tn;
  }
  return c;
}

PrecisionRecall precision_recall(const ConfusionCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) {
    pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn > 0) {
    pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  return pr;
}

VisitationMap voxelize_streamlines(const StreamlineSet& set, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw std::invalid_argument("voxelize_streamlines: voxel size must be > 0");
  }
  VisitationMap map;
  map.voxel_size = voxel_size;
  const auto mark = [&](double x, double y, double z) {
    map.voxels.insert({static_cast<long long>(std::floor(x / voxel_size)),
                       static_cast<long long>(std::floor(y / voxel_size)),
                       static_cast<long long>(std::floor(z / voxel_size))});
  };
  for (const Streamline& s : set.streamlines) {
    for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
      const Point3& a = s.points[i];
      const Point3& b = s.points[i + 1];
      const double len = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) +
                                   (b.z - a.z) * (b.z - a.z));
      const int nsub = std::max(1, static_cast<int>(std::ceil(len / (voxel_size / 2.0))));
      for (int t = 0; t <= nsub; ++t) {
        const double u = static_cast<double>(t) / static_cast<double>(nsub);
        mark(a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u, a.z + (b.z - a.z) * u);
      }
    }
    if (s.points.size() == 1) {
      mark(s.points[0].x, s.points[0].y, s.points[0].z);
    }
  }
  return map;
}

double dice_score(const VisitationMap& a, const VisitationMap& b) {
  if (a.voxel_size != b.voxel_size) {
    throw std::invalid_argument("dice_score: voxel size mismatch");
  }
  if (a.voxels.empty() && b.voxels.empty()) {
    return 1.0;
  }
  const VisitationMap& small = a.voxels.size() <= b.voxels.size() ? a : b;
  const VisitationMap& large = a.voxels.size() <= b.voxels.size() ? b : a;
  std::size_t inter = 0;
  for (const auto& v : small.voxels) {
    inter += large.voxels.count(v);
  }
  return 2.0 * static_cast<double>(inter) /
         static_cast<double>(a.voxels.size() + b.voxels.size());
}

namespace {

struct Running {
  double sum = 0.0;
  double sumsq = 0.0;
  int n = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return sum / n; }
  double sd() const {
    const double m = mean();
    return std::sqrt(std::max(0.0, sumsq / n - m * m));
  }
};

std::string format_metric(const std::optional<double>& v) {
  if (!v.has_value()) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

}  // namespace

EvaluationReport evaluate_report(const std::vector<GcnnModel>& models,
                                 const std::vector<SubjectSet>& subjects, double voxel_size,
                                 double threshold) {
  EvaluationReport report;
  for (const GcnnModel& model : models) {
    bool bundle_in_truth = false;
    for (const SubjectSet& subject : subjects) {
      for (const Streamline& s : subject.set.streamlines) {
        if (s.label == model.bundle) {
          bundle_in_truth = true;
          break;
        }
      }
      if (bundle_in_truth) break;
    }
    if (!bundle_in_truth) {
      throw std::invalid_argument("evaluate_report: bundle '" + model.bundle +
                                  "' absent from all truth labels");
    }

    BundleEvaluation be;
    be.bundle = model.bundle;
    Running prec, rec, dice;
    for (const SubjectSet& subject : subjects) {
      const PredictionResult pred = predict_labels(model, subject.set, threshold);
      std::vector<LabeledId> predicted;
      std::vector<LabeledId> truth;
      StreamlineSet positives;
      StreamlineSet ground_truth;
      std::size_t next = 0;
      for (const Streamline& s : subject.set.streamlines) {
        if (s.label == model.bundle) ground_truth.streamlines.push_back(s);
        if (next < pred.predictions.size() && pred.predictions[next].id == s.id) {
          predicted.push_back({s.id, pred.predictions[next].label});
          truth.push_back({s.id, s.label == model.bundle ? 1 : 0});
          if (pred.predictions[next].label == 1) positives.streamlines.push_back(s);
          ++next;
        }
      }

      SubjectScore score;
      score.subject = subject.name;
      score.counts = confusion_counts(predicted, truth);
      const PrecisionRecall pr = precision_recall(score.counts);
      score.precision = pr.precision;
      score.recall = pr.recall;
      score.dice = dice_score(voxelize_streamlines(positives, voxel_size),
                              voxelize_streamlines(ground_truth, voxel_size));
      if (score.precision.has_value()) prec.add(*score.precision);
      if (score.recall.has_value()) rec.add(*score.recall);
      dice.add(score.dice);
      be.subjects.push_back(std::move(score));
    }
    if (prec.n > 0) {
      be.mean_precision = prec.mean();
      be.sd_precision = prec.sd();
    }
    if (rec.n > 0) {
      be.mean_recall = rec.mean();
      be.sd_recall = rec.sd();
    }
    be.mean_dice = dice.mean();
    be.sd_dice = dice.sd();
    report.bundles.push_back(std::move(be));
  }
  return report;
}

std::string report_to_text(const EvaluationReport& report) {
  std::string out;
  for (const BundleEvaluation& be : report.bundles) {
    for (const SubjectScore& s : be.subjects) {
      out += be.bundle + " " + s.subject + " " + std::to_string(s.counts.tp) + " " +
             std::to_string(s.counts.fp) + " " + std::to_string(s.counts.fn) + " " +
             std::to_string(s.counts.tn) + " " + format_metric(s.precision) + " " +
             format_metric(s.recall) + " " + format_metric(s.dice) + "\n";
    }
    out += be.bundle + " MEAN " + format_metric(be.mean_precision) + " " +
           format_metric(be.mean_recall) + " " + format_metric(be.mean_dice) + "\n";
    out += be.bundle + " SD " + format_metric(be.sd_precision) + " " +
           format_metric(be.sd_recall) + " " + format_metric(be.sd_dice) + "\n";
  }
  return out;
}

}  // namespace fiberparc
