#include "fiberparc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fiberparc/evaluation.hpp"
#include "fiberparc/model_io.hpp"
#include "fiberparc/path_graph.hpp"
#include "fiberparc/streamline_io.hpp"
#include "fiberparc/synthetic.hpp"
#include "fiberparc/training.hpp"

namespace fiberparc {

namespace {

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + tmp + "' for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      throw std::runtime_error("failed writing '" + tmp + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct TrainArgs {
  std::string data_path;
  std::string bundle;
  std::string out_path;
  std::vector<std::string> val_files;
  double val_fraction = 0.1;
  int points = 100;
  int levels = 3;
  bool no_augment = false;
  TrainConfig config;
};

int do_generate(const std::string& spec_path, const std::string& out_path, std::uint64_t seed) {
  SyntheticSpec spec = parse_synthetic_spec_file(spec_path);
  spec.seed = seed;
  write_file_atomic(out_path, write_streamline_text(generate_synthetic_dataset(spec)));
  return 0;
}

int do_train(const TrainArgs& args) {
  const StreamlineSet all = parse_streamline_file(args.data_path);

  StreamlineSet train_streams;
  train_streams.source = all.source;
  std::vector<StreamlineSet> val_sets;
  if (!args.val_files.empty()) {
    train_streams.streamlines = all.streamlines;
    for (const std::string& path : args.val_files) {
      val_sets.push_back(parse_streamline_file(path));
    }
  } else {
    // Seeded streamline-level split; offset keeps the stream distinct from
    // the init (seed) and batching (seed+1) generators.
    std::vector<std::size_t> order(all.streamlines.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(args.config.seed + 2);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t val_count =
        static_cast<std::size_t>(std::llround(args.val_fraction * static_cast<double>(order.size())));
    val_count = std::max<std::size_t>(1, std::min(val_count, order.size() - 1));
    StreamlineSet val;
    val.source = all.source;
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto& dst = i < val_count ? val : train_streams;
      dst.streamlines.push_back(all.streamlines[order[i]]);
    }
    val_sets.push_back(std::move(val));
  }

  const NormalizationTransform norm = fit_normalization({train_streams});
  const CoarseningHierarchy hierarchy =
      graclus_coarsen(build_path_graph(args.points), args.levels);

  const BinaryDataset train_ds =
      assemble_binary_dataset(train_streams, args.bundle, hierarchy, norm, args.config.seed);
  BinaryDataset val_ds;
  for (const StreamlineSet& vs : val_sets) {
    BinaryDataset part = assemble_binary_dataset(vs, args.bundle, hierarchy, norm, args.config.seed);
    val_ds.num_positive += part.num_positive;
    val_ds.num_negative += part.num_negative;
    std::move(part.samples.begin(), part.samples.end(), std::back_inserter(val_ds.samples));
  }

  TrainConfig config = args.config;
  config.reversal_augmentation = !args.no_augment;
  config.log = &std::cerr;
  GcnnArchitecture arch;
  arch.points = args.points;
  arch.levels = args.levels;
  std::cerr << "training bundle " << args.bundle << ": " << train_ds.num_positive << " positives, "
            << train_ds.num_negative << " negatives, " << val_ds.samples.size()
            << " validation samples\n";
  TrainResult result = train(train_ds, val_ds, config, hierarchy, norm, args.bundle, arch);
  write_file_atomic(args.out_path, serialize_model_text(result.model));
  const int best = result.report.best_epoch;
  std::cerr << "kept epoch " << best << " (val_loss "
            << result.report.epochs[static_cast<std::size_t>(best)].val_loss << ", val_acc "
            << result.report.epochs[static_cast<std::size_t>(best)].val_accuracy << ")\n";
  return 0;
}

int do_predict(const std::string& model_path, const std::string& data_path,
               const std::string& out_path, double threshold) {
  const GcnnModel model = deserialize_model(model_path);
  const StreamlineSet set = parse_streamline_file(data_path);
  const PredictionResult res = predict_labels(model, set, threshold);
  std::string out;
  for (const Prediction& p : res.predictions) {
    out += std::to_string(p.id) + " " + format_value(p.probability) + " " +
           std::to_string(p.label) + "\n";
  }
  for (const std::uint64_t id : res.skipped) {
    std::cerr << "skipped degenerate streamline " << id << "\n";
  }
  write_file_atomic(out_path, out);
  return 0;
}

int do_evaluate(const std::vector<std::string>& model_paths,
                const std::vector<std::string>& data_paths, double voxel_size, double threshold,
                const std::string& out_path) {
  std::vector<GcnnModel> models;
  models.reserve(model_paths.size());
  for (const std::string& path : model_paths) {
    models.push_back(deserialize_model(path));
  }
  std::vector<SubjectSet> subjects;
  subjects.reserve(data_paths.size());
  for (const std::string& path : data_paths) {
    subjects.push_back({std::filesystem::path(path).stem().string(), parse_streamline_file(path)});
  }
  write_file_atomic(out_path, report_to_text(evaluate_report(models, subjects, voxel_size, threshold)));
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Registration-free streamline parcellation with a spectral graph CNN", "fiberparc"};
  app.require_subcommand(1);

  std::string spec_path, gen_out;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand("generate", "Generate a synthetic labeled streamline set");
  gen->add_option("--spec", spec_path, "Synthetic spec file (SPEC 1)")->required();
  gen->add_option("--out", gen_out, "Output streamline file (SLT 1)")->required();
  gen->add_option("--seed", gen_seed, "Generation seed (default 0)");

  TrainArgs targs;
  CLI::App* tr = app.add_subcommand("train", "Train one binary bundle model");
  tr->add_option("--data", targs.data_path, "Labeled training streamlines (SLT 1)")->required();
  tr->add_option("--bundle", targs.bundle, "Target bundle name")->required();
  tr->add_option("--out", targs.out_path, "Output model file (GCM 1)")->required();
  tr->add_option("--val-fraction", targs.val_fraction,
                 "Held-out validation fraction of --data (default 0.1)")
      ->check(CLI::Range(0.0, 1.0));
  tr->add_option("--val-files", targs.val_files,
                 "Validation SLT files (one per subject); overrides --val-fraction");
  tr->add_option("--seed", targs.config.seed, "Training seed (default 0)");
  tr->add_option("--lr", targs.config.learning_rate, "Learning rate (default 1e-3)");
  tr->add_option("--lambda", targs.config.lambda, "L2 coefficient (default 1e-4)");
  tr->add_option("--batch-size", targs.config.batch_size, "Mini-batch size (default 64)");
  tr->add_option("--epochs", targs.config.max_epochs, "Maximum epochs (default 200)");
  tr->add_option("--patience", targs.config.patience, "Early-stop patience in epochs (default 10)");
  tr->add_option("--points", targs.points, "Resampled points per streamline (default 100)");
  tr->add_option("--levels", targs.levels, "Coarsening levels incl. the finest (default 3)");
  tr->add_flag("--no-augment", targs.no_augment, "Disable reversal augmentation");

  std::string pred_model, pred_data, pred_out;
  double pred_threshold = 0.5;
  CLI::App* pr = app.add_subcommand("predict", "Classify streamlines with a trained model");
  pr->add_option("--model", pred_model, "Model file (GCM 1)")->required();
  pr->add_option("--data", pred_data, "Streamlines to classify (SLT 1)")->required();
  pr->add_option("--out", pred_out, "Output file: one 'id probability label' line each")
      ->required();
  pr->add_option("--threshold", pred_threshold, "Positive-class threshold (default 0.5)");

  std::vector<std::string> eval_models, eval_data;
  std::string eval_out;
  double voxel_size = 1.0;
  double eval_threshold = 0.5;
  CLI::App* ev = app.add_subcommand("evaluate", "Score models against labeled test sets");
  ev->add_option("--models", eval_models, "Model files (GCM 1)")->required();
  ev->add_option("--data", eval_data, "Labeled test SLT files, one per subject")->required();
  ev->add_option("--out", eval_out, "Output report file")->required();
  ev->add_option("--voxel-size", voxel_size, "Visitation-map voxel size (default 1.0)")
      ->check(CLI::PositiveNumber);
  ev->add_option("--threshold", eval_threshold, "Positive-class threshold (default 0.5)");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) return do_generate(spec_path, gen_out, gen_seed);
    if (tr->parsed()) return do_train(targs);
    if (pr->parsed()) return do_predict(pred_model, pred_data, pred_out, pred_threshold);
    if (ev->parsed()) return do_evaluate(eval_models, eval_data, voxel_size, eval_threshold, eval_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace fiberparc
