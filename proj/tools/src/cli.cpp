/*
 * Copyright 2026 The cxrlt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cxrlt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cxrlt/datakit.hpp"
#include "cxrlt/ensemble.hpp"
#include "cxrlt/error.hpp"
#include "cxrlt/gradcam.hpp"
#include "cxrlt/image_store.hpp"
#include "cxrlt/imbalance.hpp"
#include "cxrlt/metrics.hpp"
#include "cxrlt/report.hpp"
#include "cxrlt/synth.hpp"
#include "cxrlt/training.hpp"

namespace cxrlt {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestFile = "manifest.csv";
constexpr const char* kImagesFile = "images.bin";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct DataPaths {
  std::string dir;
  std::string manifest;
  std::string images;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data", dir, "Dataset directory with manifest.csv and images.bin");
    cmd->add_option("--manifest", manifest, "Manifest CSV (overrides --data)");
    cmd->add_option("--images", images, "Image store (overrides --data)");
  }

  fs::path manifest_path() const {
    if (!manifest.empty()) return manifest;
    if (dir.empty()) throw ConfigError("--data or --manifest is required");
    return fs::path(dir) / kManifestFile;
  }

  fs::path images_path() const {
    if (!images.empty()) return images;
    if (dir.empty()) throw ConfigError("--data or --images is required");
    return fs::path(dir) / kImagesFile;
  }

  // Checks both files before any work starts.
  void validate() const {
    for (const fs::path& p : {manifest_path(), images_path()}) {
      if (!fs::is_regular_file(p)) throw IoError("missing input file: " + p.string());
    }
  }
};

std::optional<Split> parse_split_option(const std::string& text) {
  if (text == "all") return std::nullopt;
  const auto split = parse_split(text);
  if (!split) throw ConfigError("unknown split: " + text);
  return split;
}

DatasetManifest pick(const DatasetManifest& m, const std::optional<Split>& split) {
  DatasetManifest out = split ? m.select(*split) : m;
  if (out.empty()) throw ConfigError("the selected split has no records");
  return out;
}

LabelMatrix labels_for(const DatasetManifest& m, const std::vector<int>& classes) {
  const LabelMatrix full = m.label_matrix();
  LabelMatrix out;
  out.values.resize(full.values.rows(), static_cast<Eigen::Index>(classes.size()));
  for (std::size_t k = 0; k < classes.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) = full.values.col(classes[k]);
    out.class_names.push_back(full.class_names[static_cast<std::size_t>(classes[k])]);
  }
  return out;
}

ClassPartition partition_from(const std::vector<Checkpoint>& branches) {
  ClassPartition p;
  for (const Checkpoint& ck : branches) {
    if (ck.branch == Branch::kHead) p.head_indices = ck.class_indices;
    if (ck.branch == Branch::kTail) p.tail_indices = ck.class_indices;
    if (ck.branch == Branch::kAll) p.all_indices = ck.class_indices;
  }
  if (p.head_indices.empty() || p.tail_indices.empty() || p.all_indices.empty()) {
    throw ConfigError("--ensemble needs one head, one tail and one all checkpoint");
  }
  for (int c : p.head_indices) {
    if (std::find(p.tail_indices.begin(), p.tail_indices.end(), c) != p.tail_indices.end()) {
      p.support_device_index = c;
    }
  }
  validate_partition(p, static_cast<int>(p.all_indices.size()));
  return p;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig config = a.config.empty() ? SynthConfig{} : synth_config_from_json(read_text(a.config));
  if (a.seed) config.seed = *a.seed;
  const SyntheticDataset data = generate_synthetic(config);
  fs::create_directories(a.out);
  save_manifest(data.manifest, fs::path(a.out) / kManifestFile);
  data.images.save(fs::path(a.out) / kImagesFile);
  write_text(fs::path(a.out) / "synth.json", to_json(config));
  const auto counts = class_counts(data.manifest);
  out << "wrote " << data.manifest.size() << " samples, " << config.num_classes << " classes to " << a.out
      << "\nclass counts:";
  for (long n : counts) out << ' ' << n;
  out << '\n';
  return kExitOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  DataPaths data;
  std::string config;
  std::string model_config;
  std::string branch = "all";
  std::vector<std::string> overrides;
  std::string support_name = std::string(kSupportDeviceName);
  std::optional<int> head_size;
  std::string out;
  bool quiet = false;
};

TrainConfig load_train_config(const std::string& path, const std::vector<std::string>& overrides) {
  TrainConfig config = path.empty() ? TrainConfig{} : train_config_from_json(read_text(path));
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  a.data.validate();
  const auto branch = parse_branch(a.branch);
  if (!branch) throw ConfigError("unknown branch: " + a.branch);
  const TrainConfig config = load_train_config(a.config, a.overrides);
  const DatasetManifest manifest = load_manifest(a.data.manifest_path());
  const ImageStore images = ImageStore::load(a.data.images_path());
  ModelConfig mc;
  if (!a.model_config.empty()) {
    mc = model_config_from_json(read_text(a.model_config));
  } else {
    mc.image_size = images.image_size();
  }
  if (mc.image_size != images.image_size()) {
    throw ConfigError("model image_size " + std::to_string(mc.image_size) + " differs from the image store's " +
                      std::to_string(images.image_size()));
  }
  const ClassPartition partition = partition_classes(class_counts(manifest, Split::kTrain),
                                                     manifest.class_names(), a.support_name, a.head_size);
  out << "training " << to_string(*branch) << " branch on "
      << branch_classes(partition, *branch).size() << " classes\n";
  const Checkpoint ck = train_branch(mc, manifest, images, partition, *branch, config, [&](const EpochMetrics& m) {
    if (!a.quiet) {
      out << "epoch " << m.epoch << " train_loss " << fixed(m.train_loss) << " val_loss " << fixed(m.val_loss)
          << " val_map " << fixed(m.val_map) << '\n';
    }
  });
  save_checkpoint(a.out, ck);
  out << "best epoch " << ck.best_epoch << "; checkpoint written to " << a.out << '\n';
  return kExitOk;
}

// ---- predict / combine ---------------------------------------------------

struct PredictArgs {
  DataPaths data;
  std::string checkpoint;
  std::string split = "test";
  std::string out;
};

int run_predict(const PredictArgs& a, std::ostream& out) {
  a.data.validate();
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const DatasetManifest m = pick(load_manifest(a.data.manifest_path()), parse_split_option(a.split));
  const ImageStore images = ImageStore::load(a.data.images_path());
  BranchPrediction pred;
  pred.branch = ck.branch;
  pred.class_indices = ck.class_indices;
  for (const Record& r : m.records()) pred.sample_ids.push_back(r.sample_id);
  pred.scores = sigmoid(predict_logits(ck.model, m, images));
  save_branch_prediction(a.out, pred, ck.class_names);
  out << "wrote " << m.size() << " x " << ck.class_indices.size() << " scores to " << a.out << '\n';
  return kExitOk;
}

struct CombineArgs {
  std::string all, head, tail, out;
};

std::vector<std::string> csv_header(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream row(line);
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  if (cells.empty() || cells[0] != "sample_id") throw SchemaError("sample_id");
  cells.erase(cells.begin());
  return cells;
}

int run_combine(const CombineArgs& a, std::ostream& out) {
  const std::vector<std::string> names = csv_header(a.all);
  const BranchPrediction all = load_branch_prediction(a.all, names, Branch::kAll);
  const BranchPrediction head = load_branch_prediction(a.head, names, Branch::kHead);
  const BranchPrediction tail = load_branch_prediction(a.tail, names, Branch::kTail);
  Checkpoint h, t, l;
  h.branch = Branch::kHead;
  h.class_indices = head.class_indices;
  t.branch = Branch::kTail;
  t.class_indices = tail.class_indices;
  l.branch = Branch::kAll;
  l.class_indices = all.class_indices;
  const ClassPartition partition = partition_from({h, t, l});
  const ScoreMatrix combined = combine(all, head, tail, partition, names);
  write_text(a.out, format_scores_csv(all.sample_ids, combined));
  out << "combined " << combined.values.rows() << " samples into " << a.out << '\n';
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  DataPaths data;
  std::vector<std::string> checkpoints;
  bool ensemble = false;
  std::string fairness;
  std::string split = "test";
  std::string f1_thresholds = "fixed";
  std::string title;
  std::string out;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  a.data.validate();
  std::optional<Attribute> attribute;
  if (!a.fairness.empty()) {
    attribute = parse_attribute(a.fairness);
    if (!attribute) throw ConfigError("unknown fairness attribute: " + a.fairness);
  }
  EvaluateOptions options;
  if (a.f1_thresholds == "youden") options.f1_thresholds = F1Thresholds::kYouden;
  else if (a.f1_thresholds != "fixed") throw ConfigError("--f1-thresholds must be fixed or youden");
  if (a.ensemble && a.checkpoints.size() != 3) throw ConfigError("--ensemble needs exactly three checkpoints");
  if (!a.ensemble && a.checkpoints.size() != 1) throw ConfigError("pass one checkpoint, or three with --ensemble");

  std::vector<Checkpoint> cks;
  for (const std::string& p : a.checkpoints) cks.push_back(load_checkpoint(p));
  const DatasetManifest m = pick(load_manifest(a.data.manifest_path()), parse_split_option(a.split));
  const ImageStore images = ImageStore::load(a.data.images_path());

  ScoreMatrix scores;
  std::vector<int> classes;
  std::optional<std::vector<double>> baseline_ap;
  std::string title = a.title;
  if (a.ensemble) {
    const ClassPartition partition = partition_from(cks);
    BranchPrediction preds[3];
    for (const Checkpoint& ck : cks) {
      preds[static_cast<int>(ck.branch)] = predict_branch(ck, m, images, partition, ck.branch);
    }
    const auto& all = preds[static_cast<int>(Branch::kAll)];
    scores = combine(all, preds[static_cast<int>(Branch::kHead)], preds[static_cast<int>(Branch::kTail)],
                     partition, cks[0].class_names);
    classes = partition.all_indices;
    ScoreMatrix alone;
    alone.values = all.scores;
    const EvaluationReport base = evaluate(alone, labels_for(m, classes), options);
    baseline_ap.emplace();
    for (const ClassReport& c : base.classes) baseline_ap->push_back(c.ap ? *c.ap : std::nan(""));
    if (title.empty()) title = "ensemble";
  } else {
    const Checkpoint& ck = cks[0];
    classes = ck.class_indices;
    scores.values = sigmoid(predict_logits(ck.model, m, images));
    if (title.empty()) title = std::string(to_string(ck.branch));
  }
  const LabelMatrix labels = labels_for(m, classes);
  scores.class_names = labels.class_names;

  EvaluationReport report = evaluate(scores, labels, options, title);
  if (attribute) {
    report.fairness = equality_of_opportunity(scores, labels, demographic_groups(m, *attribute), {},
                                              std::string(to_string(*attribute)));
  }
  write_report(a.out, report, scores, labels);
  std::vector<std::string> ids;
  for (const Record& r : m.records()) ids.push_back(r.sample_id);
  write_text(fs::path(a.out) / "scores.csv", format_scores_csv(ids, scores));
  if (baseline_ap) {
    std::vector<double> ap;
    for (const ClassReport& c : report.classes) ap.push_back(c.ap ? *c.ap : std::nan(""));
    write_text(fs::path(a.out) / "ap.svg",
               ap_bar_svg(labels.class_names, {{"all", *baseline_ap}, {"ensemble", ap}}));
  }

  out << title << ": mAP " << fixed(report.map) << "  mF1 " << fixed(report.mf1) << "  mean AUC "
      << fixed(report.mean_auc) << '\n';
  if (report.fairness) {
    const FairnessReport& f = *report.fairness;
    out << "EO (" << f.attribute << ", " << f.groups.size() << " groups, " << f.included_classes.size()
        << " classes): " << fixed(f.eo_mean) << " +- " << fixed(f.eo_std) << '\n';
    for (const ExcludedClass& e : f.excluded) {
      out << "  excluded " << labels.class_names[static_cast<std::size_t>(e.class_index)] << ": " << e.reason << '\n';
    }
  }
  out << "report written to " << a.out << '\n';
  return kExitOk;
}

// ---- gradcam ---------------------------------------------------------------

struct GradcamArgs {
  DataPaths data;
  std::string checkpoint;
  std::string sample;
  std::string klass;
  std::string out;
};

void write_overlay_ppm(const fs::path& path, const Image& image, const Image& heat) {
  std::ostringstream ppm;
  ppm << "P6\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  auto byte = [](double v) { return static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))); };
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double g = image(r, c), h = heat(r, c);
      ppm << byte((1 - 0.5 * h) * g + 0.5 * h) << byte((1 - 0.5 * h) * g) << byte((1 - 0.5 * h) * g + 0.5 * h * (1 - h));
    }
  }
  write_text(path, ppm.str());
}

int run_gradcam(const GradcamArgs& a, std::ostream& out) {
  a.data.validate();
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const DatasetManifest m = load_manifest(a.data.manifest_path());
  const auto row = m.find(a.sample);
  if (!row) throw ConfigError("unknown sample: " + a.sample);
  int global = m.class_index(a.klass);
  if (global < 0) {
    try {
      std::size_t used = 0;
      global = std::stoi(a.klass, &used);
      if (used != a.klass.size()) global = -1;
    } catch (const std::exception&) {
      global = -1;
    }
  }
  const auto it = std::find(ck.class_indices.begin(), ck.class_indices.end(), global);
  if (global < 0 || it == ck.class_indices.end()) {
    throw ConfigError("class '" + a.klass + "' is not predicted by this checkpoint");
  }
  const ImageStore images = ImageStore::load(a.data.images_path());
  const Image image = images.resolve(m.records()[*row].image_ref);
  const Image heat = gradcam(ck.model, image, static_cast<int>(it - ck.class_indices.begin()));
  write_overlay_ppm(a.out, image, heat);
  out << "grad-cam of '" << m.class_names()[static_cast<std::size_t>(global)] << "' on " << a.sample
      << " written to " << a.out << '\n';
  return kExitOk;
}

// ---- resample / retrain --------------------------------------------------

struct ResampleArgs {
  DataPaths data;
  std::string kind = "crt";
  double factor = 0.7;
  long threshold = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_resample(const ResampleArgs& a, std::ostream& out) {
  if (!fs::is_regular_file(a.data.manifest_path())) throw IoError("missing input file: " + a.data.manifest_path().string());
  ResampleSpec spec;
  const auto kind = parse_resample_kind(a.kind);
  if (!kind) throw ConfigError("unknown resample kind: " + a.kind);
  spec.kind = *kind;
  spec.crt_factor = a.factor;
  spec.ros_threshold = a.threshold;
  spec.seed = a.seed;
  const DatasetManifest m = load_manifest(a.data.manifest_path());
  const DatasetManifest r = resample(m, spec);
  save_manifest(r, a.out);
  out << "resampled " << m.select(Split::kTrain).size() << " training records to " << r.size() << "; counts:";
  for (long n : class_counts(r)) out << ' ' << n;
  out << '\n';
  return kExitOk;
}

struct RetrainArgs {
  DataPaths data;
  std::string checkpoint;
  std::vector<std::string> manifests;
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

int run_retrain(const RetrainArgs& a, std::ostream& out) {
  a.data.validate();
  const Checkpoint base = load_checkpoint(a.checkpoint);
  const TrainConfig config = load_train_config(a.config, a.overrides);
  const DatasetManifest full = load_manifest(a.data.manifest_path());
  const ImageStore images = ImageStore::load(a.data.images_path());
  std::vector<DatasetManifest> sets;
  for (const std::string& p : a.manifests) sets.push_back(load_manifest(p));
  const auto cks = crt_retrain(base, sets, images, config, &full);
  for (std::size_t k = 0; k < cks.size(); ++k) {
    const fs::path dir = fs::path(a.out) / ("set_" + std::to_string(k));
    save_checkpoint(dir, cks[k]);
    out << "set " << k << ": best epoch " << cks[k].best_epoch << " -> " << dir.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Long-tailed multi-label chest X-ray classification", "cxrlt"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic long-tailed dataset");
  synth_cmd->add_option("--config", synth.config, "Synthetic dataset config (JSON)")->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", synth.seed, "Override the config seed");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one branch and write a checkpoint");
  train_args.data.add_to(train_cmd);
  train_cmd->add_option("--config", train_args.config, "Training config (JSON)")->check(CLI::ExistingFile);
  train_cmd->add_option("--model-config", train_args.model_config, "Model config (JSON)")->check(CLI::ExistingFile);
  train_cmd->add_option("--branch", train_args.branch, "head, tail or all")->check(CLI::IsMember({"head", "tail", "all"}));
  train_cmd->add_option("--set", train_args.overrides, "Config override key=value (repeatable)");
  train_cmd->add_option("--support-name", train_args.support_name, "Name of the support-device class");
  train_cmd->add_option("--head-size", train_args.head_size, "Number of head classes");
  train_cmd->add_option("--out", train_args.out, "Checkpoint directory")->required();
  train_cmd->add_flag("--quiet", train_args.quiet, "No per-epoch output");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Write branch scores as CSV");
  predict.data.add_to(predict_cmd);
  predict_cmd->add_option("--checkpoint", predict.checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--split", predict.split, "train, val, test or all");
  predict_cmd->add_option("--out", predict.out, "Output CSV")->required();

  CombineArgs comb;
  auto* combine_cmd = app.add_subcommand("combine", "Ensemble three branch score files");
  combine_cmd->add_option("--all", comb.all, "All-branch CSV")->required()->check(CLI::ExistingFile);
  combine_cmd->add_option("--head", comb.head, "Head-branch CSV")->required()->check(CLI::ExistingFile);
  combine_cmd->add_option("--tail", comb.tail, "Tail-branch CSV")->required()->check(CLI::ExistingFile);
  combine_cmd->add_option("--out", comb.out, "Output CSV")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints and write reports");
  eval.data.add_to(eval_cmd);
  eval_cmd->add_option("--checkpoint", eval.checkpoints, "Checkpoint directory (three with --ensemble)")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_flag("--ensemble", eval.ensemble, "Combine head, tail and all checkpoints");
  eval_cmd->add_option("--fairness", eval.fairness, "race or gender")->check(CLI::IsMember({"race", "gender"}));
  eval_cmd->add_option("--split", eval.split, "train, val, test or all");
  eval_cmd->add_option("--f1-thresholds", eval.f1_thresholds, "fixed (0.5) or youden");
  eval_cmd->add_option("--title", eval.title, "Report title");
  eval_cmd->add_option("--out", eval.out, "Report directory")->required();

  GradcamArgs cam;
  auto* cam_cmd = app.add_subcommand("gradcam", "Write a Grad-CAM overlay (PPM)");
  cam.data.add_to(cam_cmd);
  cam_cmd->add_option("--checkpoint", cam.checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  cam_cmd->add_option("--sample", cam.sample, "Sample id")->required();
  cam_cmd->add_option("--class", cam.klass, "Class name or global index")->required();
  cam_cmd->add_option("--out", cam.out, "Output .ppm")->required();

  ResampleArgs rs;
  auto* resample_cmd = app.add_subcommand("resample", "cRT subsampling or random oversampling");
  rs.data.add_to(resample_cmd);
  resample_cmd->add_option("--kind", rs.kind, "crt or ros")->check(CLI::IsMember({"crt", "ros"}));
  resample_cmd->add_option("--factor", rs.factor, "cRT floor factor");
  resample_cmd->add_option("--threshold", rs.threshold, "ROS threshold (0 = median)");
  resample_cmd->add_option("--seed", rs.seed, "Random seed");
  resample_cmd->add_option("--out", rs.out, "Output manifest CSV")->required();

  RetrainArgs rt;
  auto* retrain_cmd = app.add_subcommand("retrain", "cRT second stage on resampled manifests");
  rt.data.add_to(retrain_cmd);
  retrain_cmd->add_option("--checkpoint", rt.checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  retrain_cmd->add_option("--resampled", rt.manifests, "Resampled manifest CSV (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  retrain_cmd->add_option("--config", rt.config, "Training config (JSON)")->check(CLI::ExistingFile);
  retrain_cmd->add_option("--set", rt.overrides, "Config override key=value (repeatable)");
  retrain_cmd->add_option("--out", rt.out, "Output directory")->required();

  std::vector<const char*> argv;
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth_cmd) return run_synth(synth, out);
    if (*train_cmd) return run_train(train_args, out);
    if (*predict_cmd) return run_predict(predict, out);
    if (*combine_cmd) return run_combine(comb, out);
    if (*eval_cmd) return run_eval(eval, out);
    if (*cam_cmd) return run_gradcam(cam, out);
    if (*resample_cmd) return run_resample(rs, out);
    if (*retrain_cmd) return run_retrain(rt, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace cxrlt
