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

#include "cxrlt/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include <json.hpp>

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

#include "cxrlt/error.hpp"
#include "cxrlt/metrics.hpp"
#include "cxrlt/random.hpp"
#include "cxrlt/weights.hpp"

namespace cxrlt {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kPredictChunk = 64;

json loss_to_json(const LossConfig& loss) {
  return {{"kind", std::string(to_string(loss.kind))},
          {"pos_weights", loss.pos_weights},
          {"alpha", loss.alpha},
          {"gamma", loss.gamma}};
}

LossConfig loss_from_json(const json& j) {
  LossConfig loss;
  if (j.contains("kind")) {
    const auto kind = parse_loss_kind(j.at("kind").get<std::string>());
    if (!kind) throw ConfigError("unknown loss kind: " + j.at("kind").get<std::string>());
    loss.kind = *kind;
  }
  loss.pos_weights = j.value("pos_weights", loss.pos_weights);
  loss.alpha = j.value("alpha", loss.alpha);
  loss.gamma = j.value("gamma", loss.gamma);
  return loss;
}

json nan_as_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double null_as_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

double parse_double(std::string_view key, std::string_view text) {
  const std::string s(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid number for " + std::string(key) + ": '" + s + "'");
}

long long parse_integer(std::string_view key, std::string_view text) {
  const std::string s(text);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid integer for " + std::string(key) + ": '" + s + "'");
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(text) + "'");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

// N x K label rows restricted to `classes`.
Tensor label_rows(const DatasetManifest& manifest, const std::vector<int>& classes) {
  Tensor y(static_cast<Eigen::Index>(manifest.size()), static_cast<Eigen::Index>(classes.size()));
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& labels = manifest.records()[i].labels;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          labels[static_cast<std::size_t>(classes[k])];
    }
  }
  return y;
}

LabelMatrix to_label_matrix(const Tensor& y) {
  LabelMatrix m;
  m.values = y.cast<std::uint8_t>();
  m.class_names.resize(static_cast<std::size_t>(y.cols()));
  return m;
}

// mAP over the columns that have at least one positive; NaN when none do.
double subset_map(const Tensor& logits, const Tensor& y) {
  std::vector<int> present;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    if (y.col(k).sum() > 0.0) present.push_back(static_cast<int>(k));
  }
  if (present.empty()) return kNaN;
  ScoreMatrix scores;
  scores.values = sigmoid(logits);
  scores.class_names.resize(static_cast<std::size_t>(y.cols()));
  return mean_ap(scores, to_label_matrix(y), present).mean;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool trainable(const std::string& name, const ModelConfig& config, bool freeze_backbone) {
  if (freeze_backbone && name.rfind("backbone/", 0) == 0) return false;
  if (!config.decoder.learnable_queries && name == "decoder/query") return false;
  return true;
}

// Flushes denormals to zero for its lifetime.
class DenormalGuard {
 public:
#if defined(__SSE2__)
  DenormalGuard() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~DenormalGuard() { _mm_setcsr(saved_); }

 private:
  unsigned int saved_;
#endif
};

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  for (int c : class_subset) {
    if (c < 0) throw ConfigError("class_subset holds a negative index");
  }
  loss.validate(0);
}

std::string to_json(const TrainConfig& c) {
  const json j = {{"learning_rate", c.learning_rate},
                  {"weight_decay", c.weight_decay},
                  {"batch_size", c.batch_size},
                  {"epochs", c.epochs},
                  {"beta1", c.beta1},
                  {"beta2", c.beta2},
                  {"loss", loss_to_json(c.loss)},
                  {"seed", c.seed},
                  {"class_subset", c.class_subset},
                  {"augment", c.augment},
                  {"policy", json::parse(to_json(c.policy))},
                  {"freeze_backbone", c.freeze_backbone}};
  return j.dump(2);
}

TrainConfig train_config_from_json(std::string_view json_text) {
  TrainConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("train config must be a JSON object");
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    if (j.contains("loss")) c.loss = loss_from_json(j.at("loss"));
    c.seed = j.value("seed", c.seed);
    c.class_subset = j.value("class_subset", c.class_subset);
    c.augment = j.value("augment", c.augment);
    if (j.contains("policy")) c.policy = policy_from_json(j.at("policy").dump());
    c.freeze_backbone = j.value("freeze_backbone", c.freeze_backbone);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid train config: ") + e.what());
  }
  c.validate();
  return c;
}

void apply_override(TrainConfig& c, std::string_view key, std::string_view value) {
  if (key == "learning_rate") {
    c.learning_rate = parse_double(key, value);
  } else if (key == "weight_decay") {
    c.weight_decay = parse_double(key, value);
  } else if (key == "batch_size") {
    c.batch_size = static_cast<int>(parse_integer(key, value));
  } else if (key == "epochs") {
    c.epochs = static_cast<int>(parse_integer(key, value));
  } else if (key == "beta1") {
    c.beta1 = parse_double(key, value);
  } else if (key == "beta2") {
    c.beta2 = parse_double(key, value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_integer(key, value));
  } else if (key == "augment") {
    c.augment = parse_bool(key, value);
  } else if (key == "freeze_backbone") {
    c.freeze_backbone = parse_bool(key, value);
  } else if (key == "class_subset") {
    c.class_subset.clear();
    for (auto item : split_list(value)) c.class_subset.push_back(static_cast<int>(parse_integer(key, item)));
  } else if (key == "loss.kind") {
    const auto kind = parse_loss_kind(value);
    if (!kind) throw ConfigError("unknown loss kind: " + std::string(value));
    c.loss.kind = *kind;
  } else if (key == "loss.gamma") {
    c.loss.gamma = parse_double(key, value);
  } else if (key == "loss.alpha" || key == "loss.pos_weights") {
    auto& target = key == "loss.alpha" ? c.loss.alpha : c.loss.pos_weights;
    target.clear();
    for (auto item : split_list(value)) target.push_back(parse_double(key, item));
  } else {
    throw ConfigError("unknown train config key: " + std::string(key));
  }
  c.validate();
}

Tensor predict_logits(const Model& model, const DatasetManifest& manifest,
                      const ImageStore& images) {
  const DenormalGuard guard;
  Tensor out(static_cast<Eigen::Index>(manifest.size()), model.num_classes());
  std::vector<Image> chunk;
  for (std::size_t start = 0; start < manifest.size(); start += kPredictChunk) {
    const std::size_t end = std::min(manifest.size(), start + kPredictChunk);
    chunk.clear();
    for (std::size_t i = start; i < end; ++i) chunk.push_back(images.resolve(manifest.records()[i].image_ref));
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
        model.logits(chunk);
  }
  return out;
}

Checkpoint train(Model model, const DatasetManifest& manifest, const ImageStore& images,
                 Branch branch, const TrainConfig& config, const DatasetManifest* validation,
                 const EpochCallback& on_epoch) {
  config.validate();
  const DenormalGuard guard;
  const int num_classes = manifest.num_classes();
  std::vector<int> subset = config.class_subset;
  if (subset.empty()) {
    subset.resize(static_cast<std::size_t>(num_classes));
    std::iota(subset.begin(), subset.end(), 0);
  }
  for (int c : subset) {
    if (c >= num_classes) throw ConfigError("class_subset index " + std::to_string(c) + " out of range");
  }
  if (model.num_classes() != static_cast<int>(subset.size())) {
    throw ShapeError("model emits " + std::to_string(model.num_classes()) + " logits but " +
                     std::to_string(subset.size()) + " classes are trained");
  }

  const DatasetManifest train_set = manifest.select(Split::kTrain);
  if (train_set.empty()) throw ConfigError("training split is empty");
  const DatasetManifest val_set = (validation ? *validation : manifest).select(Split::kVal);

  const Tensor y_train = label_rows(train_set, subset);
  const Tensor y_val = label_rows(val_set, subset);

  LossConfig loss = config.loss;
  if (loss.kind == LossKind::kWeightedBce && loss.pos_weights.empty()) {
    LabelMatrix m = to_label_matrix(y_train);
    for (std::size_t k = 0; k < subset.size(); ++k) {
      m.class_names[k] = manifest.class_names()[static_cast<std::size_t>(subset[k])];
    }
    loss.pos_weights = compute_pos_weights(m);
  }
  loss.validate(static_cast<int>(subset.size()));

  std::vector<Image> train_images;
  train_images.reserve(train_set.size());
  for (const Record& r : train_set.records()) train_images.push_back(images.resolve(r.image_ref));

  Checkpoint best;
  best.branch = branch;
  best.class_indices = subset;
  best.class_names = manifest.class_names();
  best.config = config;
  best.config.class_subset = subset;
  best.config.loss = loss;
  double best_map = kNaN;

  const LionConfig lion = config.lion();
  OptimizerState optimizer;
  ModelParams grads = zeros_like(model.params());

  std::vector<std::size_t> order(train_set.size());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng(mix_seed(config.seed, 0x65706f6368ULL + static_cast<std::uint64_t>(epoch))).shuffle(order);

    double loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (TensorRef t : grads.tensors()) t.tensor->setZero();

      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const Image input =
            config.augment
                ? apply_policy(train_images[i], config.policy,
                               derive_sample_seed(config.seed, static_cast<std::uint64_t>(epoch),
                                                  train_set.records()[i].sample_id))
                : train_images[i];
        ForwardTrace trace;
        const Tensor logits = model.logits(input, &trace);
        const LossValue lv = evaluate_loss(loss, logits, y_train.row(static_cast<Eigen::Index>(i)));
        batch_loss += lv.value;
        model.backward(lv.grad * scale, trace, &grads, !config.freeze_backbone);
      }
      batch_loss *= scale;
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + " (loss " +
                             std::string(to_string(loss.kind)) + ")");
      }
      loss_sum += batch_loss * static_cast<double>(end - start);

      std::vector<TensorRef> p;
      std::vector<ConstTensorRef> g;
      const auto all_p = model.params().tensors();
      const auto all_g = std::as_const(grads).tensors();
      for (std::size_t k = 0; k < all_p.size(); ++k) {
        if (!trainable(all_p[k].name, model.config(), config.freeze_backbone)) continue;
        p.push_back(all_p[k]);
        g.push_back(all_g[k]);
      }
      lion_step(p, g, optimizer, lion);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.val_loss = kNaN;
    m.val_map = kNaN;
    if (!val_set.empty()) {
      const Tensor logits = predict_logits(model, val_set, images);
      m.val_loss = evaluate_loss(loss, logits, y_val).value;
      m.val_map = subset_map(logits, y_val);
    }
    best.history.push_back(m);
    if (on_epoch) on_epoch(m);

    const bool improved = std::isnan(m.val_map) ? std::isnan(best_map) : (std::isnan(best_map) || m.val_map > best_map);
    if (improved) {
      best_map = m.val_map;
      best.model = model;
      best.optimizer = optimizer;
      best.best_epoch = epoch;
    }
  }
  return best;
}

Checkpoint train_branch(const ModelConfig& model_config, const DatasetManifest& manifest,
                        const ImageStore& images, const ClassPartition& partition, Branch branch,
                        TrainConfig config, const EpochCallback& on_epoch) {
  const std::vector<int>& classes = branch_classes(partition, branch);
  if (classes.empty()) throw ConfigError(std::string("branch ") + std::string(to_string(branch)) + " has no classes");
  config.class_subset = classes;
  ModelConfig mc = model_config;
  mc.decoder.num_classes = static_cast<int>(classes.size());
  if (mc.decoder.num_groups > mc.decoder.num_classes) mc.decoder.num_groups = mc.decoder.num_classes;
  const Model model = Model::create(mc, mix_seed(config.seed, static_cast<std::uint64_t>(branch) + 1));
  return train(model, manifest, images, branch, config, nullptr, on_epoch);
}

std::vector<Checkpoint> crt_retrain(const Checkpoint& checkpoint,
                                    const std::vector<DatasetManifest>& manifests,
                                    const ImageStore& images, const TrainConfig& config,
                                    const DatasetManifest* validation) {
  if (manifests.empty()) throw ConfigError("cRT retraining needs at least one resampled manifest");
  std::vector<Checkpoint> out;
  for (std::size_t k = 0; k < manifests.size(); ++k) {
    TrainConfig c = config;
    c.seed = mix_seed(config.seed, 0x637274ULL + k);
    c.freeze_backbone = true;
    c.class_subset = checkpoint.class_indices;
    Model model = checkpoint.model;
    model.reinitialize_decoder(c.seed);
    out.push_back(train(std::move(model), manifests[k], images, checkpoint.branch, c, validation));
  }
  return out;
}

std::string format_metrics_csv(const std::vector<EpochMetrics>& history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_map\n";
  for (const EpochMetrics& m : history) {
    out << m.epoch << ',' << format_double(m.train_loss) << ',' << format_double(m.val_loss) << ','
        << format_double(m.val_map) << '\n';
  }
  return out.str();
}

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::vector<ConstTensorRef> tensors = ckpt.model.params().tensors();
  std::vector<std::string> opt_names;
  for (const auto& [name, _] : ckpt.optimizer.momentum) opt_names.push_back("opt/" + name);
  std::size_t k = 0;
  for (const auto& [name, m] : ckpt.optimizer.momentum) tensors.push_back({opt_names[k++], &m});

  const std::string model_json = to_json(ckpt.model.config());
  const std::string train_json = to_json(ckpt.config);
  json history = json::array();
  for (const EpochMetrics& m : ckpt.history) {
    history.push_back({{"epoch", m.epoch},
                       {"train_loss", nan_as_null(m.train_loss)},
                       {"val_loss", nan_as_null(m.val_loss)},
                       {"val_map", nan_as_null(m.val_map)}});
  }
  const json meta = {{"kind", "checkpoint"},
                     {"branch", std::string(to_string(ckpt.branch))},
                     {"class_indices", ckpt.class_indices},
                     {"class_names", ckpt.class_names},
                     {"model_config", json::parse(model_json)},
                     {"train_config", json::parse(train_json)},
                     {"config_hash", hex64(fnv1a(model_json + train_json))},
                     {"best_epoch", ckpt.best_epoch},
                     {"history", history}};
  save_weights(dir, tensors, meta.dump(2));

  std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot write " + (dir / "metrics.csv").string());
  csv << format_metrics_csv(ckpt.history);
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const WeightBundle bundle = load_weights(dir);
  Checkpoint ckpt;
  try {
    const json meta = json::parse(bundle.metadata_json);
    if (meta.value("kind", std::string()) != "checkpoint") {
      throw ConfigError(dir.string() + " is not a checkpoint");
    }
    const auto branch = parse_branch(meta.at("branch").get<std::string>());
    if (!branch) throw ConfigError("unknown branch in checkpoint metadata");
    ckpt.branch = *branch;
    ckpt.class_indices = meta.at("class_indices").get<std::vector<int>>();
    ckpt.class_names = meta.at("class_names").get<std::vector<std::string>>();
    ckpt.config = train_config_from_json(meta.at("train_config").dump());
    ckpt.best_epoch = meta.at("best_epoch").get<int>();
    for (const json& h : meta.at("history")) {
      ckpt.history.push_back({h.at("epoch").get<int>(), null_as_nan(h.at("train_loss")),
                              null_as_nan(h.at("val_loss")), null_as_nan(h.at("val_map"))});
    }
    const ModelConfig mc = model_config_from_json(meta.at("model_config").dump());
    ckpt.model = Model::create(mc, 0);
  } catch (const json::exception& e) {
    throw ConfigError("invalid checkpoint metadata in " + dir.string() + ": " + e.what());
  }
  assign_weights(ckpt.model.params().tensors(), bundle, true);
  for (const auto& [name, t] : bundle.tensors) {
    if (name.rfind("opt/", 0) == 0) ckpt.optimizer.momentum[name.substr(4)] = t;
  }
  if (static_cast<int>(ckpt.class_indices.size()) != ckpt.model.num_classes()) {
    throw ShapeError("checkpoint class list does not match the model's output count");
  }
  return ckpt;
}

}  // namespace cxrlt
