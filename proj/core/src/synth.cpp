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

#include "cxrlt/synth.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "cxrlt/error.hpp"
#include "cxrlt/random.hpp"

namespace cxrlt {
namespace {

constexpr std::array<double, 5> kRaceBase = {0.60, 0.15, 0.10, 0.05, 0.10};
constexpr int kNumRaces = 5;

std::size_t draw(Rng& rng, const double* probs, std::size_t n) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

// Picks `count` distinct samples for one class. Each pick comes from the
// partner pool with probability `correlation` when that pool still has an
// unused sample, otherwise from the whole population.
std::vector<int> pick_positives(Rng& rng, int num_samples, long count,
                                const std::vector<int>& partner, double correlation) {
  std::vector<int> everyone(static_cast<std::size_t>(num_samples));
  std::iota(everyone.begin(), everyone.end(), 0);
  rng.shuffle(everyone);
  std::vector<int> pool = partner;
  rng.shuffle(pool);

  std::vector<char> taken(static_cast<std::size_t>(num_samples), 0);
  std::vector<int> chosen;
  std::size_t a = 0, b = 0;
  while (static_cast<long>(chosen.size()) < count) {
    const bool from_partner = rng.bernoulli(correlation);
    if (from_partner) {
      while (b < pool.size() && taken[static_cast<std::size_t>(pool[b])]) ++b;
      if (b < pool.size()) {
        taken[static_cast<std::size_t>(pool[b])] = 1;
        chosen.push_back(pool[b]);
        continue;
      }
    }
    while (taken[static_cast<std::size_t>(everyone[a])]) ++a;
    taken[static_cast<std::size_t>(everyone[a])] = 1;
    chosen.push_back(everyone[a]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Iterative stratification: samples carrying rare labels are placed first,
// each into the split that is furthest below its quota for that label.
std::vector<Split> stratify(Rng& rng, const std::vector<std::vector<std::uint8_t>>& labels,
                            const std::vector<long>& counts,
                            const std::array<double, 3>& fractions) {
  const std::size_t n = labels.size();
  const std::size_t num_classes = counts.size();
  std::vector<int> rarest(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (!labels[i][c]) continue;
      if (rarest[i] < 0 || counts[c] < counts[static_cast<std::size_t>(rarest[i])]) {
        rarest[i] = static_cast<int>(c);
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const long cx = rarest[x] < 0 ? LONG_MAX : counts[static_cast<std::size_t>(rarest[x])];
    const long cy = rarest[y] < 0 ? LONG_MAX : counts[static_cast<std::size_t>(rarest[y])];
    return cx < cy;
  });

  std::vector<std::array<double, 3>> class_need(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (int s = 0; s < 3; ++s) class_need[c][static_cast<std::size_t>(s)] = fractions[static_cast<std::size_t>(s)] * static_cast<double>(counts[c]);
  }
  std::array<double, 3> total_need;
  for (int s = 0; s < 3; ++s) total_need[static_cast<std::size_t>(s)] = fractions[static_cast<std::size_t>(s)] * static_cast<double>(n);

  std::vector<Split> splits(n, Split::kTrain);
  for (std::size_t i : order) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s) {
      const auto key = [&](std::size_t k) {
        const double label_need = rarest[i] < 0 ? 0.0 : class_need[static_cast<std::size_t>(rarest[i])][k];
        return std::pair(label_need, total_need[k]);
      };
      if (key(s) > key(best)) best = s;
    }
    splits[i] = static_cast<Split>(best);
    total_need[best] -= 1.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (labels[i][c]) class_need[c][best] -= 1.0;
    }
  }
  return splits;
}

struct Stamp {
  double cx, cy, radius, angle, frequency;
};

Stamp class_stamp(int c, int num_classes, int size) {
  const double s = static_cast<double>(size);
  const double ring = 2.0 * std::numbers::pi * c / num_classes;
  Stamp st;
  st.cx = 0.5 * s + 0.3 * s * std::cos(ring);
  st.cy = 0.5 * s + 0.3 * s * std::sin(ring);
  st.radius = s / 9.0;
  st.angle = std::numbers::pi * c / num_classes;
  st.frequency = 1.0 / std::max(3.0, s / (10.0 + (c % 3) * 4.0));
  return st;
}

Image render(Rng& rng, const SynthConfig& cfg, const std::vector<std::uint8_t>& labels) {
  const int n = cfg.image_size;
  const double s = static_cast<double>(n);
  Image img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = (x + 0.5 - 0.5 * s) / (0.45 * s);
      const double dy = (y + 0.5 - 0.5 * s) / (0.5 * s);
      const double thorax = std::exp(-(dx * dx + dy * dy));
      img(y, x) = 0.15 + 0.25 * thorax + rng.normal(0.0, cfg.noise_stddev);
    }
  }
  const double jitter = s / 16.0;
  for (int c = 0; c < cfg.num_classes; ++c) {
    if (!labels[static_cast<std::size_t>(c)]) continue;
    const Stamp st = class_stamp(c, cfg.num_classes, n);
    const double cx = st.cx + rng.uniform(-jitter, jitter);
    const double cy = st.cy + rng.uniform(-jitter, jitter);
    const double amp = cfg.pattern_amplitude * rng.uniform(0.8, 1.2);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ca = std::cos(st.angle), sa = std::sin(st.angle);
    const int r = static_cast<int>(std::ceil(3.0 * st.radius));
    for (int y = std::max(0, static_cast<int>(cy) - r); y < std::min(n, static_cast<int>(cy) + r + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx) - r); x < std::min(n, static_cast<int>(cx) + r + 1); ++x) {
        const double u = x + 0.5 - cx, v = y + 0.5 - cy;
        const double env = std::exp(-(u * u + v * v) / (2.0 * st.radius * st.radius));
        const double wave = std::cos(2.0 * std::numbers::pi * st.frequency * (u * ca + v * sa) + phase);
        img(y, x) += amp * env * (0.6 + 0.4 * wave);
      }
    }
  }
  return img.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (num_samples < num_classes) throw ConfigError("num_samples must be >= num_classes");
  if (image_size < 16) throw ConfigError("image_size must be >= 16");
  if (!(powerlaw_exponent >= 0.0)) throw ConfigError("powerlaw_exponent must be >= 0");
  if (!(label_correlation >= 0.0 && label_correlation <= 1.0)) {
    throw ConfigError("label_correlation must lie in [0, 1]");
  }
  if (!(demographic_skew >= 0.0 && demographic_skew <= 1.0)) {
    throw ConfigError("demographic_skew must lie in [0, 1]");
  }
  if (!(base_prevalence > 0.0 && base_prevalence <= 1.0)) {
    throw ConfigError("base_prevalence must lie in (0, 1]");
  }
  double total = 0.0;
  for (double f : split_fractions) {
    if (!(f >= 0.0)) throw ConfigError("split_fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split_fractions must sum to 1");
  if (!(pattern_amplitude > 0.0)) throw ConfigError("pattern_amplitude must be > 0");
  if (!(noise_stddev >= 0.0)) throw ConfigError("noise_stddev must be >= 0");
}

std::vector<std::string> synthetic_class_names(int num_classes) {
  std::vector<std::string> names;
  names.emplace_back(kSupportDeviceName);
  for (int c = 1; c < num_classes; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "Finding %02d", c);
    names.emplace_back(buf);
  }
  return names;
}

std::vector<long> synthetic_target_counts(const SynthConfig& config) {
  config.validate();
  const auto names = synthetic_class_names(config.num_classes);
  std::vector<long> counts;
  for (int c = 0; c < config.num_classes; ++c) {
    const double expected = config.num_samples * config.base_prevalence *
                            std::pow(static_cast<double>(c + 1), -config.powerlaw_exponent);
    const long count = std::lround(expected);
    if (count < 1) {
      throw ConfigError("class '" + names[static_cast<std::size_t>(c)] +
                        "' would receive zero positives");
    }
    counts.push_back(count);
  }
  return counts;
}

SyntheticDataset generate_synthetic(const SynthConfig& config) {
  const std::vector<long> counts = synthetic_target_counts(config);
  const auto names = synthetic_class_names(config.num_classes);
  const std::size_t n = static_cast<std::size_t>(config.num_samples);
  const std::size_t num_classes = static_cast<std::size_t>(config.num_classes);

  Rng label_rng(mix_seed(config.seed, 1));
  std::vector<std::vector<std::uint8_t>> labels(n, std::vector<std::uint8_t>(num_classes, 0));
  std::vector<int> previous;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto chosen = pick_positives(label_rng, config.num_samples, counts[c], previous,
                                       c == 0 ? 0.0 : config.label_correlation);
    for (int i : chosen) labels[static_cast<std::size_t>(i)][c] = 1;
    previous = chosen;
  }

  Rng split_rng(mix_seed(config.seed, 2));
  const std::vector<Split> splits = stratify(split_rng, labels, counts, config.split_fractions);

  Rng demo_rng(mix_seed(config.seed, 3));
  Rng image_rng(mix_seed(config.seed, 4));
  const int width = static_cast<int>(std::to_string(n).size());

  SyntheticDataset out;
  out.images = ImageStore(config.image_size);
  std::vector<Record> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "s%0*zu", width, i);
    Record r;
    r.sample_id = id;
    r.image_ref = ImageStore::ref_for(id);
    r.labels = labels[i];
    r.split = splits[i];

    int rarest = -1;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (labels[i][c] && (rarest < 0 || counts[c] < counts[static_cast<std::size_t>(rarest)])) {
        rarest = static_cast<int>(c);
      }
    }
    std::array<double, kNumRaces> race_p = kRaceBase;
    std::array<double, 2> gender_p = {0.5, 0.5};
    if (rarest >= 0) {
      for (auto& p : race_p) p *= 1.0 - config.demographic_skew;
      race_p[static_cast<std::size_t>(rarest % kNumRaces)] += config.demographic_skew;
      for (auto& p : gender_p) p *= 1.0 - config.demographic_skew;
      gender_p[static_cast<std::size_t>(rarest % 2)] += config.demographic_skew;
    }
    r.race = static_cast<Race>(draw(demo_rng, race_p.data(), race_p.size()));
    r.gender = static_cast<Gender>(draw(demo_rng, gender_p.data(), gender_p.size()));

    out.images.add(r.sample_id, render(image_rng, config, labels[i]));
    records.push_back(std::move(r));
  }
  out.manifest = DatasetManifest(names, std::move(records));
  return out;
}

SynthConfig synth_config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synth config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  SynthConfig c;
  try {
    c.num_samples = j.value("num_samples", c.num_samples);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.image_size = j.value("image_size", c.image_size);
    c.powerlaw_exponent = j.value("powerlaw_exponent", c.powerlaw_exponent);
    c.label_correlation = j.value("label_correlation", c.label_correlation);
    c.demographic_skew = j.value("demographic_skew", c.demographic_skew);
    c.seed = j.value("seed", c.seed);
    c.base_prevalence = j.value("base_prevalence", c.base_prevalence);
    c.split_fractions = j.value("split_fractions", c.split_fractions);
    c.pattern_amplitude = j.value("pattern_amplitude", c.pattern_amplitude);
    c.noise_stddev = j.value("noise_stddev", c.noise_stddev);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synth config field: ") + e.what());
  }
  c.validate();
  return c;
}

std::string to_json(const SynthConfig& c) {
  nlohmann::json j = {
      {"num_samples", c.num_samples},
      {"num_classes", c.num_classes},
      {"image_size", c.image_size},
      {"powerlaw_exponent", c.powerlaw_exponent},
      {"label_correlation", c.label_correlation},
      {"demographic_skew", c.demographic_skew},
      {"seed", c.seed},
      {"base_prevalence", c.base_prevalence},
      {"split_fractions", c.split_fractions},
      {"pattern_amplitude", c.pattern_amplitude},
      {"noise_stddev", c.noise_stddev},
  };
  return j.dump(2);
}

}  // namespace cxrlt
