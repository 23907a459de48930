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

#include "cxrlt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::span<const double> score_column(const ScoreMatrix& m, Eigen::Index c) {
  return {m.values.col(c).data(), static_cast<std::size_t>(m.values.rows())};
}

std::span<const std::uint8_t> label_column(const LabelMatrix& m, Eigen::Index c) {
  return {m.values.col(c).data(), static_cast<std::size_t>(m.values.rows())};
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

}  // namespace

EvaluationReport evaluate(const ScoreMatrix& scores, const LabelMatrix& labels,
                          const EvaluateOptions& options, std::string title) {
  if (scores.values.rows() != labels.values.rows() || scores.values.cols() != labels.values.cols()) {
    throw ShapeError("score and label matrices differ in shape");
  }
  EvaluationReport report;
  report.title = std::move(title);
  const Eigen::Index num_classes = scores.values.cols();
  std::vector<double> thresholds;
  double ap_sum = 0.0, auc_sum = 0.0;
  int auc_count = 0;
  for (Eigen::Index c = 0; c < num_classes; ++c) {
    ClassReport cr;
    cr.index = static_cast<int>(c);
    cr.name = static_cast<std::size_t>(c) < labels.class_names.size()
                  ? labels.class_names[static_cast<std::size_t>(c)]
                  : std::to_string(c);
    const auto s = score_column(scores, c);
    const auto y = label_column(labels, c);
    cr.positives = std::count_if(y.begin(), y.end(), [](std::uint8_t v) { return v != 0; });
    cr.negatives = static_cast<long>(y.size()) - cr.positives;
    if (cr.positives > 0) {
      cr.ap = average_precision(s, y);
      ap_sum += *cr.ap;
      report.map_classes.push_back(cr.index);
    }
    if (cr.positives > 0 && cr.negatives > 0) {
      cr.auc = roc_auc(s, y).auc;
      cr.youden = youden_threshold(s, y).threshold;
      auc_sum += *cr.auc;
      ++auc_count;
    }
    cr.f1_threshold = options.f1_thresholds == F1Thresholds::kYouden && cr.youden
                          ? *cr.youden
                          : options.fixed_threshold;
    thresholds.push_back(cr.f1_threshold);
    report.classes.push_back(std::move(cr));
  }
  const ClassMetric f1 = macro_f1(scores, labels, thresholds);
  for (std::size_t c = 0; c < report.classes.size(); ++c) report.classes[c].f1 = f1.per_class[c];
  report.mf1 = f1.mean;
  const double nan = std::nan("");
  report.map = report.map_classes.empty() ? nan : ap_sum / static_cast<double>(report.map_classes.size());
  report.mean_auc = auc_count == 0 ? nan : auc_sum / auc_count;
  return report;
}

std::string to_json(const FairnessReport& r) {
  json classes = json::array();
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    json fnr = json::array();
    for (Eigen::Index g = 0; g < r.per_class_fnr.cols(); ++g) {
      fnr.push_back(number_or_null(r.per_class_fnr(static_cast<Eigen::Index>(k), g)));
    }
    classes.push_back({{"index", r.classes[k]},
                       {"threshold", number_or_null(r.thresholds_used[k])},
                       {"fnr", fnr},
                       {"eo_ratio", number_or_null(r.per_class_eo_ratio[k])}});
  }
  json excluded = json::array();
  for (const ExcludedClass& e : r.excluded) excluded.push_back({{"index", e.class_index}, {"reason", e.reason}});
  const json j = {{"attribute", r.attribute},
                  {"groups", r.groups},
                  {"classes", classes},
                  {"included_classes", r.included_classes},
                  {"excluded", excluded},
                  {"eo_mean", number_or_null(r.eo_mean)},
                  {"eo_std", number_or_null(r.eo_std)}};
  return j.dump(2);
}

std::string to_json(const EvaluationReport& report) {
  json classes = json::array();
  for (const ClassReport& c : report.classes) {
    classes.push_back({{"index", c.index},
                       {"name", c.name},
                       {"positives", c.positives},
                       {"negatives", c.negatives},
                       {"ap", optional_number(c.ap)},
                       {"auc", optional_number(c.auc)},
                       {"youden_threshold", optional_number(c.youden)},
                       {"f1_threshold", c.f1_threshold},
                       {"f1", c.f1}});
  }
  json j = {{"title", report.title},
            {"map", number_or_null(report.map)},
            {"mf1", number_or_null(report.mf1)},
            {"mean_auc", number_or_null(report.mean_auc)},
            {"map_classes", report.map_classes},
            {"classes", classes}};
  j["fairness"] = report.fairness ? json::parse(to_json(*report.fairness)) : json(nullptr);
  return j.dump(2);
}

std::string format_curve_csv(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](std::uint8_t v) { return v == 0; });
  if (!has_pos || !has_neg) return {};
  const PRCurve pr = precision_recall_curve(scores, labels);
  const RocResult roc = roc_auc(scores, labels);
  std::ostringstream out;
  out << "threshold,precision,recall,tpr,fpr\n";
  // roc has a leading +inf point; the rest align with the PR thresholds.
  for (std::size_t k = 0; k < pr.thresholds.size(); ++k) {
    out << fmt("%.17g", pr.thresholds[k]) << ',' << fmt("%.17g", pr.precision[k]) << ','
        << fmt("%.17g", pr.recall[k]) << ',' << fmt("%.17g", roc.curve.tpr[k + 1]) << ','
        << fmt("%.17g", roc.curve.fpr[k + 1]) << '\n';
  }
  return out.str();
}

std::string roc_grid_svg(const std::vector<RocPanel>& panels) {
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(panels.size())))));
  const int rows = std::max(1, (static_cast<int>(panels.size()) + cols - 1) / cols);
  const double cell = 180.0, pad = 28.0, plot = cell - 2 * pad;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell << "\" height=\""
      << rows * cell << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double x0 = static_cast<double>(p % static_cast<std::size_t>(cols)) * cell + pad;
    const double y0 = static_cast<double>(p / static_cast<std::size_t>(cols)) * cell + pad;
    const RocPanel& panel = panels[p];
    svg << "<g>\n<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << plot << "\" height=\"" << plot
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 + plot << "\" x2=\"" << x0 + plot << "\" y2=\"" << y0
        << "\" stroke=\"#ccc\" stroke-dasharray=\"3,3\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < panel.curve.tpr.size(); ++k) {
      svg << fmt("%.2f", x0 + panel.curve.fpr[k] * plot) << ',' << fmt("%.2f", y0 + plot - panel.curve.tpr[k] * plot)
          << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << x0 << "\" y=\"" << y0 - 6 << "\">" << escape_xml(panel.name)
        << " (AUC " << fmt("%.3f", panel.auc) << ")</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string ap_bar_svg(const std::vector<std::string>& class_names,
                       const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  const double group_width = 14.0 * static_cast<double>(std::max<std::size_t>(1, series.size())) + 12.0;
  const double left = 40.0, top = 20.0, height = 200.0, bottom = 110.0;
  const double width = left + group_width * static_cast<double>(class_names.size()) + 20.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << top + height + bottom << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = top + height - height * tick / 4.0;
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 20 << "\" y2=\"" << y
        << "\" stroke=\"#eee\"/>\n<text x=\"" << left - 6 << "\" y=\"" << y + 3
        << "\" text-anchor=\"end\">" << fmt("%.2f", tick / 4.0) << "</text>\n";
  }
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const double gx = left + group_width * static_cast<double>(c) + 6.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = c < series[s].second.size() ? series[s].second[c] : std::nan("");
      if (!std::isfinite(v)) continue;
      const double h = std::clamp(v, 0.0, 1.0) * height;
      svg << "<rect x=\"" << gx + 14.0 * static_cast<double>(s) << "\" y=\"" << fmt("%.2f", top + height - h)
          << "\" width=\"12\" height=\"" << fmt("%.2f", h) << "\" fill=\"" << kPalette[s % 6] << "\"/>\n";
    }
    const double lx = gx + group_width / 2.0 - 6.0;
    svg << "<text transform=\"translate(" << lx << ',' << top + height + 8
        << ") rotate(60)\">" << escape_xml(class_names[c]) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = top + height + bottom - 12.0 * static_cast<double>(series.size() - s);
    svg << "<rect x=\"" << left << "\" y=\"" << y - 8 << "\" width=\"8\" height=\"8\" fill=\""
        << kPalette[s % 6] << "\"/><text x=\"" << left + 12 << "\" y=\"" << y << "\">"
        << escape_xml(series[s].first) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_report(const std::filesystem::path& dir, const EvaluationReport& report,
                  const ScoreMatrix& scores, const LabelMatrix& labels) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "curves", ec);
  if (ec) throw IoError("cannot create " + (dir / "curves").string() + ": " + ec.message());
  write_file(dir / "report.json", to_json(report));

  std::vector<RocPanel> panels;
  std::vector<std::string> names;
  std::vector<double> ap;
  for (const ClassReport& c : report.classes) {
    names.push_back(c.name);
    ap.push_back(c.ap ? *c.ap : std::nan(""));
    const auto s = score_column(scores, c.index);
    const auto y = label_column(labels, c.index);
    const std::string csv = format_curve_csv(s, y);
    if (csv.empty()) continue;
    write_file(dir / "curves" / (std::to_string(c.index) + ".csv"), csv);
    const RocResult roc = roc_auc(s, y);
    panels.push_back({c.name, roc.curve, roc.auc});
  }
  write_file(dir / "roc.svg", roc_grid_svg(panels));
  write_file(dir / "ap.svg", ap_bar_svg(names, {{report.title.empty() ? "AP" : report.title, ap}}));
}

}  // namespace cxrlt
