//
// Copyright 2026 The Taxo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Evaluation metrics (positive-class F1, Spearman's rho), cross-language
// averages, per-pattern error breakdowns and their report renderings.

#ifndef TAXO_EVAL_HPP_
#define TAXO_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "taxo/common.hpp"
#include "taxo/corpus.hpp"

namespace taxo {

struct BinaryMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  // Set when a ratio had a zero denominator and was defined as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;

  std::size_t total() const { return tp + fp + fn + tn; }
};

// Harmonic mean, 0 when both inputs are 0.
inline double f1_from(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

// Positive class is label 1.
inline BinaryMetrics binary_metrics(const std::vector<int>& predictions,
                                    const std::vector<int>& golds) {
  if (predictions.size() != golds.size()) {
    throw ShapeError("predictions (" + std::to_string(predictions.size()) + ") and golds (" +
                     std::to_string(golds.size()) + ") differ in length");
  }
  if (predictions.empty()) throw PreconditionError("binary metrics need at least one example");
  BinaryMetrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int g = golds[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) {
      throw ValueError("labels must be 0 or 1 (index " + std::to_string(i) + ")");
    }
    if (p == 1 && g == 1) ++m.tp;
    else if (p == 1) ++m.fp;
    else if (g == 1) ++m.fn;
    else ++m.tn;
  }
  if (m.tp + m.fp == 0) m.precision_undefined = true;
  else m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn == 0) m.recall_undefined = true;
  else m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  m.f1 = f1_from(m.precision, m.recall);
  return m;
}

// ---------------------------------------------------------------------------
// Spearman's rho: Pearson correlation of average ranks.

struct RhoResult {
  double rho = 0.0;
  std::size_t n = 0;
  std::string tie_policy = "average";
};

// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelationError("correlation is undefined for a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline RhoResult spearman_rho(const std::vector<double>& predictions,
                              const std::vector<double>& golds) {
  if (predictions.size() != golds.size()) {
    throw ShapeError("predictions and golds differ in length");
  }
  if (predictions.size() < 2) throw PreconditionError("Spearman's rho needs n >= 2");
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i]) || !std::isfinite(golds[i])) {
      throw ValueError("non-finite value at index " + std::to_string(i));
    }
  }
  RhoResult r;
  r.n = predictions.size();
  r.rho = pearson(average_ranks(predictions), average_ranks(golds));
  return r;
}

// ---------------------------------------------------------------------------
// Cross-language average.

inline double global_score(const std::map<Language, double>& per_language) {
  double sum = 0.0;
  for (Language language : kAllLanguages) {
    auto it = per_language.find(language);
    if (it == per_language.end()) {
      throw PreconditionError("global score is missing language '" +
                              std::string(to_string(language)) + "'");
    }
    sum += it->second;
  }
  return sum / static_cast<double>(kAllLanguages.size());
}

// Report precision: percentages to 2 decimals, rho to 3.
inline constexpr int kPercentDecimals = 2;
inline constexpr int kRhoDecimals = 3;
// Accepted gap when comparing a rounded average with a reported one that
// may have been truncated instead of rounded.
inline constexpr double kRhoReportTolerance = 0.001;

using LanguageMetric = std::variant<BinaryMetrics, RhoResult>;

struct MetricsReport {
  std::map<Language, LanguageMetric> per_language;

  // F1 (binary) or rho (likert) per language.
  std::map<Language, double> primary() const {
    std::map<Language, double> out;
    for (const auto& [language, metric] : per_language) {
      out[language] = std::holds_alternative<BinaryMetrics>(metric)
                          ? std::get<BinaryMetrics>(metric).f1
                          : std::get<RhoResult>(metric).rho;
    }
    return out;
  }

  bool complete() const { return per_language.size() == kAllLanguages.size(); }

  double global() const { return global_score(primary()); }
};

// ---------------------------------------------------------------------------
// Per-pattern errors.

struct PatternErrorRow {
  std::string pattern;
  std::string model;
  std::size_t occurrences = 0;
  std::size_t wrong = 0;
  double error_percentage = 0.0;
  bool seen_in_training = false;
};

struct PatternErrorReport {
  std::vector<PatternErrorRow> rows;

  // Rows sorted by (pattern, model), the grouped-chart order.
  void merge(const PatternErrorReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::tie(a.pattern, a.model) < std::tie(b.pattern, b.model);
    });
  }
};

// Error rate per pattern, 100 * wrong / occurrences. Patterns with no
// occurrences never produce a row.
inline PatternErrorReport per_pattern_errors(const std::vector<int>& predictions,
                                             const std::vector<int>& golds,
                                             const std::vector<std::string>& patterns,
                                             const std::set<std::string>& training_patterns,
                                             const std::string& model_name) {
  if (predictions.size() != golds.size() || predictions.size() != patterns.size()) {
    throw ShapeError("predictions, golds and patterns must align");
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto& [occurrences, wrong] = counts[patterns[i]];
    ++occurrences;
    if (predictions[i] != golds[i]) ++wrong;
  }
  PatternErrorReport report;
  for (const auto& [pattern, c] : counts) {
    PatternErrorRow row;
    row.pattern = pattern;
    row.model = model_name;
    row.occurrences = c.first;
    row.wrong = c.second;
    row.error_percentage = 100.0 * static_cast<double>(c.second) / static_cast<double>(c.first);
    row.seen_in_training = training_patterns.count(pattern) > 0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Rendering. Output is a pure function of the report.

enum class ReportFormat { kTsv, kMarkdown, kPlotData };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "tsv") return ReportFormat::kTsv;
  if (s == "markdown") return ReportFormat::kMarkdown;
  if (s == "plot-data") return ReportFormat::kPlotData;
  throw ConfigError("unknown report format '" + std::string(s) +
                    "' (expected one of: tsv, markdown, plot-data)");
}

namespace detail {

inline std::string percent(double ratio) { return format_fixed(100.0 * ratio, kPercentDecimals); }
inline std::string rho_text(double rho) { return format_fixed(rho, kRhoDecimals); }

inline void emit_row(std::ostringstream& out, ReportFormat format,
                     const std::vector<std::string>& cells) {
  if (format == ReportFormat::kMarkdown) {
    out << "| " << join(cells, " | ") << " |\n";
  } else {
    out << join(cells, "\t") << '\n';
  }
}

inline void emit_header(std::ostringstream& out, ReportFormat format,
                        const std::vector<std::string>& cells) {
  emit_row(out, format, cells);
  if (format == ReportFormat::kMarkdown) {
    std::vector<std::string> rule(cells.size(), "---");
    emit_row(out, format, rule);
  }
}

}  // namespace detail

// Binary: (language, recall, precision, f1) in percent plus an average row
// when all three languages are present. Likert: (language, rho).
inline std::string emit_report(const MetricsReport& report, ReportFormat format) {
  std::ostringstream out;
  if (report.per_language.empty()) return std::string();
  const bool binary = std::holds_alternative<BinaryMetrics>(report.per_language.begin()->second);
  if (format == ReportFormat::kPlotData) {
    detail::emit_header(out, format, {"language", "metric", "value"});
    for (const auto& [language, metric] : report.per_language) {
      std::string lang(to_string(language));
      if (binary) {
        const auto& m = std::get<BinaryMetrics>(metric);
        detail::emit_row(out, format, {lang, "recall", detail::percent(m.recall)});
        detail::emit_row(out, format, {lang, "precision", detail::percent(m.precision)});
        detail::emit_row(out, format, {lang, "f1", detail::percent(m.f1)});
      } else {
        detail::emit_row(out, format, {lang, "rho", detail::rho_text(std::get<RhoResult>(metric).rho)});
      }
    }
    return out.str();
  }
  if (binary) {
    detail::emit_header(out, format, {"language", "recall", "precision", "f1"});
    for (const auto& [language, metric] : report.per_language) {
      const auto& m = std::get<BinaryMetrics>(metric);
      detail::emit_row(out, format,
                       {std::string(to_string(language)), detail::percent(m.recall),
                        detail::percent(m.precision), detail::percent(m.f1)});
    }
    if (report.complete()) {
      detail::emit_row(out, format, {"average", "", "", detail::percent(report.global())});
    }
  } else {
    detail::emit_header(out, format, {"language", "rho"});
    for (const auto& [language, metric] : report.per_language) {
      detail::emit_row(out, format, {std::string(to_string(language)),
                                     detail::rho_text(std::get<RhoResult>(metric).rho)});
    }
    if (report.complete()) {
      detail::emit_row(out, format, {"average", detail::rho_text(report.global())});
    }
  }
  return out.str();
}

inline std::string emit_report(const PatternErrorReport& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kPlotData) {
    detail::emit_header(out, format, {"pattern", "model", "pct", "seen"});
    for (const auto& row : report.rows) {
      detail::emit_row(out, format, {tsv_escape(row.pattern), tsv_escape(row.model),
                                     format_fixed(row.error_percentage, kPercentDecimals),
                                     row.seen_in_training ? "1" : "0"});
    }
    return out.str();
  }
  detail::emit_header(out, format, {"pattern", "model", "occurrences", "wrong", "error_pct", "seen"});
  for (const auto& row : report.rows) {
    std::string pattern = format == ReportFormat::kTsv ? tsv_escape(row.pattern) : row.pattern;
    detail::emit_row(out, format,
                     {pattern, format == ReportFormat::kTsv ? tsv_escape(row.model) : row.model,
                      std::to_string(row.occurrences), std::to_string(row.wrong),
                      format_fixed(row.error_percentage, kPercentDecimals),
                      row.seen_in_training ? "yes" : "no"});
  }
  return out.str();
}

inline std::string emit_report(const MetricsReport& report, std::string_view format) {
  return emit_report(report, parse_report_format(format));
}

inline std::string emit_report(const PatternErrorReport& report, std::string_view format) {
  return emit_report(report, parse_report_format(format));
}

}  // namespace taxo

#endif  // TAXO_EVAL_HPP_
