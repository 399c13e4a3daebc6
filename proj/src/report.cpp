// Copyright 2026 The DRE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iomanip>
#include <sstream>

#include "dre/evaluation.hpp"

namespace dre {

namespace {

constexpr Setting kSettings[] = {Setting::Raw, Setting::Filtered};
constexpr ReportSide kSides[] = {ReportSide::Head, ReportSide::Tail, ReportSide::Combined};
constexpr const char* kMetricNames[] = {"mean_rank", "hits@1", "hits@3", "hits@10"};

double metric_value(const Metrics& m, int i) {
  switch (i) {
    case 0: return m.mean_rank;
    case 1: return m.hits1;
    case 2: return m.hits3;
    default: return m.hits10;
  }
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(10) << x;
  return ss.str();
}

// Visits every (key, value) of a report in a fixed order.
template <class Fn>
void for_each_entry(const EvalReport& r, Fn&& fn) {
  fn("", "", "n_test", static_cast<double>(r.n_test));
  fn("", "", "tie_rate", r.tie_rate);
  fn("", "", "skipped_domain_predictions", static_cast<double>(r.skipped_domain_predictions));
  for (Setting s : kSettings) {
    for (ReportSide side : kSides) {
      const Metrics& m = r.overall[static_cast<int>(s)][static_cast<int>(side)];
      for (int i = 0; i < 4; ++i) {
        fn(std::string(to_string(s)) + "." + std::string(to_string(side)), "all", kMetricNames[i],
           metric_value(m, i));
      }
    }
  }
  for (const auto& [cat, table] : r.by_category) {
    for (Setting s : kSettings) {
      for (ReportSide side : kSides) {
        const Metrics& m = table[static_cast<int>(s)][static_cast<int>(side)];
        const std::string where = std::string(to_string(s)) + "." + std::string(to_string(side));
        fn(where, cat, "count", static_cast<double>(m.count));
        fn(where, cat, "hits@10", m.hits10);
      }
    }
  }
}

std::string text_key(const std::string& where, const std::string& cat, const std::string& metric) {
  if (where.empty()) return metric;
  if (cat == "all") return where + "." + metric;
  return "category." + cat + "." + where + "." + metric;
}

void write_histogram(std::ostream& out, const std::string& prefix, const char* name,
                     const ScoreHistogram& h) {
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << prefix << ".histogram." << name << "." << ScoreHistogram::bin_label(i) << " = "
        << h.counts[i] << '\n';
  }
}

// "raw.head" -> ("raw", "head"); "" -> ("", "")
std::pair<std::string, std::string> split_where(const std::string& where) {
  const auto dot = where.find('.');
  if (dot == std::string::npos) return {"", ""};
  return {where.substr(0, dot), where.substr(dot + 1)};
}

}  // namespace

void write_report_text(std::ostream& out, const EvalReport& report, const std::string& prefix) {
  for_each_entry(report, [&](const std::string& where, const std::string& cat,
                             const std::string& metric, double v) {
    out << prefix << "." << text_key(where, cat, metric) << " = " << fmt(v) << '\n';
  });
  write_histogram(out, prefix, "baseline_term", report.baseline_terms);
  if (report.with_domains) write_histogram(out, prefix, "penalty_term", report.penalty_terms);
}

void write_comparison_text(std::ostream& out, const EvalReport& baseline, const EvalReport& dre) {
  write_report_text(out, baseline, "baseline");
  write_report_text(out, dre, "dre");
  std::vector<double> base_values;
  for_each_entry(baseline, [&](const std::string&, const std::string&, const std::string&,
                               double v) { base_values.push_back(v); });
  std::size_t i = 0;
  for_each_entry(dre, [&](const std::string& where, const std::string& cat,
                          const std::string& metric, double v) {
    const double b = i < base_values.size() ? base_values[i] : 0.0;
    ++i;
    if (where.empty()) return;
    out << "delta." << text_key(where, cat, metric) << " = " << fmt(v - b) << '\n';
  });
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "setting,side,category,metric,value\n";
  for_each_entry(report, [&](const std::string& where, const std::string& cat,
                             const std::string& metric, double v) {
    const auto [setting, side] = split_where(where);
    out << setting << ',' << side << ',' << cat << ',' << metric << ',' << fmt(v) << '\n';
  });
}

void write_comparison_csv(std::ostream& out, const EvalReport& baseline, const EvalReport& dre) {
  out << "setting,side,category,metric,baseline,dre,delta\n";
  std::map<std::string, double> base_values;
  for_each_entry(baseline, [&](const std::string& where, const std::string& cat,
                               const std::string& metric, double v) {
    base_values[where + "|" + cat + "|" + metric] = v;
  });
  for_each_entry(dre, [&](const std::string& where, const std::string& cat,
                          const std::string& metric, double v) {
    const auto it = base_values.find(where + "|" + cat + "|" + metric);
    const double b = it == base_values.end() ? 0.0 : it->second;
    const auto [setting, side] = split_where(where);
    out << setting << ',' << side << ',' << cat << ',' << metric << ',' << fmt(b) << ','
        << fmt(v) << ',' << fmt(v - b) << '\n';
  });
}

}  // namespace dre
