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

#ifndef DRE_EVALUATION_HPP_
#define DRE_EVALUATION_HPP_

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dre/domain_model.hpp"
#include "dre/embedding.hpp"
#include "dre/kg_data.hpp"

namespace dre {

enum class Setting { Raw, Filtered };
enum class TieMode { Optimistic, Pessimistic };
enum class ReportSide { Head, Tail, Combined };

std::string_view to_string(Setting s);
std::string_view to_string(ReportSide s);

// Baseline score plus, when `penalty` is given, the domain penalty of the
// entity occupying `side` against that side's domain of the relation.
double combined_score(const EmbeddingModel& model, const DomainPenalty* penalty, const Triple& t,
                      Side side);

// 1-based rank of t.entity(side) among all entities substituted into
// `side`, ascending by combined score. Filtered drops other candidates that
// form gold triples. Optimistic ties: 1 + #strictly better; pessimistic:
// 1 + #(other candidates scoring <= gold).
std::size_t rank_entity(const EmbeddingModel& model, const DomainPenalty* penalty,
                        const KnowledgeGraph& graph, const Triple& t, Side side,
                        Setting setting, TieMode ties = TieMode::Optimistic);

struct Metrics {
  std::size_t count = 0;
  double mean_rank = 0.0;
  double hits1 = 0.0;  // percentages
  double hits3 = 0.0;
  double hits10 = 0.0;

  double hits(int n) const { return n == 1 ? hits1 : n == 3 ? hits3 : hits10; }
  bool operator==(const Metrics&) const = default;
};

// [setting][side]
using MetricsTable = std::array<std::array<Metrics, 3>, 2>;

struct RankRecord {
  std::size_t triple_index = 0;
  Side side = Side::Head;
  std::size_t raw_rank = 0;
  std::size_t filtered_rank = 0;
  bool tie = false;             // another candidate scored exactly like gold
  bool domain_skipped = false;  // no ellipsoid for this (relation, side)
};

// Fixed log2-spaced bins: [0], then (0, 2^-8), [2^-8, 2^-7), ..., [2^8, inf).
struct ScoreHistogram {
  static constexpr int kMinExp = -8;
  static constexpr int kMaxExp = 8;
  static constexpr std::size_t kBins = 2 + (kMaxExp - kMinExp) + 1;
  std::array<std::uint64_t, kBins> counts{};

  static std::size_t bin(double x);
  static std::string bin_label(std::size_t i);
};

struct EvalReport {
  std::size_t n_test = 0;
  bool with_domains = false;
  MetricsTable overall{};
  // keyed by relation-category label; test relations unseen in training
  // fall under "unclassified"
  std::map<std::string, MetricsTable> by_category;
  double tie_rate = 0.0;
  std::size_t skipped_domain_predictions = 0;
  ScoreHistogram baseline_terms;
  ScoreHistogram penalty_terms;
  std::vector<RankRecord> records;  // ordered by (triple_index, side)

  const Metrics& at(Setting s, ReportSide side) const {
    return overall[static_cast<int>(s)][static_cast<int>(side)];
  }
};

struct EvalOptions {
  Split split = Split::Test;
  TieMode ties = TieMode::Optimistic;
  unsigned threads = 1;
};

// Ranks every triple of the split on both sides. Results do not depend on
// the thread count.
EvalReport evaluate(const EmbeddingModel& model, const DomainModel* domains,
                    const KnowledgeGraph& graph, const EvalOptions& options = {});

// Aggregates rank records into a report table (used by evaluate).
MetricsTable aggregate(const std::vector<RankRecord>& records);

// `key = value` lines with keys "<prefix>.<setting>.<side>.<metric>".
void write_report_text(std::ostream& out, const EvalReport& report,
                       const std::string& prefix = "baseline");
// Baseline vs DRE with deltas (dre - baseline).
void write_comparison_text(std::ostream& out, const EvalReport& baseline, const EvalReport& dre);

// CSV columns: setting,side,category,metric,value
void write_report_csv(std::ostream& out, const EvalReport& report);
// CSV columns: setting,side,category,metric,baseline,dre,delta
void write_comparison_csv(std::ostream& out, const EvalReport& baseline, const EvalReport& dre);

}  // namespace dre

#endif  // DRE_EVALUATION_HPP_
