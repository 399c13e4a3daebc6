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

#include "dre/evaluation.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

#include "dre/errors.hpp"
#include "dre/parallel.hpp"

namespace dre {

std::string_view to_string(Setting s) { return s == Setting::Raw ? "raw" : "filtered"; }

std::string_view to_string(ReportSide s) {
  switch (s) {
    case ReportSide::Head: return "head";
    case ReportSide::Tail: return "tail";
    case ReportSide::Combined: return "combined";
  }
  return "?";
}

double combined_score(const EmbeddingModel& model, const DomainPenalty* penalty, const Triple& t,
                      Side side) {
  const double base = score_triple(model, t);
  if (penalty == nullptr) return base;
  return base + (*penalty)(t.entity(side), t.relation, side);
}

std::size_t rank_entity(const EmbeddingModel& model, const DomainPenalty* penalty,
                        const KnowledgeGraph& graph, const Triple& t, Side side,
                        Setting setting, TieMode ties) {
  const EntityId gold = t.entity(side);
  const double gold_score = combined_score(model, penalty, t, side);
  std::size_t rank = 1;
  for (EntityId c = 0; c < graph.num_entities(); ++c) {
    if (c == gold) continue;
    const Triple candidate = t.with_entity(side, c);
    if (setting == Setting::Filtered && graph.is_gold(candidate)) continue;
    const double s = combined_score(model, penalty, candidate, side);
    if (s < gold_score || (ties == TieMode::Pessimistic && s == gold_score)) ++rank;
  }
  return rank;
}

std::size_t ScoreHistogram::bin(double x) {
  if (!(x > 0.0)) return 0;
  const int e = std::ilogb(x);  // floor(log2 x)
  if (e < kMinExp) return 1;
  if (e >= kMaxExp) return kBins - 1;
  return static_cast<std::size_t>(2 + (e - kMinExp));
}

std::string ScoreHistogram::bin_label(std::size_t i) {
  if (i == 0) return "0";
  if (i == 1) return "(0,2^" + std::to_string(kMinExp) + ")";
  if (i == kBins - 1) return "[2^" + std::to_string(kMaxExp) + ",inf)";
  const int lo = kMinExp + static_cast<int>(i) - 2;
  return "[2^" + std::to_string(lo) + ",2^" + std::to_string(lo + 1) + ")";
}

namespace {

// Every entity projected into one relation's space, plus its domain
// penalties. For TransE the entity table is used as is.
class RelationView {
 public:
  RelationView(const EmbeddingModel& model, const DomainPenalty* penalty, RelationId r,
               unsigned threads)
      : model_(model), k_(model.dim_relation()) {
    const std::size_t n = model.num_entities();
    if (model.variant() != Variant::TransE) {
      head_.resize(n * k_);
      if (model.variant() == Variant::STransE) tail_.resize(n * k_);
      parallel_for(n, threads, [&](std::size_t e) {
        const auto id = static_cast<EntityId>(e);
        project_entity(model, id, r, Side::Head, std::span<double>(head_).subspan(e * k_, k_));
        if (!tail_.empty()) {
          project_entity(model, id, r, Side::Tail, std::span<double>(tail_).subspan(e * k_, k_));
        }
      });
    }
    if (penalty != nullptr) {
      head_ell_ = penalty->find(r, Side::Head);
      tail_ell_ = penalty->find(r, Side::Tail);
      if (head_ell_ != nullptr) head_pen_.resize(n);
      if (tail_ell_ != nullptr) tail_pen_.resize(n);
      parallel_for(n, threads, [&](std::size_t e) {
        const auto id = static_cast<EntityId>(e);
        if (head_ell_ != nullptr) head_pen_[e] = score_test(*head_ell_, project(id, Side::Head));
        if (tail_ell_ != nullptr) tail_pen_[e] = score_test(*tail_ell_, project(id, Side::Tail));
      });
    }
  }

  std::span<const double> project(EntityId e, Side side) const {
    if (model_.variant() == Variant::TransE) return model_.entity(e);
    const auto& block = (side == Side::Tail && !tail_.empty()) ? tail_ : head_;
    return std::span<const double>(block).subspan(e * k_, k_);
  }
  bool has_domain(Side side) const {
    return (side == Side::Head ? head_ell_ : tail_ell_) != nullptr;
  }
  // nullopt when no penalty is added at all (no domain model)
  const std::vector<double>* penalties(Side side) const {
    const auto& v = side == Side::Head ? head_pen_ : tail_pen_;
    return v.empty() ? nullptr : &v;
  }

 private:
  const EmbeddingModel& model_;
  std::size_t k_;
  std::vector<double> head_, tail_;
  const Ellipsoid* head_ell_ = nullptr;
  const Ellipsoid* tail_ell_ = nullptr;
  std::vector<double> head_pen_, tail_pen_;
};

struct AtomicHistogram {
  std::array<std::atomic<std::uint64_t>, ScoreHistogram::kBins> counts{};
  void add(const ScoreHistogram& h) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) counts[i] += h.counts[i];
  }
  ScoreHistogram snapshot() const {
    ScoreHistogram h;
    for (std::size_t i = 0; i < h.counts.size(); ++i) h.counts[i] = counts[i].load();
    return h;
  }
};

Metrics summarize(std::size_t count, double rank_sum, std::size_t h1, std::size_t h3,
                  std::size_t h10) {
  Metrics m;
  m.count = count;
  if (count == 0) return m;
  const double n = static_cast<double>(count);
  m.mean_rank = rank_sum / n;
  m.hits1 = 100.0 * static_cast<double>(h1) / n;
  m.hits3 = 100.0 * static_cast<double>(h3) / n;
  m.hits10 = 100.0 * static_cast<double>(h10) / n;
  return m;
}

}  // namespace

MetricsTable aggregate(const std::vector<RankRecord>& records) {
  MetricsTable table{};
  for (int s = 0; s < 2; ++s) {
    for (int side = 0; side < 3; ++side) {
      std::size_t count = 0, h1 = 0, h3 = 0, h10 = 0;
      double sum = 0.0;
      for (const RankRecord& rec : records) {
        if (side != 2 && static_cast<int>(rec.side) != side) continue;
        const std::size_t rank = s == 0 ? rec.raw_rank : rec.filtered_rank;
        ++count;
        sum += static_cast<double>(rank);
        h1 += rank <= 1;
        h3 += rank <= 3;
        h10 += rank <= 10;
      }
      table[s][side] = summarize(count, sum, h1, h3, h10);
    }
  }
  return table;
}

EvalReport evaluate(const EmbeddingModel& model, const DomainModel* domains,
                    const KnowledgeGraph& graph, const EvalOptions& options) {
  if (model.num_entities() != graph.num_entities() ||
      model.num_relations() != graph.num_relations()) {
    throw ConfigError("embedding model vocabulary does not match the graph");
  }
  std::optional<DomainPenalty> penalty;
  if (domains != nullptr) penalty.emplace(*domains, model);
  const DomainPenalty* pen = penalty ? &*penalty : nullptr;

  const auto& triples = graph.split(options.split);
  const std::size_t n_ent = graph.num_entities();
  EvalReport report;
  report.n_test = triples.size();
  report.with_domains = domains != nullptr;
  report.records.resize(2 * triples.size());

  std::map<RelationId, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < triples.size(); ++i) by_relation[triples[i].relation].push_back(i);

  AtomicHistogram base_hist, pen_hist;
  const bool pessimistic = options.ties == TieMode::Pessimistic;

  for (const auto& [r, indices] : by_relation) {
    const RelationView view(model, pen, r, options.threads);
    const auto rvec = model.relation(r);
    parallel_for(2 * indices.size(), options.threads, [&](std::size_t job) {
      const std::size_t idx = indices[job / 2];
      const Side side = job % 2 == 0 ? Side::Head : Side::Tail;
      const Triple& t = triples[idx];
      const EntityId gold = t.entity(side);
      const auto* pens = view.penalties(side);

      thread_local std::vector<double> scores;
      scores.resize(n_ent);
      ScoreHistogram bh, ph;
      const auto fixed = side == Side::Head ? view.project(t.tail, Side::Tail)
                                            : view.project(t.head, Side::Head);
      for (EntityId c = 0; c < n_ent; ++c) {
        const auto proj = view.project(c, side);
        const double base = side == Side::Head
                                ? translation_distance(model.dissimilarity(), proj, rvec, fixed)
                                : translation_distance(model.dissimilarity(), fixed, rvec, proj);
        ++bh.counts[ScoreHistogram::bin(base)];
        if (pen != nullptr) {
          const double p = pens != nullptr ? (*pens)[c] : 0.0;
          ++ph.counts[ScoreHistogram::bin(p)];
          scores[c] = base + p;
        } else {
          scores[c] = base;
        }
      }
      base_hist.add(bh);
      if (pen != nullptr) pen_hist.add(ph);

      const double g = scores[gold];
      std::size_t ahead = 0;
      bool tie = false;
      for (EntityId c = 0; c < n_ent; ++c) {
        if (c == gold) continue;
        if (scores[c] == g) tie = true;
        if (scores[c] < g || (pessimistic && scores[c] == g)) ++ahead;
      }
      std::size_t gold_ahead = 0;
      for (EntityId c : graph.gold_fillers(t, side)) {
        if (c == gold) continue;
        if (scores[c] < g || (pessimistic && scores[c] == g)) ++gold_ahead;
      }
      RankRecord& rec = report.records[2 * idx + (side == Side::Head ? 0 : 1)];
      rec.triple_index = idx;
      rec.side = side;
      rec.raw_rank = 1 + ahead;
      rec.filtered_rank = 1 + ahead - gold_ahead;
      rec.tie = tie;
      rec.domain_skipped = pen != nullptr && !view.has_domain(side);
    });
  }

  std::size_t ties = 0;
  for (const RankRecord& rec : report.records) {
    if (rec.filtered_rank > rec.raw_rank) {
      throw std::logic_error("filtered rank exceeds raw rank");
    }
    ties += rec.tie;
    report.skipped_domain_predictions += rec.domain_skipped;
  }
  report.tie_rate = report.records.empty()
                        ? 0.0
                        : static_cast<double>(ties) / static_cast<double>(report.records.size());
  report.overall = aggregate(report.records);

  const auto categories = classify_relations(graph);
  std::map<std::string, std::vector<RankRecord>> grouped;
  for (const RankRecord& rec : report.records) {
    auto it = categories.find(triples[rec.triple_index].relation);
    const std::string label =
        it == categories.end() ? std::string("unclassified") : std::string(to_string(it->second));
    grouped[label].push_back(rec);
  }
  for (const auto& [label, recs] : grouped) report.by_category[label] = aggregate(recs);

  report.baseline_terms = base_hist.snapshot();
  report.penalty_terms = pen_hist.snapshot();
  return report;
}

}  // namespace dre
