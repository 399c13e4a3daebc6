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

#include <doctest.h>

#include <random>
#include <sstream>

#include "dre/domain_model.hpp"
#include "dre/evaluation.hpp"
#include "test_support.hpp"

using namespace dre;

namespace {

FitConfig quick_fit() {
  FitConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 10;
  cfg.batch_size = 4;
  return cfg;
}

// 1-D TransE with hand-placed entities.
EmbeddingModel line_model(const std::vector<double>& positions, double relation) {
  EmbeddingModel m(Variant::TransE, Dissimilarity::L1, positions.size(), 1, 1, 1);
  for (std::size_t i = 0; i < positions.size(); ++i) m.entity(i)[0] = positions[i];
  m.relation(0)[0] = relation;
  return m;
}

void check_report_invariants(const EvalReport& r) {
  for (int side = 0; side < 3; ++side) {
    const Metrics& raw = r.overall[0][side];
    const Metrics& filt = r.overall[1][side];
    for (const Metrics* m : {&raw, &filt}) {
      CHECK(m->hits1 <= m->hits3);
      CHECK(m->hits3 <= m->hits10);
      CHECK(m->hits10 <= 100.0);
      CHECK(m->hits1 >= 0.0);
      if (m->count > 0) CHECK(m->mean_rank >= 1.0);
    }
    CHECK(filt.mean_rank <= raw.mean_rank);
    CHECK(filt.hits1 >= raw.hits1);
    CHECK(filt.hits10 >= raw.hits10);
  }
  const auto& head = r.overall[1][0];
  const auto& tail = r.overall[1][1];
  const auto& both = r.overall[1][2];
  CHECK(both.mean_rank == doctest::Approx((head.mean_rank + tail.mean_rank) / 2));
  CHECK(both.hits10 == doctest::Approx((head.hits10 + tail.hits10) / 2));
  for (int side = 0; side < 2; ++side) {
    std::size_t total = 0;
    for (const auto& [cat, table] : r.by_category) total += table[1][side].count;
    CHECK(total == r.n_test);
  }
}

}  // namespace

TEST_CASE("combined score adds the raw penalty") {
  // entity 0 at 0, entity 1 at 5; relation +1. Tail domain: unit sphere at 1.
  const auto m = line_model({0, 5, 1}, 1.0);
  DomainModel dm;
  dm.model_fingerprint = model_fingerprint(m);
  dm.dim = 1;
  dm.ellipsoids.emplace(DomainKey{0, Side::Tail}, Ellipsoid::sphere({1}, 1.0));
  const DomainPenalty pen(dm, m);
  const Triple inside{0, 0, 2}, outside{0, 0, 1};
  CHECK(combined_score(m, nullptr, outside, Side::Tail) == score_triple(m, outside));
  CHECK(combined_score(m, &pen, inside, Side::Tail) == score_triple(m, inside));
  // entity 1 sits at 5: distance 3 from the surface point at 2
  CHECK(combined_score(m, &pen, outside, Side::Tail) == score_triple(m, outside) + 3.0);
}

TEST_CASE("unique minimum ranks first; filtering removes gold competitors") {
  // gold tail is entity 3 at 1.5, entities 1, 2 at 1.0 and 1.1 beat it and are gold
  // via other triples; entity 4 at 9 is far.
  const auto m = line_model({0, 1.0, 1.1, 1.5, 9}, 1.0);
  std::vector<Triple> train = {{0, 0, 1}, {0, 0, 2}};
  std::vector<Triple> test = {{0, 0, 3}};
  Vocab ents, rels;
  for (auto s : {"e0", "e1", "e2", "e3", "e4"}) ents.intern(s);
  rels.intern("r");
  const KnowledgeGraph g(ents, rels, train, {}, test);
  CHECK(rank_entity(m, nullptr, g, test[0], Side::Tail, Setting::Raw) == 3);
  CHECK(rank_entity(m, nullptr, g, test[0], Side::Tail, Setting::Filtered) == 1);
  CHECK(rank_entity(m, nullptr, g, train[0], Side::Tail, Setting::Raw) == 1);
  const auto report = evaluate(m, nullptr, g);
  CHECK(report.records[1].raw_rank == report.records[1].filtered_rank + 2);
}

TEST_CASE("identical scores: optimistic rank 1, pessimistic rank n") {
  const auto g = testing::toy_graph();
  const EmbeddingModel zero(Variant::TransE, Dissimilarity::L1, 4, 1, 3, 3);
  const auto opt = evaluate(zero, nullptr, g);
  CHECK(opt.at(Setting::Raw, ReportSide::Combined).mean_rank == 1.0);
  CHECK(opt.tie_rate == 1.0);
  EvalOptions pess;
  pess.ties = TieMode::Pessimistic;
  const auto worst = evaluate(zero, nullptr, g, pess);
  CHECK(worst.at(Setting::Raw, ReportSide::Combined).mean_rank == 4.0);
  CHECK(rank_entity(zero, nullptr, g, g.test()[0], Side::Head, Setting::Raw,
                    TieMode::Pessimistic) == 4);
}

TEST_CASE("evaluate matches the brute-force evaluator on random graphs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n_ent = 8 + trial * 3;
    const auto g = testing::random_graph(rng, n_ent, 3, 4 * n_ent, 5, 12);
    const Variant v = static_cast<Variant>(trial % 3);
    const bool integral = trial % 2 == 1;
    const auto m = testing::random_model(rng, v, Dissimilarity::L1, g.num_entities(),
                                         g.num_relations(), 3, v == Variant::TransE ? 3 : 2,
                                         integral);
    const auto base = evaluate(m, nullptr, g);
    CHECK(testing::oracle_mismatches(base, testing::oracle_evaluate(m, nullptr, g)) == 0);
    check_report_invariants(base);
    if (!integral) {
      const auto dm = fit_all_domains(g, m, quick_fit());
      const auto dre = evaluate(m, &dm, g);
      CHECK(testing::oracle_mismatches(dre, testing::oracle_evaluate(m, &dm, g)) == 0);
      check_report_invariants(dre);
    }
  }
}

TEST_CASE("rank_entity agrees with evaluate record by record") {
  std::mt19937_64 rng(17);
  const auto g = testing::random_graph(rng, 20, 3, 60, 5, 15);
  const auto m = testing::random_model(rng, Variant::STransE, Dissimilarity::L2, 20, 3, 3, 3);
  const auto dm = fit_all_domains(g, m, quick_fit());
  const DomainPenalty pen(dm, m);
  const auto report = evaluate(m, &dm, g);
  for (const RankRecord& rec : report.records) {
    const Triple& t = g.test()[rec.triple_index];
    CHECK(rec.raw_rank == rank_entity(m, &pen, g, t, rec.side, Setting::Raw));
    CHECK(rec.filtered_rank == rank_entity(m, &pen, g, t, rec.side, Setting::Filtered));
  }
}

TEST_CASE("a constant shift of every baseline score leaves ranks unchanged") {
  std::mt19937_64 rng(23);
  const auto g = testing::random_graph(rng, 15, 2, 40, 4, 10);
  const auto m = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, g.num_entities(),
                                       g.num_relations(), 3, 3, true);
  // extra dimension where every entity sits at 0 and every relation at 4:
  // adds exactly 4 to each L1 score
  EmbeddingModel shifted(Variant::TransE, Dissimilarity::L1, g.num_entities(), g.num_relations(),
                         4, 4);
  for (EntityId e = 0; e < g.num_entities(); ++e) {
    std::copy(m.entity(e).begin(), m.entity(e).end(), shifted.entity(e).begin());
  }
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    std::copy(m.relation(r).begin(), m.relation(r).end(), shifted.relation(r).begin());
    shifted.relation(r)[3] = 4.0;
  }
  const auto a = evaluate(m, nullptr, g);
  const auto b = evaluate(shifted, nullptr, g);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].raw_rank == b.records[i].raw_rank);
    CHECK(a.records[i].filtered_rank == b.records[i].filtered_rank);
  }
}

TEST_CASE("all-enclosing ellipsoids reproduce the baseline exactly") {
  std::mt19937_64 rng(29);
  const auto g = testing::random_graph(rng, 25, 3, 80, 5, 20);
  const auto m = testing::random_model(rng, Variant::TransR, Dissimilarity::L1, g.num_entities(),
                                       g.num_relations(), 4, 3);
  DomainModel dm;
  dm.model_fingerprint = model_fingerprint(m);
  dm.dim = 3;
  for (const Domain& d : extract_domains(g)) {
    dm.ellipsoids.emplace(DomainKey{d.relation, d.side}, Ellipsoid::sphere({0, 0, 0}, 1e6));
  }
  const auto base = evaluate(m, nullptr, g);
  const auto dre = evaluate(m, &dm, g);
  CHECK(base.overall == dre.overall);
}

TEST_CASE("reports are identical for any thread count") {
  std::mt19937_64 rng(31);
  const auto g = testing::random_graph(rng, 40, 4, 150, 10, 30);
  const auto m = testing::random_model(rng, Variant::STransE, Dissimilarity::L1, g.num_entities(),
                                       g.num_relations(), 4, 4);
  const auto dm = fit_all_domains(g, m, quick_fit());
  EvalOptions one, many;
  many.threads = 5;
  const auto a = evaluate(m, &dm, g, one);
  const auto b = evaluate(m, &dm, g, many);
  std::ostringstream ta, tb;
  write_report_text(ta, a, "dre");
  write_report_text(tb, b, "dre");
  CHECK(ta.str() == tb.str());
}

TEST_CASE("report text and CSV layouts") {
  const auto g = testing::toy_graph();
  std::mt19937_64 rng(37);
  const auto m = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 4, 1, 3, 3);
  const auto dm = fit_all_domains(g, m, quick_fit());
  const auto base = evaluate(m, nullptr, g);
  const auto dre = evaluate(m, &dm, g);

  std::ostringstream text;
  write_report_text(text, base);
  CHECK(text.str().find("baseline.filtered.tail.hits@10 = ") != std::string::npos);
  CHECK(text.str().find("baseline.category.1-to-1.filtered.head.hits@10 = ") != std::string::npos);
  CHECK(text.str().find("dre.") == std::string::npos);
  CHECK(text.str().find("penalty_term") == std::string::npos);

  std::ostringstream cmp;
  write_comparison_text(cmp, base, dre);
  CHECK(cmp.str().find("dre.raw.head.mean_rank = ") != std::string::npos);
  CHECK(cmp.str().find("delta.raw.head.mean_rank = ") != std::string::npos);

  std::ostringstream csv;
  write_report_csv(csv, base);
  CHECK(csv.str().rfind("setting,side,category,metric,value\n", 0) == 0);
  CHECK(csv.str().find("\nfiltered,combined,all,hits@10,") != std::string::npos);

  std::ostringstream csv2;
  write_comparison_csv(csv2, base, dre);
  std::istringstream lines(csv2.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "setting,side,category,metric,baseline,dre,delta");
  while (std::getline(lines, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    REQUIRE(cols.size() == 7);
    CHECK(std::stod(cols[6]) == doctest::Approx(std::stod(cols[5]) - std::stod(cols[4])));
  }
}

TEST_CASE("histogram bins") {
  CHECK(ScoreHistogram::bin(0.0) == 0);
  CHECK(ScoreHistogram::bin(1e-9) == 1);
  CHECK(ScoreHistogram::bin(1.0) == 2 + 8);
  CHECK(ScoreHistogram::bin(1e9) == ScoreHistogram::kBins - 1);
  CHECK(ScoreHistogram::bin_label(10) == "[2^0,2^1)");
}
