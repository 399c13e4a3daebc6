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

#include "dre/domain_model.hpp"
#include "dre/errors.hpp"
#include "test_support.hpp"

using namespace dre;
using dre::testing::TempDir;

namespace {

FitConfig quick_fit() {
  FitConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 20;
  cfg.batch_size = 4;
  return cfg;
}

}  // namespace

TEST_CASE("toy graph yields one head and one tail ellipsoid") {
  const auto g = testing::toy_graph();
  std::mt19937_64 rng(1);
  const auto m = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 4, 1, 3, 3);
  std::vector<DomainFitSummary> log;
  DomainFitOptions opts;
  opts.on_domain = [&](const DomainFitSummary& s) { log.push_back(s); };
  const auto dm = fit_all_domains(g, m, quick_fit(), opts);
  CHECK(dm.ellipsoids.size() == 2);
  CHECK(dm.skipped.empty());
  CHECK(dm.dim == 3);
  CHECK(dm.model_fingerprint == model_fingerprint(m));
  REQUIRE(log.size() == 2);
  CHECK(log[0].members == 2);
  CHECK(log[0].key.side == Side::Head);
  for (const auto& s : log) CHECK(s.final_mean_score <= s.initial_mean_score);
}

TEST_CASE("head ellipsoid is fitted on projections of the head members") {
  // With a single fit epoch at a negligible step, the ellipsoid is its
  // initialization: centered at the mean of the member projections.
  const auto g = testing::toy_graph();
  std::mt19937_64 rng(2);
  const auto m = testing::random_model(rng, Variant::STransE, Dissimilarity::L1, 4, 1, 3, 2);
  FitConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 1e-300;
  const auto dm = fit_all_domains(g, m, cfg);
  const EntityId a = *g.entities().find("A"), c = *g.entities().find("C");
  const auto pa = project_entity(m, a, 0, Side::Head);
  const auto pc = project_entity(m, c, 0, Side::Head);
  const auto& head = dm.ellipsoids.at({0, Side::Head});
  REQUIRE(head.dim() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(head.center()[i] == doctest::Approx((pa[i] + pc[i]) / 2));
  }
}

TEST_CASE("domains below min_members are skipped and impose no penalty") {
  const auto g = testing::make_graph({{"A", "r", "B"}, {"A", "r", "C"}, {"D", "s", "E"}}, {}, {});
  std::mt19937_64 rng(3);
  const auto m = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 5, 2, 3, 3);
  const auto dm = fit_all_domains(g, m, quick_fit());
  const RelationId r = *g.relations().find("r"), s = *g.relations().find("s");
  CHECK(dm.skipped.contains({r, Side::Head}));
  CHECK(dm.ellipsoids.contains({r, Side::Tail}));
  CHECK(dm.skipped.contains({s, Side::Head}));
  CHECK(dm.skipped.contains({s, Side::Tail}));
  CHECK(dm.ellipsoids.size() + dm.skipped.size() == extract_domains(g).size());
  for (EntityId e = 0; e < 5; ++e) CHECK(domain_penalty(dm, m, e, r, Side::Head) == 0.0);
}

TEST_CASE("penalty is zero inside and the radial distance outside") {
  EmbeddingModel m(Variant::TransE, Dissimilarity::L1, 3, 1, 2, 2);
  m.entity(0)[0] = 0.5;   // inside the unit circle
  m.entity(1)[0] = 3.0;   // distance 2 outside
  m.entity(2)[1] = -1.0;  // on the surface
  DomainModel dm;
  dm.model_fingerprint = model_fingerprint(m);
  dm.dim = 2;
  dm.ellipsoids.emplace(DomainKey{0, Side::Tail}, Ellipsoid::sphere({0, 0}, 1.0));
  const DomainPenalty pen(dm, m);
  CHECK(pen(0, 0, Side::Tail) == 0.0);
  CHECK(pen(1, 0, Side::Tail) == 2.0);
  CHECK(pen(2, 0, Side::Tail) == 0.0);
  CHECK(pen(1, 0, Side::Head) == 0.0);  // no head domain
}

TEST_CASE("a domain model bound to another embedding model is stale") {
  const auto g = testing::toy_graph();
  std::mt19937_64 rng(4);
  const auto m1 = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 4, 1, 3, 3);
  const auto m2 = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 4, 1, 3, 3);
  const auto dm = fit_all_domains(g, m1, quick_fit());
  CHECK_THROWS_AS(DomainPenalty(dm, m2), StaleDomainModelError);
  CHECK_THROWS_AS(domain_penalty(dm, m2, 0, 0, Side::Head), StaleDomainModelError);
}

TEST_CASE("fitting does not touch the embedding model and is thread-count independent") {
  std::mt19937_64 rng(5);
  const auto g = testing::random_graph(rng, 30, 4, 120, 5, 5);
  const auto m = testing::random_model(rng, Variant::TransR, Dissimilarity::L2, 30, 4, 4, 3);
  const auto before = model_fingerprint(m);
  DomainFitOptions serial, parallel;
  parallel.threads = 4;
  const auto a = fit_all_domains(g, m, quick_fit(), serial);
  const auto b = fit_all_domains(g, m, quick_fit(), parallel);
  CHECK(model_fingerprint(m) == before);
  CHECK(a == b);
  for (EntityId e = 0; e < 30; ++e) {
    CHECK(domain_penalty(a, m, e, 1, Side::Tail) == domain_penalty(a, m, e, 1, Side::Tail));
  }
}

TEST_CASE("vocabulary mismatch and empty training split") {
  const auto g = testing::toy_graph();
  std::mt19937_64 rng(6);
  const auto wrong = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 9, 1, 3, 3);
  CHECK_THROWS_AS(fit_all_domains(g, wrong, quick_fit()), ConfigError);
  const auto no_train = testing::make_graph({}, {{"A", "r", "B"}}, {});
  const auto m = testing::random_model(rng, Variant::TransE, Dissimilarity::L1, 2, 1, 3, 3);
  CHECK_THROWS_AS(fit_all_domains(no_train, m, quick_fit()), ConfigError);
}

TEST_CASE("domain-model file round trip") {
  std::mt19937_64 rng(7);
  const auto g = testing::make_graph({{"A", "r", "B"}, {"C", "r", "D"}, {"A", "s", "B"}}, {}, {});
  const auto m = testing::random_model(rng, Variant::STransE, Dissimilarity::L1, 4, 2, 3, 3);
  const auto dm = fit_all_domains(g, m, quick_fit());
  REQUIRE_FALSE(dm.skipped.empty());
  TempDir dir;
  save_domains(dm, dir / "d.bin");
  const auto back = load_domains(dir / "d.bin");
  CHECK(back == dm);

  const std::string bytes = serialize_domains(dm);
  CHECK(bytes.rfind("DREDOM v1 3 2 2 ", 0) == 0);

  DomainModel empty;
  empty.model_fingerprint = 0xabcdef;
  const auto empty_back = deserialize_domains(serialize_domains(empty));
  CHECK(empty_back == empty);
  CHECK(empty_back.ellipsoids.empty());
  CHECK(empty_back.skipped.empty());
}

TEST_CASE("garbled domain-model files") {
  DomainModel empty;
  empty.model_fingerprint = 42;
  std::string bytes = serialize_domains(empty);
  CHECK_THROWS_AS(deserialize_domains("DREDOM v1 2 0 0\n"), FormatError);
  CHECK_THROWS_AS(deserialize_domains("DREDOM v1 2 0 0 xyz\n"), FormatError);
  CHECK_THROWS_AS(deserialize_domains("DREDOM v1 2 0 0 00000000000000zz\n"), FormatError);
  CHECK_THROWS_AS(deserialize_domains("DREKGE v1 2 0 0 0000000000000000\n"), FormatError);
  CHECK_THROWS_AS(deserialize_domains("DREDOM v1 2 1 0 0000000000000000\n"), FormatError);
  CHECK_NOTHROW(deserialize_domains(bytes));
}
