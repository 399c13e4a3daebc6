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

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "dre/domain_model.hpp"
#include "dre/embedding.hpp"
#include "test_support.hpp"

using namespace dre;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "dre");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::map<std::string, double> parse_report(const fs::path& p) {
  std::map<std::string, double> kv;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
  }
  return kv;
}

// Small dataset in a scratch directory; the graph is toy_graph() plus a
// second relation.
struct Workspace {
  testing::TempDir dir;
  std::string data() const { return dir.path().string(); }
  std::string file(const std::string& name) const { return (dir / name).string(); }

  Workspace() {
    testing::write_text(dir / "train.txt", "A\tr\tB\nC\tr\tD\nE\tr\tB\nA\ts\tC\nE\ts\tC\n");
    testing::write_text(dir / "valid.txt", "C\tr\tD\n");
    testing::write_text(dir / "test.txt", "A\tr\tB\nE\ts\tC\n");
  }

  Result train(const std::string& out, std::vector<std::string> extra = {}) const {
    std::vector<std::string> args = {"train", "--dataset", data(), "--dim", "8", "--epochs", "200",
                                     "--lr", "0.01", "--margin", "1", "--batch", "1",
                                     "--out", file(out)};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  Result fit(const std::string& model, const std::string& out) const {
    return run({"fit-domains", "--dataset", data(), "--model", file(model), "--fit-lr", "0.01",
                "--fit-epochs", "50", "--fit-batch", "2", "--out", file(out)});
  }
};

}  // namespace

TEST_CASE("train writes a model; same seed gives identical bytes") {
  Workspace ws;
  const Result a = ws.train("a.bin");
  REQUIRE(a.code == 0);
  CHECK(a.out.empty());
  CHECK(a.err.find("epoch 200 loss") != std::string::npos);
  REQUIRE(ws.train("b.bin").code == 0);
  CHECK(slurp(ws.file("a.bin")) == slurp(ws.file("b.bin")));
  REQUIRE(ws.train("c.bin", {"--seed", "7"}).code == 0);
  CHECK(slurp(ws.file("a.bin")) != slurp(ws.file("c.bin")));
  const auto m = load_model(ws.file("a.bin"));
  CHECK(m.variant() == Variant::TransE);
  CHECK(m.dim_entity() == 8);
  CHECK(m.num_entities() == 5);
}

TEST_CASE("staged variants need a TransE model") {
  Workspace ws;
  const Result r = ws.train("s.bin", {"--variant", "stranse"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--init-model") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.file("s.bin")));

  REQUIRE(ws.train("e.bin").code == 0);
  const Result s = ws.train("s.bin", {"--variant", "stranse", "--init-model", ws.file("e.bin"),
                                      "--epochs", "5"});
  REQUIRE(s.code == 0);
  const auto m = load_model(ws.file("s.bin"));
  CHECK(m.variant() == Variant::STransE);
  // a TransR model is not a valid init
  REQUIRE(ws.train("r.bin", {"--variant", "transr", "--init-model", ws.file("e.bin"), "--epochs",
                             "2"}).code == 0);
  CHECK(ws.train("x.bin", {"--variant", "stranse", "--init-model", ws.file("r.bin")}).code == 1);
}

TEST_CASE("flags override the config file, which overrides the preset") {
  Workspace ws;
  const auto base = std::vector<std::string>{"train", "--dataset", ws.data(), "--epochs", "1"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  };
  REQUIRE(with({"--preset", "fb15k-transe", "--out", ws.file("p.bin")}).code == 0);
  CHECK(load_model(ws.file("p.bin")).dim_entity() == 50);

  testing::write_text(ws.dir / "cfg.ini", "[train]\ndim = 6\nmargin = 3\n");
  REQUIRE(with({"--config", ws.file("cfg.ini"), "--preset", "wn18-transe", "--out",
                ws.file("c.bin")}).code == 0);
  CHECK(load_model(ws.file("c.bin")).dim_entity() == 6);

  const Result r = with({"--config", ws.file("cfg.ini"), "--preset", "wn18-transe", "--dim", "4",
                         "--out", ws.file("f.bin")});
  REQUIRE(r.code == 0);
  CHECK(load_model(ws.file("f.bin")).dim_entity() == 4);
  CHECK(r.err.find("margin=3") != std::string::npos);

  CHECK(with({"--preset", "nope", "--out", ws.file("n.bin")}).code == 1);
}

TEST_CASE("usage and data errors map to exit codes") {
  Workspace ws;
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"train", "--bogus"}).code == 1);
  CHECK(ws.train("m.bin", {"--dissim", "l3"}).code == 1);
  CHECK(ws.train("m.bin", {"--lr", "-1"}).code == 1);
  CHECK(run({"train", "--out", ws.file("m.bin")}).code == 1);  // no data

  testing::write_text(ws.dir / "bad.txt", "A\tr\tB\nonly-two\tfields\n");
  const Result bad = run({"train", "--train", ws.file("bad.txt"), "--valid", ws.file("valid.txt"),
                          "--test", ws.file("test.txt"), "--out", ws.file("m.bin")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find(":2:") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.file("m.bin")));

  CHECK(ws.train("m.bin", {"--lr", "1e306", "--dissim", "l2", "--margin", "1e300"}).code == 3);
  CHECK_FALSE(fs::exists(ws.file("m.bin")));
}

TEST_CASE("fit-domains writes a fingerprinted domain model") {
  Workspace ws;
  REQUIRE(ws.train("m.bin").code == 0);
  const Result r = ws.fit("m.bin", "d.bin");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("domain r tail members 2") != std::string::npos);
  CHECK(r.err.find("skipped s tail") != std::string::npos);
  const auto dm = load_domains(ws.file("d.bin"));
  CHECK(dm.model_fingerprint == model_fingerprint(load_model(ws.file("m.bin"))));
  CHECK(dm.ellipsoids.size() == 3);

  REQUIRE(ws.fit("m.bin", "d2.bin").code == 0);
  CHECK(slurp(ws.file("d.bin")) == slurp(ws.file("d2.bin")));

  testing::TempDir empty;
  testing::write_text(empty / "train.txt", "");
  testing::write_text(empty / "valid.txt", "");
  testing::write_text(empty / "test.txt", "");
  CHECK(run({"fit-domains", "--dataset", empty.path().string(), "--model", ws.file("m.bin"),
             "--out", ws.file("e.bin")}).code != 0);
  CHECK_FALSE(fs::exists(ws.file("e.bin")));
  CHECK(run({"fit-domains", "--dataset", ws.data(), "--model", ws.file("m.bin"), "--out",
             ws.file("m.bin")}).code == 1);
}

TEST_CASE("evaluate: baseline-only and side-by-side reports") {
  Workspace ws;
  REQUIRE(ws.train("m.bin").code == 0);
  REQUIRE(ws.fit("m.bin", "d.bin").code == 0);
  const std::string model_bytes = slurp(ws.file("m.bin"));
  const std::string train_bytes = slurp(ws.file("train.txt"));

  REQUIRE(run({"evaluate", "--dataset", ws.data(), "--model", ws.file("m.bin"), "--report",
               ws.file("b.txt"), "--csv", ws.file("b.csv"), "--threads", "2"}).code == 0);
  const std::string base_text = slurp(ws.file("b.txt"));
  CHECK(base_text.find("baseline.filtered.combined.hits@10 = ") != std::string::npos);
  CHECK(base_text.find("dre.") == std::string::npos);
  CHECK(base_text.find("delta.") == std::string::npos);
  CHECK(slurp(ws.file("b.csv")).rfind("setting,side,category,metric,value\n", 0) == 0);

  // metrics equal the brute-force evaluator on the same model
  const KnowledgeGraph g = load_graph(ws.dir / "train.txt", ws.dir / "valid.txt",
                                      ws.dir / "test.txt");
  const auto model = load_model(ws.file("m.bin"));
  const auto dm = load_domains(ws.file("d.bin"));
  const auto kv = parse_report(ws.file("b.txt"));
  const auto oracle = testing::oracle_evaluate(model, nullptr, g);
  const char* settings[] = {"raw", "filtered"};
  const char* sides[] = {"head", "tail"};
  for (int s = 0; s < 2; ++s) {
    for (int side = 0; side < 2; ++side) {
      const std::string key = std::string("baseline.") + settings[s] + "." + sides[side] + ".";
      CHECK(kv.at(key + "mean_rank") == doctest::Approx(oracle[s][side].mean_rank));
      CHECK(kv.at(key + "hits@10") == doctest::Approx(oracle[s][side].hits10));
      CHECK(kv.at(key + "hits@1") == doctest::Approx(oracle[s][side].hits1));
    }
  }

  REQUIRE(run({"evaluate", "--dataset", ws.data(), "--model", ws.file("m.bin"), "--domains",
               ws.file("d.bin"), "--report", ws.file("d.txt"), "--csv", ws.file("d.csv")}).code ==
          0);
  const auto dkv = parse_report(ws.file("d.txt"));
  const auto dre_oracle = testing::oracle_evaluate(model, &dm, g);
  for (int s = 0; s < 2; ++s) {
    for (int side = 0; side < 2; ++side) {
      const std::string suffix = std::string(settings[s]) + "." + sides[side] + ".mean_rank";
      CHECK(dkv.at("dre." + suffix) == doctest::Approx(dre_oracle[s][side].mean_rank));
      CHECK(dkv.at("delta." + suffix) ==
            doctest::Approx(dkv.at("dre." + suffix) - dkv.at("baseline." + suffix)));
    }
  }
  CHECK(slurp(ws.file("d.csv")).rfind("setting,side,category,metric,baseline,dre,delta\n", 0) == 0);

  // idempotent, inputs untouched
  REQUIRE(run({"evaluate", "--dataset", ws.data(), "--model", ws.file("m.bin"), "--domains",
               ws.file("d.bin"), "--report", ws.file("d2.txt")}).code == 0);
  CHECK(slurp(ws.file("d.txt")) == slurp(ws.file("d2.txt")));
  CHECK(slurp(ws.file("m.bin")) == model_bytes);
  CHECK(slurp(ws.file("train.txt")) == train_bytes);

  CHECK(run({"evaluate", "--dataset", ws.data(), "--model", ws.file("m.bin")}).code == 1);
}

TEST_CASE("evaluate rejects a domain model fitted on another embedding") {
  Workspace ws;
  REQUIRE(ws.train("m.bin").code == 0);
  REQUIRE(ws.train("m7.bin", {"--seed", "7"}).code == 0);
  REQUIRE(ws.fit("m.bin", "d.bin").code == 0);
  const Result r = run({"evaluate", "--dataset", ws.data(), "--model", ws.file("m7.bin"),
                        "--domains", ws.file("d.bin"), "--report", ws.file("r.txt")});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(ws.file("r.txt")));
}

TEST_CASE("predict ranks candidates") {
  Workspace ws;
  REQUIRE(ws.train("m.bin").code == 0);
  REQUIRE(ws.fit("m.bin", "d.bin").code == 0);
  const Result r = run({"predict", "--dataset", ws.data(), "--model", ws.file("m.bin"),
                        "--domains", ws.file("d.bin"), "--head", "C", "--relation", "r", "--tail",
                        "?", "--top", "1"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "rank\tentity\tbaseline\tpenalty\tcombined\tinside");
  CHECK(first.rfind("1\tD\t", 0) == 0);

  const Result all = run({"predict", "--dataset", ws.data(), "--model", ws.file("m.bin"),
                          "--relation", "s", "--head", "?", "--tail", "C", "--top", "100"});
  REQUIRE(all.code == 0);
  CHECK(std::count(all.out.begin(), all.out.end(), '\n') == 1 + 5);
  CHECK(all.out.find("\t-\n") != std::string::npos);  // no domain model

  const Result unknown = run({"predict", "--dataset", ws.data(), "--model", ws.file("m.bin"),
                              "--head", "A", "--relation", "rr", "--tail", "?"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("nearest: r, s") != std::string::npos);
  CHECK(run({"predict", "--dataset", ws.data(), "--model", ws.file("m.bin"), "--head", "Q",
             "--relation", "r", "--tail", "?"}).code == 2);
  CHECK(run({"predict", "--dataset", ws.data(), "--model", ws.file("m.bin"), "--head", "?",
             "--relation", "r", "--tail", "?"}).code == 1);
}

TEST_CASE("edit distance") {
  CHECK(cli::edit_distance("", "") == 0);
  CHECK(cli::edit_distance("kitten", "sitting") == 3);
  CHECK(cli::edit_distance("abc", "") == 3);
  CHECK(cli::edit_distance("flaw", "lawn") == 2);
}
