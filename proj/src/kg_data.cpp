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

#include "dre/kg_data.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "dre/errors.hpp"

namespace dre {

std::string_view to_string(Side side) { return side == Side::Head ? "head" : "tail"; }

std::string_view to_string(RelationCategory c) {
  switch (c) {
    case RelationCategory::OneToOne: return "1-to-1";
    case RelationCategory::OneToMany: return "1-to-N";
    case RelationCategory::ManyToOne: return "N-to-1";
    case RelationCategory::ManyToMany: return "N-to-N";
  }
  return "?";
}

std::uint32_t Vocab::intern(std::string_view label) {
  auto [it, inserted] =
      index_.try_emplace(std::string(label), static_cast<std::uint32_t>(labels_.size()));
  if (inserted) labels_.emplace_back(label);
  return it->second;
}

std::optional<std::uint32_t> Vocab::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph::KnowledgeGraph(Vocab entities, Vocab relations, std::vector<Triple> train,
                               std::vector<Triple> valid, std::vector<Triple> test)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      train_(std::move(train)),
      valid_(std::move(valid)),
      test_(std::move(test)) {
  for (const auto* split : {&train_, &valid_, &test_}) {
    for (const Triple& t : *split) {
      if (t.head >= entities_.size() || t.tail >= entities_.size() ||
          t.relation >= relations_.size()) {
        throw ConfigError("triple id out of vocabulary range");
      }
      if (gold_.insert(t).second) {
        heads_by_rt_[pair_key(t.relation, t.tail)].push_back(t.head);
        tails_by_hr_[pair_key(t.head, t.relation)].push_back(t.tail);
      }
    }
  }
  train_set_.insert(train_.begin(), train_.end());
}

const std::vector<Triple>& KnowledgeGraph::split(Split s) const {
  switch (s) {
    case Split::Train: return train_;
    case Split::Valid: return valid_;
    case Split::Test: return test_;
  }
  return test_;
}

std::span<const EntityId> KnowledgeGraph::gold_heads(RelationId r, EntityId tail) const {
  auto it = heads_by_rt_.find(pair_key(r, tail));
  if (it == heads_by_rt_.end()) return {};
  return it->second;
}

std::span<const EntityId> KnowledgeGraph::gold_tails(EntityId head, RelationId r) const {
  auto it = tails_by_hr_.find(pair_key(head, r));
  if (it == tails_by_hr_.end()) return {};
  return it->second;
}

namespace {

std::vector<Triple> read_triples(const std::filesystem::path& path, TripleFormat format,
                                 Vocab& entities, Vocab& relations) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read triple file " + path.string());
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string_view rest(line);
    std::string_view fields[3];
    std::size_t n = 0;
    while (true) {
      auto tab = rest.find('\t');
      if (n == 3) { n = 4; break; }
      fields[n++] = rest.substr(0, tab);
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (n != 3) {
      throw ParseError(path.string(), line_no, "expected 3 tab-separated fields");
    }
    for (auto f : fields) {
      if (f.empty()) throw ParseError(path.string(), line_no, "empty field");
    }
    const auto rel_field = format == TripleFormat::HeadRelationTail ? fields[1] : fields[2];
    const auto tail_field = format == TripleFormat::HeadRelationTail ? fields[2] : fields[1];
    Triple t;
    t.head = entities.intern(fields[0]);
    t.relation = relations.intern(rel_field);
    t.tail = entities.intern(tail_field);
    triples.push_back(t);
  }
  if (in.bad()) throw IoError("error while reading " + path.string());
  return triples;
}

void write_triples(const std::filesystem::path& path, const KnowledgeGraph& g,
                   const std::vector<Triple>& triples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Triple& t : triples) {
    out << g.entities().label(t.head) << '\t' << g.relations().label(t.relation) << '\t'
        << g.entities().label(t.tail) << '\n';
  }
  if (!out) throw IoError("error while writing " + path.string());
}

void write_id_map(const std::filesystem::path& path, const Vocab& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i) out << vocab.label(i) << '\t' << i << '\n';
}

}  // namespace

KnowledgeGraph load_graph(const std::filesystem::path& train_path,
                          const std::filesystem::path& valid_path,
                          const std::filesystem::path& test_path, TripleFormat format) {
  Vocab entities, relations;
  auto train = read_triples(train_path, format, entities, relations);
  auto valid = read_triples(valid_path, format, entities, relations);
  auto test = read_triples(test_path, format, entities, relations);
  return KnowledgeGraph(std::move(entities), std::move(relations), std::move(train),
                        std::move(valid), std::move(test));
}

void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_triples(dir / "train.txt", graph, graph.train());
  write_triples(dir / "valid.txt", graph, graph.valid());
  write_triples(dir / "test.txt", graph, graph.test());
  write_id_map(dir / "entity2id.txt", graph.entities());
  write_id_map(dir / "relation2id.txt", graph.relations());
}

std::vector<Domain> extract_domains(const KnowledgeGraph& graph) {
  std::map<RelationId, std::pair<std::set<EntityId>, std::set<EntityId>>> by_relation;
  for (const Triple& t : graph.train()) {
    auto& [heads, tails] = by_relation[t.relation];
    heads.insert(t.head);
    tails.insert(t.tail);
  }
  std::vector<Domain> domains;
  domains.reserve(2 * by_relation.size());
  for (const auto& [r, sets] : by_relation) {
    domains.push_back({r, Side::Head, {sets.first.begin(), sets.first.end()}});
    domains.push_back({r, Side::Tail, {sets.second.begin(), sets.second.end()}});
  }
  return domains;
}

std::map<RelationId, RelationCategory> classify_relations(const KnowledgeGraph& graph,
                                                          double threshold) {
  // distinct (h, t) pairs per relation
  std::map<RelationId, std::set<std::pair<EntityId, EntityId>>> pairs;
  for (const Triple& t : graph.train()) pairs[t.relation].emplace(t.head, t.tail);

  std::map<RelationId, RelationCategory> out;
  for (const auto& [r, ht] : pairs) {
    std::set<EntityId> heads, tails;
    for (const auto& [h, t] : ht) {
      heads.insert(h);
      tails.insert(t);
    }
    const double n = static_cast<double>(ht.size());
    const double tails_per_head = n / static_cast<double>(heads.size());
    const double heads_per_tail = n / static_cast<double>(tails.size());
    const bool many_heads = heads_per_tail > threshold;
    const bool many_tails = tails_per_head > threshold;
    RelationCategory c;
    if (!many_heads && !many_tails) {
      c = RelationCategory::OneToOne;
    } else if (!many_heads) {
      c = RelationCategory::OneToMany;
    } else if (!many_tails) {
      c = RelationCategory::ManyToOne;
    } else {
      c = RelationCategory::ManyToMany;
    }
    out.emplace(r, c);
  }
  return out;
}

}  // namespace dre
