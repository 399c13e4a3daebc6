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

#ifndef DRE_KG_DATA_HPP_
#define DRE_KG_DATA_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dre {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

enum class Side { Head, Tail };

std::string_view to_string(Side side);

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  EntityId entity(Side side) const { return side == Side::Head ? head : tail; }
  Triple with_entity(Side side, EntityId e) const {
    Triple t = *this;
    (side == Side::Head ? t.head : t.tail) = e;
    return t;
  }
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t x = (std::uint64_t{t.head} << 32) ^ (std::uint64_t{t.relation} << 16) ^ t.tail;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};

// Ordered label list with its inverse index; ids are dense and assigned in
// insertion order.
class Vocab {
 public:
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Column order of the three fields on each line.
enum class TripleFormat { HeadRelationTail, HeadTailRelation };

enum class Split { Train, Valid, Test };

// Immutable after construction; safe for concurrent readers.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(Vocab entities, Vocab relations, std::vector<Triple> train,
                 std::vector<Triple> valid, std::vector<Triple> test);

  const Vocab& entities() const { return entities_; }
  const Vocab& relations() const { return relations_; }
  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

  const std::vector<Triple>& train() const { return train_; }
  const std::vector<Triple>& valid() const { return valid_; }
  const std::vector<Triple>& test() const { return test_; }
  const std::vector<Triple>& split(Split s) const;

  // Distinct triples over all three splits.
  std::size_t gold_size() const { return gold_.size(); }
  bool is_gold(const Triple& t) const { return gold_.contains(t); }
  bool in_train(const Triple& t) const { return train_set_.contains(t); }

  // Entities that complete (?, r, tail) resp. (head, r, ?) to a gold triple.
  std::span<const EntityId> gold_heads(RelationId r, EntityId tail) const;
  std::span<const EntityId> gold_tails(EntityId head, RelationId r) const;
  // The candidate fillers of `side` that keep `t` gold, t itself included.
  std::span<const EntityId> gold_fillers(const Triple& t, Side side) const {
    return side == Side::Head ? gold_heads(t.relation, t.tail) : gold_tails(t.head, t.relation);
  }

 private:
  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    return (std::uint64_t{a} << 32) | b;
  }

  Vocab entities_;
  Vocab relations_;
  std::vector<Triple> train_, valid_, test_;
  std::unordered_set<Triple, TripleHash> gold_;
  std::unordered_set<Triple, TripleHash> train_set_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_by_rt_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_by_hr_;
};

KnowledgeGraph load_graph(const std::filesystem::path& train_path,
                          const std::filesystem::path& valid_path,
                          const std::filesystem::path& test_path,
                          TripleFormat format = TripleFormat::HeadRelationTail);

// Writes train.txt / valid.txt / test.txt plus entity2id.txt and
// relation2id.txt (`label<TAB>id`) into `dir`.
void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& dir);

struct Domain {
  RelationId relation = 0;
  Side side = Side::Head;
  std::vector<EntityId> members;  // sorted, unique
};

// Head and tail domain of every relation that occurs in the training split,
// ordered by relation id, head before tail.
std::vector<Domain> extract_domains(const KnowledgeGraph& graph);

inline bool is_gold(const KnowledgeGraph& graph, const Triple& t) { return graph.is_gold(t); }

enum class RelationCategory { OneToOne, OneToMany, ManyToOne, ManyToMany };

inline constexpr double kRelationCategoryThreshold = 1.5;

std::string_view to_string(RelationCategory c);

// Category by mean heads-per-tail and tails-per-head over the distinct
// training pairs. Relations absent from training are not in the map.
std::map<RelationId, RelationCategory> classify_relations(
    const KnowledgeGraph& graph, double threshold = kRelationCategoryThreshold);

}  // namespace dre

#endif  // DRE_KG_DATA_HPP_
