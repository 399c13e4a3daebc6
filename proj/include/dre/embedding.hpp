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

#ifndef DRE_EMBEDDING_HPP_
#define DRE_EMBEDDING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dre/kg_data.hpp"

namespace dre {

enum class Variant { TransE, TransR, STransE };
enum class Dissimilarity { L1, L2 };
enum class NegativeSampling { Uniform, Bernoulli };

std::string_view to_string(Variant v);
std::string_view to_string(Dissimilarity d);
Variant parse_variant(std::string_view s);
Dissimilarity parse_dissimilarity(std::string_view s);

// Translation-based embedding. Matrices are stored row-major: every
// projection is k rows of d columns, mapping entity space (d) into the
// relation space (k).
//
//   TransE   f = ||h + r - t||
//   TransR   f = ||W_r h + r - W_r t||        (head_proj only)
//   STransE  f = ||W_r1 h + r - W_r2 t||      (head_proj and tail_proj)
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  // Zero-filled model; throws DimensionError when the shape violates the
  // variant's invariants (TransE requires k == d).
  EmbeddingModel(Variant variant, Dissimilarity dissimilarity, std::size_t num_entities,
                 std::size_t num_relations, std::size_t dim_entity, std::size_t dim_relation);

  Variant variant() const { return variant_; }
  Dissimilarity dissimilarity() const { return dissimilarity_; }
  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t dim_entity() const { return dim_entity_; }
  std::size_t dim_relation() const { return dim_relation_; }
  bool has_head_proj() const { return variant_ != Variant::TransE; }
  bool has_tail_proj() const { return variant_ == Variant::STransE; }

  std::span<const double> entity(EntityId e) const;
  std::span<double> entity(EntityId e);
  std::span<const double> relation(RelationId r) const;
  std::span<double> relation(RelationId r);
  // W_r (TransR) or W_r1 (STransE): k x d row-major.
  std::span<const double> head_proj(RelationId r) const;
  std::span<double> head_proj(RelationId r);
  // W_r for TransR, W_r2 for STransE.
  std::span<const double> tail_proj(RelationId r) const;
  std::span<double> tail_proj(RelationId r);

  // Whole parameter blocks, in file order.
  std::span<const double> entity_block() const { return entity_vecs_; }
  std::span<const double> relation_block() const { return relation_vecs_; }
  std::span<const double> head_proj_block() const { return head_proj_; }
  std::span<const double> tail_proj_block() const { return tail_proj_; }
  std::span<double> entity_block() { return entity_vecs_; }
  std::span<double> relation_block() { return relation_vecs_; }
  std::span<double> head_proj_block() { return head_proj_; }
  std::span<double> tail_proj_block() { return tail_proj_; }

  bool all_finite() const;
  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;

 private:
  Variant variant_ = Variant::TransE;
  Dissimilarity dissimilarity_ = Dissimilarity::L1;
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::size_t dim_entity_ = 0;
  std::size_t dim_relation_ = 0;
  std::vector<double> entity_vecs_;
  std::vector<double> relation_vecs_;
  std::vector<double> head_proj_;
  std::vector<double> tail_proj_;
};

// ||lhs + r - rhs|| under the given dissimilarity. Every scoring path goes
// through this so that identical inputs give bit-identical scores.
double translation_distance(Dissimilarity d, std::span<const double> lhs,
                            std::span<const double> r, std::span<const double> rhs);

// Representation of `e` in the space where relation `r` is scored.
void project_entity(const EmbeddingModel& model, EntityId e, RelationId r, Side side,
                    std::span<double> out);
std::vector<double> project_entity(const EmbeddingModel& model, EntityId e, RelationId r,
                                   Side side);

double score_triple(const EmbeddingModel& model, const Triple& t);

// Gradient of score_triple with respect to every parameter the triple
// touches. At L1 kinks the subgradient 0 is used; for L2 at a zero residual
// the gradient is 0.
struct ScoreGradient {
  std::vector<double> head;       // d
  std::vector<double> tail;       // d
  std::vector<double> relation;   // k
  std::vector<double> head_proj;  // k*d, TransR: gradient of the shared W_r
  std::vector<double> tail_proj;  // k*d, STransE only
};
double score_gradient(const EmbeddingModel& model, const Triple& t, ScoreGradient& grad);

struct TrainConfig {
  Variant variant = Variant::TransE;
  std::size_t dim_entity = 50;
  std::size_t dim_relation = 50;
  double learning_rate = 0.001;
  double margin = 2.0;
  std::size_t batch_size = 120;
  Dissimilarity dissimilarity = Dissimilarity::L1;
  int epochs = 1000;
  NegativeSampling sampling = NegativeSampling::Uniform;
  bool normalize_entities = false;
  std::uint64_t seed = 1;
  // Validation cadence in epochs (0 disables) and plateau patience counted
  // in validations.
  int eval_every = 0;
  int patience = 50;

  void validate() const;
};

struct TrainHooks {
  std::function<void(int epoch, double mean_loss)> on_epoch;
  // Higher is better; typically filtered Hits@10 on the validation split.
  std::function<double(const EmbeddingModel&)> validate;
};

// Staged training. TransE starts from a uniform random init; TransR and
// STransE require a trained TransE model whose vectors seed the entity and
// relation blocks, with projections starting at identity.
EmbeddingModel train(const KnowledgeGraph& graph, const TrainConfig& config,
                     const EmbeddingModel* init = nullptr, const TrainHooks& hooks = {});

// Mean hinge loss max(0, margin + f(pos) - f(neg)) over the given
// positive/negative pairs, without updating anything.
double margin_loss(const EmbeddingModel& model, double margin, const Triple& positive,
                   const Triple& negative);

// Binary container: ASCII magic line, little-endian float64 payload,
// 64-bit payload-length footer.
void save_model(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);
std::string serialize_model(const EmbeddingModel& model);
EmbeddingModel deserialize_model(std::string_view bytes);

// FNV-1a over the serialized model.
std::uint64_t model_fingerprint(const EmbeddingModel& model);

}  // namespace dre

#endif  // DRE_EMBEDDING_HPP_
