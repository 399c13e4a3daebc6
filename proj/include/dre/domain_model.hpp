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

#ifndef DRE_DOMAIN_MODEL_HPP_
#define DRE_DOMAIN_MODEL_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>

#include "dre/ellipsoid.hpp"
#include "dre/embedding.hpp"
#include "dre/kg_data.hpp"

namespace dre {

struct DomainKey {
  RelationId relation = 0;
  Side side = Side::Head;
  friend auto operator<=>(const DomainKey&, const DomainKey&) = default;
};

// One ellipsoid per (relation, side) domain, fitted in the final space of
// the embedding model identified by `model_fingerprint`.
struct DomainModel {
  std::uint64_t model_fingerprint = 0;
  std::size_t dim = 0;
  std::map<DomainKey, Ellipsoid> ellipsoids;
  std::set<DomainKey> skipped;

  friend bool operator==(const DomainModel&, const DomainModel&) = default;
};

inline constexpr std::size_t kMinDomainMembers = 2;

struct DomainFitSummary {
  DomainKey key;
  std::size_t members = 0;
  bool skipped = false;
  double initial_mean_score = 0.0;
  double final_mean_score = 0.0;
};

struct DomainFitOptions {
  std::size_t min_members = kMinDomainMembers;
  unsigned threads = 1;
  // Invoked once per domain in (relation, side) order after fitting.
  std::function<void(const DomainFitSummary&)> on_domain;
};

// Fits head and tail ellipsoids for every relation in the training split
// over the members' projections into the model's final space. The
// embedding model is only read.
DomainModel fit_all_domains(const KnowledgeGraph& graph, const EmbeddingModel& model,
                            const FitConfig& config, const DomainFitOptions& options = {});

// A domain model bound to the embedding model it was fitted on. Binding
// checks the fingerprint once; lookups afterwards are read-only.
class DomainPenalty {
 public:
  // Throws StaleDomainModelError on fingerprint mismatch and DimensionError
  // when the final-space dimensions disagree.
  DomainPenalty(const DomainModel& domains, const EmbeddingModel& model);

  // score_test of the candidate's projection; 0 when the domain was skipped
  // or never extracted.
  double operator()(EntityId candidate, RelationId relation, Side side) const;
  double for_projection(RelationId relation, Side side, std::span<const double> projected) const;
  const Ellipsoid* find(RelationId relation, Side side) const;

 private:
  const DomainModel* domains_;
  const EmbeddingModel* model_;
};

double domain_penalty(const DomainModel& domains, const EmbeddingModel& model,
                      EntityId candidate, RelationId relation, Side side);

// ASCII header "DREDOM v1 k n_fitted n_skipped fingerprint", then
// per-ellipsoid records and the skipped list in little-endian 64-bit words.
void save_domains(const DomainModel& domains, const std::filesystem::path& path);
DomainModel load_domains(const std::filesystem::path& path);
std::string serialize_domains(const DomainModel& domains);
DomainModel deserialize_domains(std::string_view bytes);

}  // namespace dre

#endif  // DRE_DOMAIN_MODEL_HPP_
