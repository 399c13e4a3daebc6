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

#include <cmath>

#include "dre/embedding.hpp"
#include "dre/errors.hpp"

namespace dre {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::TransE: return "transe";
    case Variant::TransR: return "transr";
    case Variant::STransE: return "stranse";
  }
  return "?";
}

std::string_view to_string(Dissimilarity d) { return d == Dissimilarity::L1 ? "l1" : "l2"; }

Variant parse_variant(std::string_view s) {
  if (s == "transe") return Variant::TransE;
  if (s == "transr") return Variant::TransR;
  if (s == "stranse") return Variant::STransE;
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

Dissimilarity parse_dissimilarity(std::string_view s) {
  if (s == "l1") return Dissimilarity::L1;
  if (s == "l2") return Dissimilarity::L2;
  throw ConfigError("unknown dissimilarity '" + std::string(s) + "'");
}

EmbeddingModel::EmbeddingModel(Variant variant, Dissimilarity dissimilarity,
                               std::size_t num_entities, std::size_t num_relations,
                               std::size_t dim_entity, std::size_t dim_relation)
    : variant_(variant),
      dissimilarity_(dissimilarity),
      num_entities_(num_entities),
      num_relations_(num_relations),
      dim_entity_(dim_entity),
      dim_relation_(dim_relation) {
  if (dim_entity == 0 || dim_relation == 0) throw DimensionError("embedding dimension must be > 0");
  if (variant == Variant::TransE && dim_entity != dim_relation) {
    throw DimensionError("TransE requires equal entity and relation dimensions");
  }
  entity_vecs_.assign(num_entities * dim_entity, 0.0);
  relation_vecs_.assign(num_relations * dim_relation, 0.0);
  if (has_head_proj()) head_proj_.assign(num_relations * dim_relation * dim_entity, 0.0);
  if (has_tail_proj()) tail_proj_.assign(num_relations * dim_relation * dim_entity, 0.0);
}

std::span<const double> EmbeddingModel::entity(EntityId e) const {
  return std::span<const double>(entity_vecs_).subspan(e * dim_entity_, dim_entity_);
}
std::span<double> EmbeddingModel::entity(EntityId e) {
  return std::span<double>(entity_vecs_).subspan(e * dim_entity_, dim_entity_);
}
std::span<const double> EmbeddingModel::relation(RelationId r) const {
  return std::span<const double>(relation_vecs_).subspan(r * dim_relation_, dim_relation_);
}
std::span<double> EmbeddingModel::relation(RelationId r) {
  return std::span<double>(relation_vecs_).subspan(r * dim_relation_, dim_relation_);
}

std::span<const double> EmbeddingModel::head_proj(RelationId r) const {
  if (!has_head_proj()) throw ConfigError("model has no projection matrices");
  const std::size_t n = dim_relation_ * dim_entity_;
  return std::span<const double>(head_proj_).subspan(r * n, n);
}
std::span<double> EmbeddingModel::head_proj(RelationId r) {
  if (!has_head_proj()) throw ConfigError("model has no projection matrices");
  const std::size_t n = dim_relation_ * dim_entity_;
  return std::span<double>(head_proj_).subspan(r * n, n);
}
std::span<const double> EmbeddingModel::tail_proj(RelationId r) const {
  if (variant_ == Variant::TransR) return head_proj(r);
  if (!has_tail_proj()) throw ConfigError("model has no projection matrices");
  const std::size_t n = dim_relation_ * dim_entity_;
  return std::span<const double>(tail_proj_).subspan(r * n, n);
}
std::span<double> EmbeddingModel::tail_proj(RelationId r) {
  if (variant_ == Variant::TransR) return head_proj(r);
  if (!has_tail_proj()) throw ConfigError("model has no projection matrices");
  const std::size_t n = dim_relation_ * dim_entity_;
  return std::span<double>(tail_proj_).subspan(r * n, n);
}

bool EmbeddingModel::all_finite() const {
  for (const auto* block : {&entity_vecs_, &relation_vecs_, &head_proj_, &tail_proj_}) {
    for (double x : *block) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

double translation_distance(Dissimilarity d, std::span<const double> lhs,
                            std::span<const double> r, std::span<const double> rhs) {
  double sum = 0.0;
  if (d == Dissimilarity::L1) {
    for (std::size_t i = 0; i < r.size(); ++i) sum += std::fabs(lhs[i] + r[i] - rhs[i]);
    return sum;
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = lhs[i] + r[i] - rhs[i];
    sum += x * x;
  }
  return std::sqrt(sum);
}

namespace {

void mat_vec(std::span<const double> w, std::span<const double> x, std::span<double> out) {
  const std::size_t cols = x.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    const double* row = w.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

void check_ids(const EmbeddingModel& m, EntityId e, RelationId r) {
  if (e >= m.num_entities() || r >= m.num_relations()) {
    throw DimensionError("entity or relation id outside the model");
  }
}

}  // namespace

void project_entity(const EmbeddingModel& model, EntityId e, RelationId r, Side side,
                    std::span<double> out) {
  check_ids(model, e, r);
  if (out.size() != model.dim_relation()) throw DimensionError("projection buffer size");
  const auto vec = model.entity(e);
  switch (model.variant()) {
    case Variant::TransE:
      std::copy(vec.begin(), vec.end(), out.begin());
      return;
    case Variant::TransR:
      mat_vec(model.head_proj(r), vec, out);
      return;
    case Variant::STransE:
      mat_vec(side == Side::Head ? model.head_proj(r) : model.tail_proj(r), vec, out);
      return;
  }
}

std::vector<double> project_entity(const EmbeddingModel& model, EntityId e, RelationId r,
                                   Side side) {
  std::vector<double> out(model.dim_relation());
  project_entity(model, e, r, side, out);
  return out;
}

double score_triple(const EmbeddingModel& model, const Triple& t) {
  check_ids(model, t.head, t.relation);
  check_ids(model, t.tail, t.relation);
  if (model.variant() == Variant::TransE) {
    return translation_distance(model.dissimilarity(), model.entity(t.head),
                                model.relation(t.relation), model.entity(t.tail));
  }
  const auto ph = project_entity(model, t.head, t.relation, Side::Head);
  const auto pt = project_entity(model, t.tail, t.relation, Side::Tail);
  return translation_distance(model.dissimilarity(), ph, model.relation(t.relation), pt);
}

double score_gradient(const EmbeddingModel& model, const Triple& t, ScoreGradient& grad) {
  check_ids(model, t.head, t.relation);
  check_ids(model, t.tail, t.relation);
  const std::size_t d = model.dim_entity();
  const std::size_t k = model.dim_relation();
  const auto h = model.entity(t.head);
  const auto tl = model.entity(t.tail);
  const auto r = model.relation(t.relation);

  std::vector<double> residual(k);
  if (model.variant() == Variant::TransE) {
    for (std::size_t i = 0; i < k; ++i) residual[i] = h[i] + r[i] - tl[i];
  } else {
    std::vector<double> ph(k), pt(k);
    project_entity(model, t.head, t.relation, Side::Head, ph);
    project_entity(model, t.tail, t.relation, Side::Tail, pt);
    for (std::size_t i = 0; i < k; ++i) residual[i] = ph[i] + r[i] - pt[i];
  }

  // g = d f / d residual
  auto& g = grad.relation;
  g.assign(k, 0.0);
  double score = 0.0;
  if (model.dissimilarity() == Dissimilarity::L1) {
    for (std::size_t i = 0; i < k; ++i) {
      score += std::fabs(residual[i]);
      g[i] = residual[i] > 0 ? 1.0 : (residual[i] < 0 ? -1.0 : 0.0);
    }
  } else {
    for (double x : residual) score += x * x;
    score = std::sqrt(score);
    if (score > 0) {
      for (std::size_t i = 0; i < k; ++i) g[i] = residual[i] / score;
    }
  }

  grad.head.assign(d, 0.0);
  grad.tail.assign(d, 0.0);
  grad.head_proj.clear();
  grad.tail_proj.clear();
  switch (model.variant()) {
    case Variant::TransE:
      for (std::size_t i = 0; i < d; ++i) {
        grad.head[i] = g[i];
        grad.tail[i] = -g[i];
      }
      break;
    case Variant::TransR: {
      const auto w = model.head_proj(t.relation);
      grad.head_proj.assign(k * d, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          grad.head[j] += w[i * d + j] * g[i];
          grad.head_proj[i * d + j] = g[i] * (h[j] - tl[j]);
        }
      }
      for (std::size_t j = 0; j < d; ++j) grad.tail[j] = -grad.head[j];
      break;
    }
    case Variant::STransE: {
      const auto w1 = model.head_proj(t.relation);
      const auto w2 = model.tail_proj(t.relation);
      grad.head_proj.assign(k * d, 0.0);
      grad.tail_proj.assign(k * d, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          grad.head[j] += w1[i * d + j] * g[i];
          grad.tail[j] -= w2[i * d + j] * g[i];
          grad.head_proj[i * d + j] = g[i] * h[j];
          grad.tail_proj[i * d + j] = -g[i] * tl[j];
        }
      }
      break;
    }
  }
  return score;
}

double margin_loss(const EmbeddingModel& model, double margin, const Triple& positive,
                   const Triple& negative) {
  return std::max(0.0, margin + score_triple(model, positive) - score_triple(model, negative));
}

}  // namespace dre
