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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dre/embedding.hpp"
#include "dre/errors.hpp"

namespace dre {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be > 0");
  if (!(margin > 0)) throw ConfigError("margin must be > 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (dim_entity == 0 || dim_relation == 0) throw ConfigError("dimensions must be >= 1");
  if (eval_every < 0 || patience < 1) throw ConfigError("invalid validation schedule");
}

namespace {

// Dense gradient buffers shaped like the model; only rows touched in the
// current batch are applied and cleared.
class GradientAccumulator {
 public:
  explicit GradientAccumulator(const EmbeddingModel& m)
      : d_(m.dim_entity()),
        k_(m.dim_relation()),
        entity_(m.entity_block().size(), 0.0),
        relation_(m.relation_block().size(), 0.0),
        head_proj_(m.head_proj_block().size(), 0.0),
        tail_proj_(m.tail_proj_block().size(), 0.0),
        entity_touched_(m.num_entities(), 0),
        relation_touched_(m.num_relations(), 0) {}

  void add(const Triple& t, const ScoreGradient& g, double sign) {
    add_row(entity_, t.head * d_, g.head, sign);
    add_row(entity_, t.tail * d_, g.tail, sign);
    add_row(relation_, t.relation * k_, g.relation, sign);
    if (!g.head_proj.empty()) add_row(head_proj_, t.relation * k_ * d_, g.head_proj, sign);
    if (!g.tail_proj.empty()) add_row(tail_proj_, t.relation * k_ * d_, g.tail_proj, sign);
    touch_entity(t.head);
    touch_entity(t.tail);
    if (!relation_touched_[t.relation]) {
      relation_touched_[t.relation] = 1;
      relations_.push_back(t.relation);
    }
  }

  void apply(EmbeddingModel& m, double lr, bool normalize) {
    // sorted so the floating-point update order is independent of hashing
    std::sort(entities_.begin(), entities_.end());
    std::sort(relations_.begin(), relations_.end());
    for (EntityId e : entities_) {
      auto row = m.entity(e);
      step(row, entity_, e * d_, lr);
      if (normalize) clip_to_unit_ball(row);
      entity_touched_[e] = 0;
    }
    const std::size_t kd = k_ * d_;
    for (RelationId r : relations_) {
      step(m.relation(r), relation_, r * k_, lr);
      if (m.has_head_proj()) step(m.head_proj_block().subspan(r * kd, kd), head_proj_, r * kd, lr);
      if (m.has_tail_proj()) step(m.tail_proj_block().subspan(r * kd, kd), tail_proj_, r * kd, lr);
      relation_touched_[r] = 0;
    }
    entities_.clear();
    relations_.clear();
  }

 private:
  static void add_row(std::vector<double>& buf, std::size_t offset, const std::vector<double>& g,
                      double sign) {
    for (std::size_t i = 0; i < g.size(); ++i) buf[offset + i] += sign * g[i];
  }
  static void step(std::span<double> params, std::vector<double>& buf, std::size_t offset,
                   double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= lr * buf[offset + i];
      buf[offset + i] = 0.0;
    }
  }
  static void clip_to_unit_ball(std::span<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 1.0) {
      for (double& x : v) x /= n;
    }
  }
  void touch_entity(EntityId e) {
    if (!entity_touched_[e]) {
      entity_touched_[e] = 1;
      entities_.push_back(e);
    }
  }

  std::size_t d_, k_;
  std::vector<double> entity_, relation_, head_proj_, tail_proj_;
  std::vector<char> entity_touched_, relation_touched_;
  std::vector<EntityId> entities_;
  std::vector<RelationId> relations_;
};

// Probability of corrupting the head, per relation: tph / (tph + hpt).
std::vector<double> bernoulli_head_probs(const KnowledgeGraph& g) {
  std::map<RelationId, std::set<std::pair<EntityId, EntityId>>> pairs;
  for (const Triple& t : g.train()) pairs[t.relation].emplace(t.head, t.tail);
  std::vector<double> p(g.num_relations(), 0.5);
  for (const auto& [r, ht] : pairs) {
    std::set<EntityId> heads, tails;
    for (const auto& [h, t] : ht) {
      heads.insert(h);
      tails.insert(t);
    }
    const double n = static_cast<double>(ht.size());
    const double tph = n / static_cast<double>(heads.size());
    const double hpt = n / static_cast<double>(tails.size());
    p[r] = tph / (tph + hpt);
  }
  return p;
}

void init_transe(EmbeddingModel& m, std::mt19937_64& rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(m.dim_entity()));
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (double& x : m.entity_block()) x = unif(rng);
  for (double& x : m.relation_block()) x = unif(rng);
}

void set_identity(std::span<double> block, std::size_t k, std::size_t d) {
  const std::size_t n = k * d;
  for (std::size_t off = 0; off < block.size(); off += n) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < d; ++j) block[off + i * d + j] = (i == j) ? 1.0 : 0.0;
    }
  }
}

EmbeddingModel initial_model(const KnowledgeGraph& graph, const TrainConfig& cfg,
                             const EmbeddingModel* init, std::mt19937_64& rng) {
  if (cfg.variant == Variant::TransE) {
    if (cfg.dim_entity != cfg.dim_relation) {
      throw ConfigError("TransE requires dim_entity == dim_relation");
    }
    EmbeddingModel m(Variant::TransE, cfg.dissimilarity, graph.num_entities(),
                     graph.num_relations(), cfg.dim_entity, cfg.dim_relation);
    if (init != nullptr) {
      if (init->variant() != Variant::TransE || init->dim_entity() != cfg.dim_entity ||
          init->num_entities() != graph.num_entities() ||
          init->num_relations() != graph.num_relations()) {
        throw ConfigError("initial model does not match the TransE configuration");
      }
      std::ranges::copy(init->entity_block(), m.entity_block().begin());
      std::ranges::copy(init->relation_block(), m.relation_block().begin());
    } else {
      init_transe(m, rng);
    }
    return m;
  }

  if (init == nullptr || init->variant() != Variant::TransE) {
    throw ConfigError(std::string(to_string(cfg.variant)) +
                      " training requires a trained TransE model as initialization");
  }
  if (init->num_entities() != graph.num_entities() ||
      init->num_relations() != graph.num_relations()) {
    throw ConfigError("initial TransE model does not match the graph vocabulary");
  }
  if (init->dim_entity() != cfg.dim_entity) {
    throw ConfigError("entity dimension differs from the initial TransE model");
  }
  EmbeddingModel m(cfg.variant, cfg.dissimilarity, graph.num_entities(), graph.num_relations(),
                   cfg.dim_entity, cfg.dim_relation);
  std::ranges::copy(init->entity_block(), m.entity_block().begin());
  if (cfg.dim_relation == cfg.dim_entity) {
    std::ranges::copy(init->relation_block(), m.relation_block().begin());
  } else {
    std::uniform_real_distribution<double> unif(
        -6.0 / std::sqrt(static_cast<double>(cfg.dim_relation)),
        6.0 / std::sqrt(static_cast<double>(cfg.dim_relation)));
    for (double& x : m.relation_block()) x = unif(rng);
  }
  set_identity(m.head_proj_block(), cfg.dim_relation, cfg.dim_entity);
  set_identity(m.tail_proj_block(), cfg.dim_relation, cfg.dim_entity);
  return m;
}

}  // namespace

EmbeddingModel train(const KnowledgeGraph& graph, const TrainConfig& config,
                     const EmbeddingModel* init, const TrainHooks& hooks) {
  config.validate();
  if (graph.train().empty()) throw ConfigError("training split is empty");
  if (graph.num_entities() < 2) throw ConfigError("need at least two entities to corrupt triples");

  std::mt19937_64 rng(config.seed);
  EmbeddingModel model = initial_model(graph, config, init, rng);

  const auto& triples = graph.train();
  const std::vector<double> head_prob = config.sampling == NegativeSampling::Bernoulli
                                            ? bernoulli_head_probs(graph)
                                            : std::vector<double>(graph.num_relations(), 0.5);
  std::uniform_int_distribution<EntityId> pick_entity(
      0, static_cast<EntityId>(graph.num_entities() - 1));
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  auto corrupt = [&](const Triple& t) {
    const Side side = coin(rng) < head_prob[t.relation] ? Side::Head : Side::Tail;
    Triple neg = t;
    // bounded retries: a relation may link an entity to every other one
    for (int attempt = 0; attempt < 64; ++attempt) {
      neg = t.with_entity(side, pick_entity(rng));
      if (!graph.in_train(neg)) break;
    }
    return neg;
  };

  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  GradientAccumulator acc(model);
  ScoreGradient gpos, gneg;

  EmbeddingModel best;
  double best_metric = -std::numeric_limits<double>::infinity();
  int stale_evals = 0;
  const bool validating = config.eval_every > 0 && static_cast<bool>(hooks.validate);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        const Triple& pos = triples[order[i]];
        const Triple neg = corrupt(pos);
        const double fpos = score_gradient(model, pos, gpos);
        const double fneg = score_gradient(model, neg, gneg);
        const double loss = config.margin + fpos - fneg;
        if (!(loss <= 0.0)) {  // NaN propagates into the epoch loss
          loss_sum += loss;
          acc.add(pos, gpos, 1.0);
          acc.add(neg, gneg, -1.0);
        }
      }
      acc.apply(model, config.learning_rate, config.normalize_entities);
    }
    const double mean_loss = loss_sum / static_cast<double>(triples.size());
    if (!std::isfinite(mean_loss)) throw TrainingDivergedError(epoch, "non-finite loss");
    if (!model.all_finite()) throw TrainingDivergedError(epoch, "non-finite parameters");
    if (hooks.on_epoch) hooks.on_epoch(epoch, mean_loss);

    if (validating && epoch % config.eval_every == 0) {
      const double metric = hooks.validate(model);
      if (metric > best_metric) {
        best_metric = metric;
        best = model;
        stale_evals = 0;
      } else if (++stale_evals >= config.patience) {
        break;
      }
    }
  }
  if (validating && best_metric > -std::numeric_limits<double>::infinity()) return best;
  return model;
}

}  // namespace dre
