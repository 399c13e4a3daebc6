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

#include "dre/domain_model.hpp"

#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "dre/errors.hpp"
#include "dre/parallel.hpp"

namespace dre {

namespace {

std::uint64_t domain_seed(std::uint64_t base, const DomainKey& key) {
  std::uint64_t x = base ^ (0x9e3779b97f4a7c15ULL * (2 * std::uint64_t{key.relation} +
                                                     (key.side == Side::Tail ? 1 : 0) + 1));
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 29;
  return x;
}

}  // namespace

DomainModel fit_all_domains(const KnowledgeGraph& graph, const EmbeddingModel& model,
                            const FitConfig& config, const DomainFitOptions& options) {
  config.validate();
  if (graph.train().empty()) throw ConfigError("training split is empty");
  if (model.num_entities() != graph.num_entities() ||
      model.num_relations() != graph.num_relations()) {
    throw ConfigError("embedding model vocabulary does not match the graph");
  }

  const auto domains = extract_domains(graph);
  const std::size_t k = model.dim_relation();

  struct Slot {
    std::optional<Ellipsoid> ellipsoid;
    DomainFitSummary summary;
  };
  std::vector<Slot> slots(domains.size());

  parallel_for(domains.size(), options.threads, [&](std::size_t i) {
    const Domain& dom = domains[i];
    Slot& slot = slots[i];
    slot.summary.key = {dom.relation, dom.side};
    slot.summary.members = dom.members.size();
    if (dom.members.size() < options.min_members) {
      slot.summary.skipped = true;
      return;
    }
    PointSet points(k);
    std::vector<double> buf(k);
    for (EntityId e : dom.members) {
      project_entity(model, e, dom.relation, dom.side, buf);
      points.add(buf);
    }
    FitConfig cfg = config;
    cfg.seed = domain_seed(config.seed, slot.summary.key);
    FitResult fitted = fit_ellipsoid(points, cfg);
    slot.summary.initial_mean_score = fitted.initial_mean_score;
    slot.summary.final_mean_score = fitted.final_mean_score;
    slot.ellipsoid = std::move(fitted.ellipsoid);
  });

  DomainModel out;
  out.model_fingerprint = model_fingerprint(model);
  out.dim = k;
  for (Slot& slot : slots) {
    if (slot.ellipsoid) {
      out.ellipsoids.emplace(slot.summary.key, std::move(*slot.ellipsoid));
    } else {
      out.skipped.insert(slot.summary.key);
    }
    if (options.on_domain) options.on_domain(slot.summary);
  }
  return out;
}

DomainPenalty::DomainPenalty(const DomainModel& domains, const EmbeddingModel& model)
    : domains_(&domains), model_(&model) {
  if (domains.model_fingerprint != model_fingerprint(model)) {
    throw StaleDomainModelError("domain model was fitted against a different embedding model");
  }
  if (!domains.ellipsoids.empty() && domains.dim != model.dim_relation()) {
    throw DimensionError("domain model dimension differs from the model's final space");
  }
}

const Ellipsoid* DomainPenalty::find(RelationId relation, Side side) const {
  auto it = domains_->ellipsoids.find({relation, side});
  return it == domains_->ellipsoids.end() ? nullptr : &it->second;
}

double DomainPenalty::for_projection(RelationId relation, Side side,
                                     std::span<const double> projected) const {
  const Ellipsoid* ell = find(relation, side);
  return ell == nullptr ? 0.0 : score_test(*ell, projected);
}

double DomainPenalty::operator()(EntityId candidate, RelationId relation, Side side) const {
  const Ellipsoid* ell = find(relation, side);
  if (ell == nullptr) return 0.0;
  return score_test(*ell, project_entity(*model_, candidate, relation, side));
}

double domain_penalty(const DomainModel& domains, const EmbeddingModel& model,
                      EntityId candidate, RelationId relation, Side side) {
  return DomainPenalty(domains, model)(candidate, relation, side);
}

std::string serialize_domains(const DomainModel& dm) {
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(dm.model_fingerprint));
  std::ostringstream header;
  header << "DREDOM v1 " << dm.dim << ' ' << dm.ellipsoids.size() << ' ' << dm.skipped.size()
         << ' ' << fp << '\n';
  std::string out = header.str();
  for (const auto& [key, ell] : dm.ellipsoids) {
    if (ell.dim() != dm.dim) throw DimensionError("ellipsoid dimension differs from the model");
    detail::put_u64(out, key.relation);
    detail::put_u64(out, key.side == Side::Tail ? 1 : 0);
    detail::put_f64s(out, ell.center());
    detail::put_f64s(out, ell.packed_factor());
  }
  for (const DomainKey& key : dm.skipped) {
    detail::put_u64(out, key.relation);
    detail::put_u64(out, key.side == Side::Tail ? 1 : 0);
  }
  return out;
}

namespace {

Side side_flag(std::uint64_t v) {
  if (v > 1) throw FormatError("bad side flag in domain-model file");
  return v == 1 ? Side::Tail : Side::Head;
}

RelationId relation_word(std::uint64_t v) {
  if (v > std::numeric_limits<RelationId>::max()) throw FormatError("bad relation id");
  return static_cast<RelationId>(v);
}

}  // namespace

DomainModel deserialize_domains(std::string_view bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string_view::npos || eol > 256) throw FormatError("missing domain-model header");
  std::istringstream header{std::string(bytes.substr(0, eol))};
  std::string magic, version, fp;
  std::size_t k = 0, n_fitted = 0, n_skipped = 0;
  header >> magic >> version;
  if (magic != "DREDOM") throw FormatError("not a domain-model file (bad magic)");
  if (version != "v1") throw FormatError("unsupported domain-model version " + version);
  if (!(header >> k >> n_fitted >> n_skipped)) throw FormatError("malformed domain-model header");
  if (!(header >> fp) || fp.size() != 16 ||
      fp.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw FormatError("missing or garbled model fingerprint");
  }
  std::string trailing;
  if (header >> trailing) throw FormatError("unexpected data in domain-model header");

  DomainModel dm;
  dm.model_fingerprint = std::stoull(fp, nullptr, 16);
  dm.dim = k;
  const std::size_t record = 16 + 8 * (k + k * (k + 1) / 2);
  detail::Reader rd(bytes.substr(eol + 1));
  if (rd.remaining() != n_fitted * record + n_skipped * 16) {
    throw FormatError("domain-model file size does not match header");
  }
  for (std::size_t n = 0; n < n_fitted; ++n) {
    DomainKey key;
    key.relation = relation_word(rd.u64());
    key.side = side_flag(rd.u64());
    std::vector<double> center(k), packed(k * (k + 1) / 2);
    rd.f64s(center);
    rd.f64s(packed);
    try {
      dm.ellipsoids.emplace(key, Ellipsoid::from_packed(std::move(center), packed));
    } catch (const ConfigError& e) {
      throw FormatError(std::string("invalid ellipsoid record: ") + e.what());
    }
  }
  for (std::size_t n = 0; n < n_skipped; ++n) {
    DomainKey key;
    key.relation = relation_word(rd.u64());
    key.side = side_flag(rd.u64());
    dm.skipped.insert(key);
  }
  if (dm.ellipsoids.size() != n_fitted || dm.skipped.size() != n_skipped) {
    throw FormatError("duplicate domain records");
  }
  return dm;
}

void save_domains(const DomainModel& domains, const std::filesystem::path& path) {
  detail::write_file_atomic(path.string(), serialize_domains(domains));
}

DomainModel load_domains(const std::filesystem::path& path) {
  return deserialize_domains(detail::read_file(path.string()));
}

}  // namespace dre
