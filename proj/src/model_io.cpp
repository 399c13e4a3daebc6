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

#include <sstream>

#include "binary_io.hpp"
#include "dre/embedding.hpp"
#include "dre/errors.hpp"

namespace dre {

// Layout:
//   "DREKGE v1 <variant> <|E|> <|R|> <d> <k> <l1|l2>\n"
//   entity_vecs, relation_vecs, head_proj, tail_proj   (float64 LE, row-major)
//   payload byte count                                  (uint64 LE)

std::string serialize_model(const EmbeddingModel& m) {
  std::ostringstream header;
  header << "DREKGE v1 " << to_string(m.variant()) << ' ' << m.num_entities() << ' '
         << m.num_relations() << ' ' << m.dim_entity() << ' ' << m.dim_relation() << ' '
         << to_string(m.dissimilarity()) << '\n';
  std::string out = header.str();
  const std::size_t payload_start = out.size();
  detail::put_f64s(out, m.entity_block());
  detail::put_f64s(out, m.relation_block());
  detail::put_f64s(out, m.head_proj_block());
  detail::put_f64s(out, m.tail_proj_block());
  detail::put_u64(out, out.size() - payload_start);
  return out;
}

EmbeddingModel deserialize_model(std::string_view bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string_view::npos || eol > 256) throw FormatError("missing model header");
  std::istringstream header{std::string(bytes.substr(0, eol))};
  std::string magic, version, variant, dissim;
  std::size_t n_ent = 0, n_rel = 0, d = 0, k = 0;
  header >> magic >> version;
  if (magic != "DREKGE") throw FormatError("not a model file (bad magic)");
  if (version != "v1") throw FormatError("unsupported model file version " + version);
  if (!(header >> variant >> n_ent >> n_rel >> d >> k >> dissim)) {
    throw FormatError("malformed model header");
  }
  EmbeddingModel m;
  try {
    m = EmbeddingModel(parse_variant(variant), parse_dissimilarity(dissim), n_ent, n_rel, d, k);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model header: ") + e.what());
  }
  const std::size_t expected = 8 * (m.entity_block().size() + m.relation_block().size() +
                                    m.head_proj_block().size() + m.tail_proj_block().size());
  detail::Reader rd(bytes.substr(eol + 1));
  if (rd.remaining() != expected + 8) throw FormatError("model file size does not match header");
  rd.f64s(m.entity_block());
  rd.f64s(m.relation_block());
  rd.f64s(m.head_proj_block());
  rd.f64s(m.tail_proj_block());
  if (rd.u64() != expected) throw FormatError("payload length footer mismatch");
  return m;
}

void save_model(const EmbeddingModel& model, const std::filesystem::path& path) {
  detail::write_file_atomic(path.string(), serialize_model(model));
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  return deserialize_model(detail::read_file(path.string()));
}

std::uint64_t model_fingerprint(const EmbeddingModel& model) {
  return detail::fnv1a64(serialize_model(model));
}

}  // namespace dre
