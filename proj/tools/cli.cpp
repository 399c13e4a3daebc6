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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>

#include "dre/domain_model.hpp"
#include "dre/embedding.hpp"
#include "dre/errors.hpp"
#include "dre/evaluation.hpp"
#include "dre/kg_data.hpp"
#include "dre/parallel.hpp"

namespace dre::cli {
namespace {

namespace fs = std::filesystem;

struct Preset {
  const char* name;
  const char* variant;
  std::size_t dim;
  double learning_rate;
  double margin;
  std::size_t batch;
  const char* dissimilarity;
};

constexpr Preset kPresets[] = {
    {"wn18-transe", "transe", 50, 0.001, 2.0, 120, "l1"},
    {"fb15k-transe", "transe", 50, 0.001, 1.0, 120, "l1"},
    {"wn18-transr", "transr", 50, 0.001, 4.0, 1440, "l1"},
    {"fb15k-transr", "transr", 50, 0.001, 1.0, 4800, "l1"},
    {"wn18-stranse", "stranse", 50, 0.0005, 5.0, 120, "l1"},
    {"fb15k-stranse", "stranse", 100, 0.0001, 1.0, 120, "l1"},
};

struct Options {
  // data
  std::string dataset, train_path, valid_path, test_path, format = "hrt";
  // train
  std::string preset, variant = "transe", dissimilarity = "l1", sampling = "uniform";
  std::size_t dim = 50, dim_relation = 0, batch = 120;
  double learning_rate = 0.001, margin = 2.0;
  int epochs = 1000, eval_every = 0, patience = 50;
  bool normalize = false;
  std::string init_model;
  // fit-domains
  std::size_t min_members = kMinDomainMembers, fit_batch = 120;
  double fit_learning_rate = 1e-5;
  int fit_epochs = 500;
  // evaluate / predict
  std::string model, domains, report, csv, ties = "optimistic";
  std::string head, relation, tail;
  std::size_t top = 10;
  // shared
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct TrainFlags {
  CLI::Option* variant;
  CLI::Option* dim;
  CLI::Option* dim_relation;
  CLI::Option* learning_rate;
  CLI::Option* margin;
  CLI::Option* batch;
  CLI::Option* dissimilarity;
};

// Preset values only fill options that neither the command line nor the
// config file set.
void apply_preset(Options& o, const TrainFlags& f) {
  if (o.preset.empty()) return;
  const auto* p = std::ranges::find_if(kPresets, [&](const Preset& x) { return o.preset == x.name; });
  if (p == std::end(kPresets)) {
    std::string names;
    for (const Preset& x : kPresets) names += std::string(names.empty() ? "" : ", ") + x.name;
    throw ConfigError("unknown preset '" + o.preset + "' (known: " + names + ")");
  }
  if (f.variant->count() == 0) o.variant = p->variant;
  if (f.dim->count() == 0) o.dim = p->dim;
  if (f.dim_relation->count() == 0 && f.dim->count() == 0) o.dim_relation = p->dim;
  if (f.learning_rate->count() == 0) o.learning_rate = p->learning_rate;
  if (f.margin->count() == 0) o.margin = p->margin;
  if (f.batch->count() == 0) o.batch = p->batch;
  if (f.dissimilarity->count() == 0) o.dissimilarity = p->dissimilarity;
}

TripleFormat parse_format(const std::string& s) {
  if (s == "hrt") return TripleFormat::HeadRelationTail;
  if (s == "htr") return TripleFormat::HeadTailRelation;
  throw ConfigError("unknown triple format '" + s + "' (expected hrt or htr)");
}

NegativeSampling parse_sampling(const std::string& s) {
  if (s == "uniform" || s == "unif") return NegativeSampling::Uniform;
  if (s == "bernoulli" || s == "bern") return NegativeSampling::Bernoulli;
  throw ConfigError("unknown sampling '" + s + "' (expected uniform or bernoulli)");
}

TieMode parse_ties(const std::string& s) {
  if (s == "optimistic") return TieMode::Optimistic;
  if (s == "pessimistic") return TieMode::Pessimistic;
  throw ConfigError("unknown tie mode '" + s + "' (expected optimistic or pessimistic)");
}

KnowledgeGraph load_data(const Options& o, std::ostream& err) {
  fs::path train = o.train_path, valid = o.valid_path, test = o.test_path;
  if (!o.dataset.empty()) {
    const fs::path dir = o.dataset;
    if (train.empty()) train = dir / "train.txt";
    if (valid.empty()) valid = dir / "valid.txt";
    if (test.empty()) test = dir / "test.txt";
  }
  if (train.empty() || valid.empty() || test.empty()) {
    throw ConfigError("data paths missing: pass --dataset DIR or all of --train, --valid, --test");
  }
  KnowledgeGraph g = load_graph(train, valid, test, parse_format(o.format));
  err << "data: " << g.num_entities() << " entities, " << g.num_relations() << " relations, "
      << g.train().size() << "/" << g.valid().size() << "/" << g.test().size()
      << " train/valid/test triples\n";
  return g;
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

// Refuses to write over any input of the command.
void check_output(const std::string& out, std::initializer_list<std::string> inputs) {
  if (out.empty()) return;
  const fs::path o = fs::weakly_canonical(out);
  for (const std::string& in : inputs) {
    if (!in.empty() && fs::weakly_canonical(in) == o) {
      throw ConfigError("output '" + out + "' would overwrite an input file");
    }
  }
}

void check_vocabulary(const EmbeddingModel& m, const KnowledgeGraph& g) {
  if (m.num_entities() != g.num_entities() || m.num_relations() != g.num_relations()) {
    throw ConfigError("model has " + std::to_string(m.num_entities()) + " entities and " +
                      std::to_string(m.num_relations()) + " relations but the data has " +
                      std::to_string(g.num_entities()) + " and " +
                      std::to_string(g.num_relations()));
  }
}

unsigned thread_count(const Options& o) { return o.threads > 0 ? o.threads : default_threads(); }

// Writes every file through a temporary name; nothing is left behind when
// any of them fails.
void write_outputs(const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<fs::path> done;
  try {
    for (const auto& [path, content] : files) {
      fs::path tmp = path;
      tmp += ".tmp";
      {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << content;
        f.close();
        if (!f) {
          std::error_code ec;
          fs::remove(tmp, ec);
          throw IoError("cannot write '" + path.string() + "'");
        }
      }
      fs::rename(tmp, path);
      done.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const fs::path& p : done) fs::remove(p, ec);
    throw;
  }
}

std::string nearest_labels(const Vocab& vocab, const std::string& label) {
  std::vector<std::pair<std::size_t, const std::string*>> scored;
  scored.reserve(vocab.size());
  for (const std::string& l : vocab.labels()) scored.emplace_back(edit_distance(label, l), &l);
  const std::size_t n = std::min<std::size_t>(5, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first < b.first : *a.second < *b.second;
                    });
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? ", " : "") + *scored[i].second;
  return s;
}

std::uint32_t resolve(const Vocab& vocab, const std::string& label, const char* kind) {
  if (auto id = vocab.find(label)) return *id;
  std::string msg = std::string("unknown ") + kind + " label '" + label + "'";
  if (vocab.size() > 0) msg += "; nearest: " + nearest_labels(vocab, label);
  throw LookupError(msg);
}

int cmd_train(const Options& o, std::ostream& err) {
  require_path(o.out, "--out");
  check_output(o.out, {o.init_model, o.train_path, o.valid_path, o.test_path});
  TrainConfig cfg;
  cfg.variant = parse_variant(o.variant);
  cfg.dim_entity = o.dim;
  cfg.dim_relation = o.dim_relation > 0 ? o.dim_relation : o.dim;
  cfg.learning_rate = o.learning_rate;
  cfg.margin = o.margin;
  cfg.batch_size = o.batch;
  cfg.dissimilarity = parse_dissimilarity(o.dissimilarity);
  cfg.epochs = o.epochs;
  cfg.sampling = parse_sampling(o.sampling);
  cfg.normalize_entities = o.normalize;
  cfg.seed = o.seed;
  cfg.eval_every = o.eval_every;
  cfg.patience = o.patience;
  cfg.validate();
  if (cfg.variant != Variant::TransE && o.init_model.empty()) {
    throw ConfigError(std::string(to_string(cfg.variant)) +
                      " training needs --init-model with a trained TransE model");
  }

  const KnowledgeGraph graph = load_data(o, err);
  std::optional<EmbeddingModel> init;
  if (!o.init_model.empty()) init = load_model(o.init_model);

  err << "train: " << to_string(cfg.variant) << " d=" << cfg.dim_entity
      << " k=" << cfg.dim_relation << " lr=" << cfg.learning_rate << " margin=" << cfg.margin
      << " batch=" << cfg.batch_size << " " << to_string(cfg.dissimilarity)
      << " epochs=" << cfg.epochs << " seed=" << cfg.seed << "\n";
  TrainHooks hooks;
  hooks.on_epoch = [&](int epoch, double loss) {
    err << "epoch " << epoch << " loss " << loss << "\n";
  };
  if (cfg.eval_every > 0 && !graph.valid().empty()) {
    const unsigned threads = thread_count(o);
    hooks.validate = [&graph, &err, threads](const EmbeddingModel& m) {
      EvalOptions eo;
      eo.split = Split::Valid;
      eo.threads = threads;
      const double h10 = evaluate(m, nullptr, graph, eo).at(Setting::Filtered, ReportSide::Combined).hits10;
      err << "validation filtered hits@10 " << h10 << "\n";
      return h10;
    };
  }
  const EmbeddingModel model = train(graph, cfg, init ? &*init : nullptr, hooks);
  save_model(model, o.out);
  err << "wrote " << o.out << "\n";
  return 0;
}

int cmd_fit_domains(const Options& o, std::ostream& err) {
  require_path(o.model, "--model");
  require_path(o.out, "--out");
  check_output(o.out, {o.model, o.train_path, o.valid_path, o.test_path});
  FitConfig cfg;
  cfg.learning_rate = o.fit_learning_rate;
  cfg.batch_size = o.fit_batch;
  cfg.epochs = o.fit_epochs;
  cfg.seed = o.seed;
  cfg.validate();

  const KnowledgeGraph graph = load_data(o, err);
  const EmbeddingModel model = load_model(o.model);
  check_vocabulary(model, graph);

  DomainFitOptions opts;
  opts.min_members = o.min_members;
  opts.threads = thread_count(o);
  std::size_t fitted = 0;
  std::vector<std::string> skipped;
  opts.on_domain = [&](const DomainFitSummary& s) {
    const std::string name =
        graph.relations().label(s.key.relation) + " " + std::string(to_string(s.key.side));
    if (s.skipped) {
      skipped.push_back(name);
      return;
    }
    ++fitted;
    err << "domain " << name << " members " << s.members << " mean f_train "
        << s.initial_mean_score << " -> " << s.final_mean_score << "\n";
  };
  const DomainModel dm = fit_all_domains(graph, model, cfg, opts);
  err << "fitted " << fitted << " domains, skipped " << skipped.size() << "\n";
  for (const std::string& s : skipped) err << "skipped " << s << "\n";
  save_domains(dm, o.out);
  err << "wrote " << o.out << "\n";
  return 0;
}

void log_summary(std::ostream& err, const char* name, const EvalReport& r) {
  for (Setting s : {Setting::Raw, Setting::Filtered}) {
    const Metrics& m = r.at(s, ReportSide::Combined);
    err << name << " " << to_string(s) << " MR " << m.mean_rank << " hits@10 " << m.hits10
        << "\n";
  }
}

int cmd_evaluate(const Options& o, std::ostream& err) {
  require_path(o.model, "--model");
  if (o.report.empty() && o.csv.empty()) throw ConfigError("pass --report and/or --csv");
  for (const std::string& out : {o.report, o.csv}) {
    check_output(out, {o.model, o.domains, o.train_path, o.valid_path, o.test_path});
  }
  EvalOptions eo;
  eo.ties = parse_ties(o.ties);
  eo.threads = thread_count(o);

  const KnowledgeGraph graph = load_data(o, err);
  const EmbeddingModel model = load_model(o.model);
  check_vocabulary(model, graph);
  std::optional<DomainModel> dm;
  if (!o.domains.empty()) dm = load_domains(o.domains);

  const EvalReport base = evaluate(model, nullptr, graph, eo);
  log_summary(err, "baseline", base);
  std::ostringstream text, csv;
  if (dm) {
    const EvalReport dre = evaluate(model, &*dm, graph, eo);
    log_summary(err, "dre", dre);
    write_comparison_text(text, base, dre);
    write_comparison_csv(csv, base, dre);
  } else {
    write_report_text(text, base);
    write_report_csv(csv, base);
  }
  std::vector<std::pair<fs::path, std::string>> files;
  if (!o.report.empty()) files.emplace_back(o.report, text.str());
  if (!o.csv.empty()) files.emplace_back(o.csv, csv.str());
  write_outputs(files);
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  require_path(o.model, "--model");
  if (o.relation.empty()) throw ConfigError("--relation is required");
  if ((o.head == "?") == (o.tail == "?")) {
    throw ConfigError("exactly one of --head and --tail must be '?'");
  }
  const Side side = o.head == "?" ? Side::Head : Side::Tail;
  const std::string& known = side == Side::Head ? o.tail : o.head;
  if (known.empty()) throw ConfigError(side == Side::Head ? "--tail is required" : "--head is required");
  if (o.top == 0) throw ConfigError("--top must be positive");

  const KnowledgeGraph graph = load_data(o, err);
  const EmbeddingModel model = load_model(o.model);
  check_vocabulary(model, graph);
  std::optional<DomainModel> dm;
  std::optional<DomainPenalty> penalty;
  if (!o.domains.empty()) {
    dm = load_domains(o.domains);
    penalty.emplace(*dm, model);
  }
  const RelationId r = resolve(graph.relations(), o.relation, "relation");
  const EntityId e = resolve(graph.entities(), known, "entity");
  const bool has_domain = penalty && penalty->find(r, side) != nullptr;

  struct Row {
    EntityId id;
    double base, pen, combined;
  };
  std::vector<Row> rows(graph.num_entities());
  const Triple query = side == Side::Head ? Triple{0, r, e} : Triple{e, r, 0};
  for (EntityId c = 0; c < rows.size(); ++c) {
    const Triple t = query.with_entity(side, c);
    const double base = score_triple(model, t);
    const double pen = penalty ? (*penalty)(c, r, side) : 0.0;
    rows[c] = {c, base, pen, base + pen};
  }
  const std::size_t n = std::min(o.top, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n), rows.end(),
                    [](const Row& a, const Row& b) {
                      return a.combined != b.combined ? a.combined < b.combined : a.id < b.id;
                    });
  out << "rank\tentity\tbaseline\tpenalty\tcombined\tinside\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < n; ++i) {
    const Row& row = rows[i];
    out << i + 1 << "\t" << graph.entities().label(row.id) << "\t" << row.base << "\t" << row.pen
        << "\t" << row.combined << "\t" << (!has_domain ? "-" : row.pen == 0.0 ? "yes" : "no")
        << "\n";
  }
  return 0;
}

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--dataset", o.dataset, "Directory with train.txt, valid.txt, test.txt");
  cmd->add_option("--train", o.train_path, "Training triples (overrides --dataset)");
  cmd->add_option("--valid", o.valid_path, "Validation triples (overrides --dataset)");
  cmd->add_option("--test", o.test_path, "Test triples (overrides --dataset)");
  cmd->add_option("--format", o.format, "Column order: hrt or htr")->capture_default_str();
}

void add_threads(CLI::App* cmd, Options& o) {
  cmd->add_option("--threads", o.threads, "Worker threads (default: DRE_THREADS or all cores)");
}

}  // namespace

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Domain-constrained link prediction with translation embeddings", "dre"};
  app.set_config("--config", "", "INI/TOML file with option values; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* train_cmd = app.add_subcommand("train", "Train a TransE, TransR or STransE model");
  add_data_options(train_cmd, o);
  TrainFlags flags{};
  train_cmd->add_option("--preset", o.preset, "Benchmark configuration, e.g. wn18-transe, fb15k-stranse");
  flags.variant = train_cmd->add_option("--variant", o.variant, "transe, transr or stranse")
                      ->capture_default_str();
  flags.dim = train_cmd->add_option("--dim", o.dim, "Entity dimension")->capture_default_str();
  flags.dim_relation = train_cmd->add_option("--dim-relation", o.dim_relation,
                                             "Relation dimension (default: --dim)");
  flags.learning_rate =
      train_cmd->add_option("--lr", o.learning_rate, "SGD learning rate")->capture_default_str();
  flags.margin = train_cmd->add_option("--margin", o.margin, "Ranking margin")->capture_default_str();
  flags.batch = train_cmd->add_option("--batch", o.batch, "Mini-batch size")->capture_default_str();
  flags.dissimilarity =
      train_cmd->add_option("--dissim", o.dissimilarity, "l1 or l2")->capture_default_str();
  train_cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--sampling", o.sampling, "uniform or bernoulli")->capture_default_str();
  train_cmd->add_flag("--normalize", o.normalize, "Renormalize entity vectors each batch");
  train_cmd->add_option("--init-model", o.init_model, "TransE model for TransR/STransE init");
  train_cmd->add_option("--eval-every", o.eval_every, "Validate every N epochs (0: never)")
      ->capture_default_str();
  train_cmd->add_option("--patience", o.patience, "Validations without improvement before stopping")
      ->capture_default_str();
  train_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", o.out, "Output model file");
  add_threads(train_cmd, o);

  auto* fit_cmd = app.add_subcommand("fit-domains", "Fit one ellipsoid per relation domain");
  add_data_options(fit_cmd, o);
  fit_cmd->add_option("--model", o.model, "Trained embedding model");
  fit_cmd->add_option("--fit-lr", o.fit_learning_rate, "Ellipsoid SGD learning rate")
      ->capture_default_str();
  fit_cmd->add_option("--fit-batch", o.fit_batch, "Ellipsoid mini-batch size")->capture_default_str();
  fit_cmd->add_option("--fit-epochs", o.fit_epochs, "Ellipsoid epochs")->capture_default_str();
  fit_cmd->add_option("--min-members", o.min_members, "Smallest domain that gets an ellipsoid")
      ->capture_default_str();
  fit_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--out", o.out, "Output domain-model file");
  add_threads(fit_cmd, o);

  auto* eval_cmd = app.add_subcommand("evaluate", "Link prediction metrics on the test split");
  add_data_options(eval_cmd, o);
  eval_cmd->add_option("--model", o.model, "Trained embedding model");
  eval_cmd->add_option("--domains", o.domains, "Domain model; adds DRE results and deltas");
  eval_cmd->add_option("--report", o.report, "Text report (key = value lines)");
  eval_cmd->add_option("--csv", o.csv, "CSV report");
  eval_cmd->add_option("--ties", o.ties, "optimistic or pessimistic")->capture_default_str();
  add_threads(eval_cmd, o);

  auto* predict_cmd = app.add_subcommand("predict", "Rank entities for (h, r, ?) or (?, r, t)");
  add_data_options(predict_cmd, o);
  predict_cmd->add_option("--model", o.model, "Trained embedding model");
  predict_cmd->add_option("--domains", o.domains, "Domain model for penalties");
  predict_cmd->add_option("--head", o.head, "Head label or ?");
  predict_cmd->add_option("--relation", o.relation, "Relation label");
  predict_cmd->add_option("--tail", o.tail, "Tail label or ?");
  predict_cmd->add_option("--top", o.top, "Rows to print")->capture_default_str();

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) {
      apply_preset(o, flags);
      return cmd_train(o, err);
    }
    if (fit_cmd->parsed()) return cmd_fit_domains(o, err);
    if (eval_cmd->parsed()) return cmd_evaluate(o, err);
    return cmd_predict(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dre::cli
