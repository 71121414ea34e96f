// SPDX-License-Identifier: Apache-2.0
//
// textprune CLI: train / eval / score / prune / synth / grid / report.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "textprune/corpus.hpp"
#include "textprune/errors.hpp"
#include "textprune/experiments.hpp"
#include "textprune/features.hpp"
#include "textprune/linear_model.hpp"
#include "textprune/losses.hpp"
#include "textprune/metrics.hpp"
#include "textprune/pruning.hpp"

namespace fs = std::filesystem;
using namespace textprune;

namespace {

struct DataFlags {
  std::string path;
  std::string format = "csv";
  std::string schema = "generic";
  std::string name;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, const std::string& label) {
  cmd->add_option("--" + label, flags.path, label + " dataset file")->required();
  cmd->add_option("--" + label + "-format", flags.format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--" + label + "-schema", flags.schema, "generic or sarc")
      ->check(CLI::IsMember({"generic", "sarc"}));
}

corpus::Dataset load_flags(const DataFlags& flags) {
  const auto format = flags.format == "jsonl" ? corpus::FileFormat::jsonl
                                              : corpus::FileFormat::csv;
  const auto schema =
      flags.schema == "sarc" ? corpus::Schema::sarc : corpus::Schema::generic;
  return corpus::load_dataset(flags.path, format, schema, flags.name);
}

struct LossFlags {
  std::string loss = "ce";
  double w_pos = 0.75;
  double w_neg = 0.25;
};

void add_loss_flags(CLI::App* cmd, LossFlags& flags) {
  cmd->add_option("--loss", flags.loss, "ce | wce | hinge | sq_hinge")
      ->check(CLI::IsMember({"ce", "wce", "hinge", "sq_hinge"}));
  cmd->add_option("--w-pos", flags.w_pos, "positive-class weight (wce)");
  cmd->add_option("--w-neg", flags.w_neg, "negative-class weight (wce)");
}

losses::LossSpec spec_from(const LossFlags& flags) {
  losses::LossSpec spec = losses::parse_loss(flags.loss);
  spec.w_positive = flags.w_pos;
  spec.w_negative = flags.w_neg;
  return spec;
}

void add_train_flags(CLI::App* cmd, model::TrainConfig& cfg) {
  cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size");
  cmd->add_option("--weight-decay", cfg.weight_decay, "decoupled weight decay");
  cmd->add_option("--warmup", cfg.warmup_steps, "linear warmup steps");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--lr", cfg.base_lr, "base learning rate");
  cmd->add_option("--seed", cfg.seed, "training seed");
}

nlohmann::json metrics_json(const metrics::ConfusionMatrix& cm) {
  const auto s = metrics::scores(cm);
  nlohmann::json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["tp"] = cm.tp;
  j["fp"] = cm.fp;
  j["fn"] = cm.fn;
  j["tn"] = cm.tn;
  return j;
}

nlohmann::json selection_json(const pruning::SelectionReport& r) {
  nlohmann::json j;
  j["kind"] = std::string(pruning::strategy_label(r.kind));
  j["requested"] = r.requested;
  j["selected"] = r.selected;
  j["eligible"] = r.eligible;
  j["shortfall"] = r.shortfall;
  j["empty"] = r.empty;
  j["n_positive"] = r.n_positive;
  j["n_negative"] = r.n_negative;
  j["confidence_min"] = r.confidence_min;
  j["confidence_mean"] = r.confidence_mean;
  j["confidence_max"] = r.confidence_max;
  return j;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

int run(int argc, char** argv) {
  CLI::App app{"teacher-confidence dataset pruning and loss benchmarking for "
               "binary short-text classification"};
  app.require_subcommand(1);

  // ------------------------------------------------------------------ train
  auto* train_cmd = app.add_subcommand("train", "train a linear model on a dataset");
  DataFlags train_data;
  LossFlags train_loss;
  model::TrainConfig train_cfg;
  std::size_t train_dim = features::kDefaultDim;
  std::string model_out = "model.json";
  std::string vectorizer_out = "vectorizer.json";
  std::string history_out;
  add_data_flags(train_cmd, train_data, "data");
  train_cmd->add_option("--name", train_data.name, "namespace ids as <name>/<id>");
  add_loss_flags(train_cmd, train_loss);
  add_train_flags(train_cmd, train_cfg);
  train_cmd->add_option("--dim", train_dim, "feature dimension (power of two)");
  train_cmd->add_option("--model-out", model_out, "output model file");
  train_cmd->add_option("--vectorizer-out", vectorizer_out, "output vectorizer file");
  train_cmd->add_option("--history-out", history_out, "step,mean_loss CSV");

  // ------------------------------------------------------------------- eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
  DataFlags eval_data;
  std::string eval_model, eval_vectorizer, eval_out;
  add_data_flags(eval_cmd, eval_data, "data");
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--vectorizer", eval_vectorizer, "vectorizer file")->required();
  eval_cmd->add_option("--out", eval_out, "write the metrics JSON here too");

  // ------------------------------------------------------------------ score
  auto* score_cmd =
      app.add_subcommand("score", "score a pool with a teacher, emit id,logit CSV");
  DataFlags score_pool_data;
  std::string score_model, score_vectorizer, score_out = "scores.csv";
  add_data_flags(score_cmd, score_pool_data, "pool");
  score_cmd->add_option("--model", score_model, "teacher model file")->required();
  score_cmd->add_option("--vectorizer", score_vectorizer, "vectorizer file")->required();
  score_cmd->add_option("--out", score_out, "output scores CSV");

  // ------------------------------------------------------------------ prune
  auto* prune_cmd = app.add_subcommand(
      "prune", "select an easy/hard/random augmentation subset from a pool");
  DataFlags prune_pool;
  std::string prune_teacher, prune_vectorizer, prune_scores;
  std::string prune_strategy = "easy";
  std::size_t prune_k = 10000;
  std::uint64_t prune_seed = 0;
  std::string prune_out = "subset.csv";
  std::string prune_report_out;
  add_data_flags(prune_cmd, prune_pool, "pool");
  auto* teacher_opt =
      prune_cmd->add_option("--teacher", prune_teacher, "teacher model file");
  prune_cmd->add_option("--vectorizer", prune_vectorizer,
                        "vectorizer file (with --teacher)")
      ->needs(teacher_opt);
  prune_cmd->add_option("--scores", prune_scores, "external id,logit CSV")
      ->excludes(teacher_opt);
  prune_cmd->add_option("--strategy", prune_strategy, "easy | hard | random")
      ->check(CLI::IsMember({"easy", "hard", "random"}));
  prune_cmd->add_option("--k", prune_k, "subset size");
  prune_cmd->add_option("--seed", prune_seed, "random strategy seed");
  prune_cmd->add_option("--out", prune_out, "output dataset CSV");
  prune_cmd->add_option("--report-out", prune_report_out, "selection report JSON");

  // ------------------------------------------------------------------ synth
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic base/pool scenario");
  corpus::NoisePoolConfig synth_cfg;
  std::size_t synth_n_test = 0;
  std::string synth_base_out = "base.csv";
  std::string synth_pool_out = "pool.csv";
  std::string synth_clean_out, synth_test_out;
  synth_cmd->add_option("--n-base", synth_cfg.n_base, "base set size");
  synth_cmd->add_option("--n-pool", synth_cfg.n_pool, "pool size");
  synth_cmd->add_option("--dim-latent", synth_cfg.dim_latent, "latent coordinates");
  synth_cmd->add_option("--separation", synth_cfg.separation,
                        "distance between class centers");
  synth_cmd->add_option("--fn", synth_cfg.false_negative_rate,
                        "false-negative rate in the pool");
  synth_cmd->add_option("--fp", synth_cfg.false_positive_rate,
                        "false-positive rate in the pool");
  synth_cmd->add_option("--seed", synth_cfg.seed, "generator seed");
  synth_cmd->add_option("--out-base", synth_base_out, "base dataset CSV");
  synth_cmd->add_option("--out-pool", synth_pool_out, "pool dataset CSV");
  synth_cmd->add_option("--out-clean", synth_clean_out,
                        "pre-flip pool labels CSV (id,label)");
  synth_cmd->add_option("--n-test", synth_n_test, "also draw a clean test set");
  synth_cmd->add_option("--out-test", synth_test_out, "test dataset CSV");

  // ------------------------------------------------------------------- grid
  auto* grid_cmd = app.add_subcommand(
      "grid", "run the loss x dataset experiment grid from a config file");
  std::string grid_config;
  std::vector<std::string> grid_sets;
  std::string grid_out_dir;
  bool grid_canonical = false;
  auto* config_opt = grid_cmd->add_option("--config", grid_config,
                                          "config file (key = value, [sections])");
  grid_cmd
      ->add_flag("--canonical", grid_canonical,
                 "run the built-in synthetic benchmark scenario")
      ->excludes(config_opt);
  grid_cmd->add_option("--set", grid_sets, "override: section.key=value")
      ->take_all();
  grid_cmd->add_option("--out-dir", grid_out_dir, "artifact directory override");

  // ----------------------------------------------------------------- report
  auto* report_cmd = app.add_subcommand(
      "report", "re-emit report.csv/report.md from saved cell artifacts");
  std::string report_dir;
  std::string report_csv_out, report_md_out;
  report_cmd->add_option("--dir", report_dir, "grid output directory")->required();
  report_cmd->add_option("--out-csv", report_csv_out, "defaults to <dir>/report.csv");
  report_cmd->add_option("--out-md", report_md_out, "defaults to <dir>/report.md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 prints help/errors itself; fold its exit codes onto 0 (help) / 1.
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (train_cmd->parsed()) {
    const corpus::Dataset data = load_flags(train_data);
    const auto vec = features::Vectorizer::fit(data, train_dim);
    const auto result = model::train(data, vec, spec_from(train_loss), train_cfg);
    model::save_model(result.model, model_out);
    vec.save(vectorizer_out);
    if (!history_out.empty()) model::write_history_csv(result.history, history_out);
    std::printf("trained on %zu examples (%zu steps); model -> %s\n", data.size(),
                result.history.steps_total, model_out.c_str());
    return 0;
  }

  if (eval_cmd->parsed()) {
    const corpus::Dataset data = load_flags(eval_data);
    const auto vec = features::Vectorizer::load(eval_vectorizer);
    const auto m = model::load_model(eval_model);
    std::vector<corpus::Label> preds, gold;
    preds.reserve(data.size());
    for (const corpus::Example& e : data) {
      preds.push_back(model::predict(m, vec.transform(e.text)));
      gold.push_back(e.label);
    }
    const auto j = metrics_json(metrics::confusion(preds, gold));
    std::cout << j.dump() << '\n';
    if (!eval_out.empty()) write_text(eval_out, j.dump() + "\n");
    return 0;
  }

  if (score_cmd->parsed()) {
    const corpus::Dataset pool = load_flags(score_pool_data);
    const auto vec = features::Vectorizer::load(score_vectorizer);
    const auto teacher = model::load_model(score_model);
    const auto scored = pruning::score_pool(teacher, vec, pool);
    pruning::write_scores_csv(scored, score_out);
    std::printf("scored %zu pool examples -> %s\n", scored.size(), score_out.c_str());
    return 0;
  }

  if (prune_cmd->parsed()) {
    const corpus::Dataset pool = load_flags(prune_pool);
    std::vector<pruning::ScoredExample> scored;
    if (!prune_teacher.empty()) {
      if (prune_vectorizer.empty()) {
        throw ConfigError("--teacher requires --vectorizer");
      }
      const auto vec = features::Vectorizer::load(prune_vectorizer);
      const auto teacher = model::load_model(prune_teacher);
      scored = pruning::score_pool(teacher, vec, pool);
    } else if (!prune_scores.empty()) {
      scored = pruning::import_scores(pool, prune_scores);
    } else {
      throw ConfigError("prune needs --teacher or --scores");
    }
    pruning::SelectionStrategy strategy;
    strategy.kind = pruning::parse_strategy(prune_strategy);
    strategy.k = prune_k;
    strategy.random_seed = prune_seed;
    const auto sel = pruning::select(scored, strategy);
    const auto report = pruning::selection_report(sel, scored);
    corpus::write_dataset(sel.subset, prune_out);
    const std::string report_str = selection_json(report).dump();
    std::cout << report_str << '\n';
    if (!prune_report_out.empty()) write_text(prune_report_out, report_str + "\n");
    return 0;
  }

  if (synth_cmd->parsed()) {
    const auto bundle = corpus::generate_synthetic(synth_cfg);
    corpus::write_dataset(bundle.base, synth_base_out);
    corpus::write_dataset(bundle.pool, synth_pool_out);
    if (!synth_clean_out.empty()) {
      std::string csv = "id,label\n";
      for (std::size_t i = 0; i < bundle.pool.size(); ++i) {
        csv += bundle.pool[i].id;
        csv += bundle.clean_pool_labels[i] == corpus::Label::positive ? ",1\n" : ",0\n";
      }
      write_text(synth_clean_out, csv);
    }
    if (synth_n_test > 0) {
      if (synth_test_out.empty()) throw ConfigError("--n-test requires --out-test");
      corpus::write_dataset(
          corpus::generate_clean_set(synth_cfg, synth_n_test,
                                     synth_cfg.seed + 1, "test"),
          synth_test_out);
    }
    std::printf("base %zu -> %s, pool %zu -> %s\n", bundle.base.size(),
                synth_base_out.c_str(), bundle.pool.size(), synth_pool_out.c_str());
    return 0;
  }

  if (grid_cmd->parsed()) {
    experiments::ExperimentConfig cfg;
    if (grid_canonical) {
      cfg = experiments::canonical_synthetic_config();
      cfg.loss_list = {losses::LossKind::cross_entropy,
                       losses::LossKind::weighted_cross_entropy,
                       losses::LossKind::hinge, losses::LossKind::squared_hinge};
      cfg.strategies = {pruning::StrategyKind::easy, pruning::StrategyKind::hard,
                        pruning::StrategyKind::random};
      cfg.seeds = {1, 2, 3};
    }
    if (!grid_config.empty()) cfg = experiments::load_config(grid_config);
    if (grid_config.empty() && !grid_canonical) {
      throw ConfigError("grid needs --config or --canonical");
    }
    for (const std::string& kv : grid_sets) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("--set expects section.key=value, got '" + kv + "'");
      }
      experiments::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!grid_out_dir.empty()) cfg.output_dir = grid_out_dir;
    const auto table = experiments::run_grid(cfg);
    // mirror the markdown grid on stdout
    for (std::size_t r = 0; r < table.loss_labels.size(); ++r) {
      for (std::size_t c = 0; c < table.dataset_labels.size(); ++c) {
        const auto& cell = table.cell(r, c);
        std::printf("%-9s %-9s f1 %.4f ± %.4f (%zu seeds)\n", cell.loss.c_str(),
                    cell.dataset.c_str(), cell.f1_mean, cell.f1_std,
                    cell.per_seed_f1.size());
      }
    }
    if (!cfg.output_dir.empty()) {
      std::printf("reports -> %s\n", (cfg.output_dir / "report.csv").string().c_str());
    }
    return 0;
  }

  if (report_cmd->parsed()) {
    const fs::path dir(report_dir);
    const auto table = experiments::table_from_artifacts(dir);
    const fs::path csv_out =
        report_csv_out.empty() ? dir / "report.csv" : fs::path(report_csv_out);
    const fs::path md_out =
        report_md_out.empty() ? dir / "report.md" : fs::path(report_md_out);
    experiments::emit_report(table, experiments::ReportFormat::csv, csv_out);
    experiments::emit_report(table, experiments::ReportFormat::markdown, md_out);
    std::printf("rebuilt %zu cells -> %s\n", table.cells.size(),
                csv_out.string().c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
