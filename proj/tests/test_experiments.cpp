// SPDX-License-Identifier: Apache-2.0
#include "textprune/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "textprune/errors.hpp"
#include "textprune/rng.hpp"

using namespace textprune;
namespace fs = std::filesystem;

namespace {

experiments::ExperimentConfig tiny_synthetic_config() {
  experiments::ExperimentConfig cfg;
  corpus::NoisePoolConfig synth;
  synth.n_base = 60;
  synth.n_pool = 300;
  synth.dim_latent = 8;
  synth.separation = 2.5;
  synth.false_negative_rate = 0.02;
  synth.false_positive_rate = 0.01;
  synth.seed = 11;
  cfg.synthetic = synth;
  cfg.synthetic_test_size = 200;
  cfg.feature_dim = 512;
  cfg.selection_k = 40;
  cfg.train.epochs = 2;
  cfg.train.warmup_steps = 20;
  cfg.loss_list = {losses::LossKind::cross_entropy};
  cfg.strategies = {pruning::StrategyKind::easy};
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

losses::LossSpec spec_of(losses::LossKind k) {
  losses::LossSpec s;
  s.kind = k;
  return s;
}

}  // namespace

TEST_CASE("config file parses into the expected structure") {
  const fs::path p = fs::temp_directory_path() / "textprune_test_cfg.ini";
  {
    std::ofstream out(p);
    out << "# comment\n"
           "[synthetic]\n"
           "enabled = true\n"
           "n_base = 123\n"
           "separation = 3.5\n"
           "\n"
           "[selection]\n"
           "strategies = easy, hard\n"
           "k = 77\n"
           "\n"
           "[losses]\n"
           "losses = ce,sq_hinge\n"
           "w_pos = 0.8\n"
           "\n"
           "[train]\n"
           "batch_size = 16\n"
           "base_lr = 0.125\n"
           "\n"
           "[run]\n"
           "seeds = 5,6,7\n"
           "output_dir = /tmp/somewhere\n";
  }
  const auto cfg = experiments::load_config(p);
  REQUIRE(cfg.synthetic.has_value());
  CHECK(cfg.synthetic->n_base == 123);
  CHECK(cfg.synthetic->separation == 3.5);
  REQUIRE(cfg.strategies.size() == 2);
  CHECK(cfg.strategies[0] == pruning::StrategyKind::easy);
  CHECK(cfg.strategies[1] == pruning::StrategyKind::hard);
  CHECK(cfg.selection_k == 77);
  REQUIRE(cfg.loss_list.size() == 2);
  CHECK(cfg.loss_list[1] == losses::LossKind::squared_hinge);
  CHECK(cfg.loss_w_positive == 0.8);
  CHECK(cfg.train.batch_size == 16);
  CHECK(cfg.train.base_lr == 0.125);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{5, 6, 7});
  CHECK(cfg.output_dir == fs::path("/tmp/somewhere"));
}

TEST_CASE("config rejects unknown keys and malformed lines") {
  const fs::path p = fs::temp_directory_path() / "textprune_test_badcfg.ini";
  {
    std::ofstream out(p);
    out << "[train]\nbatch_size = 16\nturbo = on\n";
  }
  CHECK_THROWS_WITH_AS(experiments::load_config(p), doctest::Contains("line 3"),
                       ConfigError);
  {
    std::ofstream out(p);
    out << "stray = 1\n";
  }
  CHECK_THROWS_WITH_AS(experiments::load_config(p),
                       doctest::Contains("[section]"), ConfigError);
}

TEST_CASE("apply_override mirrors the config file keys") {
  experiments::ExperimentConfig cfg;
  experiments::apply_override(cfg, "train.epochs", "9");
  experiments::apply_override(cfg, "features.dim", "1024");
  experiments::apply_override(cfg, "synthetic.n_pool", "400");
  CHECK(cfg.train.epochs == 9);
  CHECK(cfg.feature_dim == 1024);
  REQUIRE(cfg.synthetic.has_value());
  CHECK(cfg.synthetic->n_pool == 400);
  CHECK_THROWS_AS(experiments::apply_override(cfg, "nope.key", "1"), ConfigError);
  CHECK_THROWS_AS(experiments::apply_override(cfg, "train.epochs", "soon"),
                  ConfigError);
}

TEST_CASE("format_config is stable and reparseable") {
  const auto cfg = tiny_synthetic_config();
  const std::string echo1 = experiments::format_config(cfg);
  const std::string echo2 = experiments::format_config(cfg);
  CHECK(echo1 == echo2);
  CHECK(echo1.find("n_base = 60") != std::string::npos);
  CHECK(echo1.find("strategies = easy") != std::string::npos);
}

TEST_CASE("k = 0 augmentation reproduces the baseline cell exactly") {
  auto cfg = tiny_synthetic_config();
  cfg.selection_k = 0;
  const auto loss = spec_of(losses::LossKind::cross_entropy);

  const auto baseline = experiments::run_cell(cfg, std::nullopt, loss, 3);
  for (pruning::StrategyKind kind :
       {pruning::StrategyKind::easy, pruning::StrategyKind::hard,
        pruning::StrategyKind::random}) {
    pruning::SelectionStrategy strat;
    strat.kind = kind;
    strat.k = 0;
    const auto cell = experiments::run_cell(cfg, strat, loss, 3);
    CHECK(cell.f1 == baseline.f1);
    CHECK(cell.cm.tp == baseline.cm.tp);
    CHECK(cell.cm.fp == baseline.cm.fp);
  }
}

TEST_CASE("run_cell equals a hand-composed pipeline") {
  const auto cfg = tiny_synthetic_config();
  const std::uint64_t seed = 21;
  const auto loss = spec_of(losses::LossKind::squared_hinge);
  pruning::SelectionStrategy strat;
  strat.kind = pruning::StrategyKind::easy;
  strat.k = cfg.selection_k;

  const auto cell = experiments::run_cell(cfg, strat, loss, seed);

  // The same pipeline composed from the module APIs, following the
  // documented stage-tag seeding.
  corpus::NoisePoolConfig synth = *cfg.synthetic;
  synth.seed = mix_seed(seed, "synth") ^ cfg.synthetic->seed;
  const auto bundle = corpus::generate_synthetic(synth);
  const auto test = corpus::generate_clean_set(
      synth, cfg.synthetic_test_size, mix_seed(synth.seed, "test"), "test");

  const auto teacher_vec = features::Vectorizer::fit(bundle.base, cfg.feature_dim);
  model::TrainConfig teacher_cfg = cfg.train;
  teacher_cfg.seed = mix_seed(seed, "teacher");
  losses::LossSpec teacher_spec = spec_of(cfg.teacher_loss);
  teacher_spec.w_positive = cfg.loss_w_positive;
  teacher_spec.w_negative = cfg.loss_w_negative;
  const auto teacher =
      model::train(bundle.base, teacher_vec, teacher_spec, teacher_cfg).model;

  const auto scored = pruning::score_pool(teacher, teacher_vec, bundle.pool);
  pruning::SelectionStrategy seeded = strat;
  seeded.random_seed = mix_seed(seed, "select");
  const auto sel = pruning::select(scored, seeded);
  const auto train_set =
      corpus::augment(bundle.base, sel.subset, bundle.base.name() + "+easy");

  const auto final_vec = features::Vectorizer::fit(train_set, cfg.feature_dim);
  model::TrainConfig final_cfg = cfg.train;
  final_cfg.seed = mix_seed(seed, "final");
  const auto final_model = model::train(train_set, final_vec, loss, final_cfg).model;

  std::vector<corpus::Label> preds, gold;
  for (const corpus::Example& e : test) {
    preds.push_back(model::predict(final_model, final_vec.transform(e.text)));
    gold.push_back(e.label);
  }
  const double f1 = metrics::f1(metrics::confusion(preds, gold));

  CHECK(cell.f1 == f1);
  CHECK(cell.train_size == train_set.size());
  REQUIRE(cell.selection.has_value());
  CHECK(cell.selection->selected == sel.subset.size());
}

TEST_CASE("baseline cells ignore the pool entirely") {
  // File-based config so the pool can change independently of the base.
  auto synth_cfg = tiny_synthetic_config();
  const auto bundle = corpus::generate_synthetic(*synth_cfg.synthetic);
  const auto test =
      corpus::generate_clean_set(*synth_cfg.synthetic, 150, 5, "test");

  const fs::path dir = fresh_dir("textprune_test_basefiles");
  corpus::write_dataset(bundle.base, dir / "base.csv");
  corpus::write_dataset(bundle.pool, dir / "pool_a.csv");
  corpus::write_dataset(test, dir / "test.csv");
  // a different pool: reuse the test set rows
  corpus::write_dataset(test, dir / "pool_b.csv");

  experiments::ExperimentConfig cfg;
  cfg.base_file = experiments::DataFile{dir / "base.csv"};
  cfg.test_file = experiments::DataFile{dir / "test.csv"};
  cfg.feature_dim = 512;
  cfg.train = synth_cfg.train;

  const auto loss = spec_of(losses::LossKind::cross_entropy);
  cfg.pool_file = experiments::DataFile{dir / "pool_a.csv"};
  const auto with_a = experiments::run_cell(cfg, std::nullopt, loss, 9);
  cfg.pool_file = experiments::DataFile{dir / "pool_b.csv"};
  const auto with_b = experiments::run_cell(cfg, std::nullopt, loss, 9);
  CHECK(with_a.f1 == with_b.f1);

  // and a strategy cell works end to end on files
  cfg.pool_file = experiments::DataFile{dir / "pool_a.csv"};
  pruning::SelectionStrategy strat;
  strat.kind = pruning::StrategyKind::easy;
  strat.k = 25;
  const auto easy_cell = experiments::run_cell(cfg, strat, loss, 9);
  CHECK(easy_cell.train_size > with_a.train_size);
}

TEST_CASE("holdout split carves a deterministic test set") {
  auto cfg = tiny_synthetic_config();
  const auto bundle = corpus::generate_synthetic(*cfg.synthetic);
  const fs::path dir = fresh_dir("textprune_test_holdout");
  corpus::write_dataset(bundle.base, dir / "base.csv");

  experiments::ExperimentConfig file_cfg;
  file_cfg.base_file = experiments::DataFile{dir / "base.csv"};
  file_cfg.holdout_fraction = 0.25;
  file_cfg.feature_dim = 512;
  file_cfg.train.epochs = 2;
  file_cfg.train.warmup_steps = 10;

  const auto loss = spec_of(losses::LossKind::cross_entropy);
  const auto a = experiments::run_cell(file_cfg, std::nullopt, loss, 4);
  const auto b = experiments::run_cell(file_cfg, std::nullopt, loss, 4);
  CHECK(a.f1 == b.f1);
  CHECK(a.cm.total() == 15);  // floor(0.25 * 60)

  file_cfg.holdout_fraction = 0.0;
  CHECK_THROWS_WITH_AS(experiments::run_cell(file_cfg, std::nullopt, loss, 4),
                       doctest::Contains("stage data"), ConfigError);
}

TEST_CASE("grid has the full 4x4 shape and aggregates per-seed cells") {
  auto cfg = tiny_synthetic_config();
  cfg.loss_list = {losses::LossKind::cross_entropy,
                   losses::LossKind::weighted_cross_entropy,
                   losses::LossKind::hinge, losses::LossKind::squared_hinge};
  cfg.strategies = {pruning::StrategyKind::easy, pruning::StrategyKind::hard,
                    pruning::StrategyKind::random};
  cfg.seeds = {1};

  const auto table = experiments::run_grid(cfg);
  CHECK(table.loss_labels ==
        std::vector<std::string>{"ce", "wce", "hinge", "sq_hinge"});
  CHECK(table.dataset_labels ==
        std::vector<std::string>{"baseline", "easy", "hard", "random"});
  REQUIRE(table.cells.size() == 16);
  for (const auto& cell : table.cells) {
    CHECK(cell.per_seed_f1.size() == 1);
    CHECK(cell.f1_mean >= 0.0);
    CHECK(cell.f1_mean <= 1.0);
    CHECK(cell.f1_std == 0.0);
  }

  // a grid cell equals the standalone run_cell
  pruning::SelectionStrategy strat;
  strat.kind = pruning::StrategyKind::hard;
  strat.k = cfg.selection_k;
  const auto standalone =
      experiments::run_cell(cfg, strat, spec_of(losses::LossKind::hinge), 1);
  CHECK(table.cell(2, 2).per_seed_f1[0] == standalone.f1);
}

TEST_CASE("grid std equals the sample standard deviation over seeds") {
  auto cfg = tiny_synthetic_config();
  cfg.seeds = {1, 2, 3};
  cfg.strategies.clear();  // baseline column only
  const auto table = experiments::run_grid(cfg);
  REQUIRE(table.cells.size() == 1);
  const auto& cell = table.cells[0];
  REQUIRE(cell.per_seed_f1.size() == 3);

  double mean = 0.0;
  for (double f : cell.per_seed_f1) mean += f;
  mean /= 3.0;
  double sq = 0.0;
  for (double f : cell.per_seed_f1) sq += (f - mean) * (f - mean);
  const double expected_std = std::sqrt(sq / 2.0);
  CHECK(cell.f1_mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(cell.f1_std == doctest::Approx(expected_std).epsilon(1e-15));
}

TEST_CASE("single-cell grid equals run_cell") {
  auto cfg = tiny_synthetic_config();
  cfg.include_baseline = false;
  cfg.seeds = {8};
  const auto table = experiments::run_grid(cfg);
  REQUIRE(table.cells.size() == 1);
  pruning::SelectionStrategy strat;
  strat.kind = pruning::StrategyKind::easy;
  strat.k = cfg.selection_k;
  const auto cell =
      experiments::run_cell(cfg, strat, spec_of(losses::LossKind::cross_entropy), 8);
  CHECK(table.cells[0].f1_mean == cell.f1);
}

TEST_CASE("emit_report writes the documented CSV and markdown") {
  experiments::ReportTable table;
  table.loss_labels = {"ce", "hinge"};
  table.dataset_labels = {"baseline", "easy"};
  for (const char* loss : {"ce", "hinge"}) {
    for (const char* dataset : {"baseline", "easy"}) {
      experiments::ReportCell cell;
      cell.loss = loss;
      cell.dataset = dataset;
      cell.per_seed_f1 = {0.5, 0.6};
      cell.f1_mean = std::string(dataset) == "easy" ? 0.62 : 0.5;
      cell.f1_std = 0.05;
      table.cells.push_back(cell);
    }
  }
  table.config_echo = "[run]\nseeds = 1,2\n";

  const fs::path dir = fresh_dir("textprune_test_report");
  experiments::emit_report(table, experiments::ReportFormat::csv, dir / "r.csv");
  const std::string csv = slurp(dir / "r.csv");
  CHECK(csv.find("loss,dataset,f1_mean,f1_std,n_seeds\n") == 0);
  CHECK(csv.find("ce,baseline,0.500000,0.050000,2\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 rows

  experiments::emit_report(table, experiments::ReportFormat::markdown, dir / "r.md");
  const std::string md = slurp(dir / "r.md");
  CHECK(md.find("| loss | baseline | easy |") != std::string::npos);
  CHECK(md.find("**0.6200") != std::string::npos);  // best cell bolded
  CHECK(md.find("[run]") != std::string::npos);     // config echo included

  // byte-stable re-emission
  experiments::emit_report(table, experiments::ReportFormat::csv, dir / "r2.csv");
  CHECK(slurp(dir / "r.csv") == slurp(dir / "r2.csv"));

  // empty table -> header-only CSV
  experiments::ReportTable empty;
  experiments::emit_report(empty, experiments::ReportFormat::csv, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") == "loss,dataset,f1_mean,f1_std,n_seeds\n");
}

TEST_CASE("grid artifacts round-trip through table_from_artifacts") {
  auto cfg = tiny_synthetic_config();
  cfg.loss_list = {losses::LossKind::cross_entropy, losses::LossKind::hinge};
  cfg.strategies = {pruning::StrategyKind::easy};
  cfg.seeds = {1, 2};
  cfg.output_dir = fresh_dir("textprune_test_artifacts");

  const auto table = experiments::run_grid(cfg);
  CHECK(fs::is_regular_file(cfg.output_dir / "report.csv"));
  CHECK(fs::is_regular_file(cfg.output_dir / "report.md"));
  CHECK(fs::is_regular_file(cfg.output_dir / "config.txt"));
  CHECK(fs::is_regular_file(cfg.output_dir / "cells" / "ce_baseline_1" / "model.json"));
  CHECK(fs::is_regular_file(cfg.output_dir / "cells" / "hinge_easy_2" / "metrics.json"));
  CHECK(fs::is_regular_file(cfg.output_dir / "cells" / "hinge_easy_2" / "selection.json"));
  CHECK(fs::is_regular_file(cfg.output_dir / "cells" / "hinge_easy_2" / "history.csv"));

  const auto rebuilt = experiments::table_from_artifacts(cfg.output_dir);
  REQUIRE(rebuilt.loss_labels == table.loss_labels);
  REQUIRE(rebuilt.dataset_labels == table.dataset_labels);
  REQUIRE(rebuilt.cells.size() == table.cells.size());
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    CHECK(rebuilt.cells[i].per_seed_f1 == table.cells[i].per_seed_f1);
    CHECK(rebuilt.cells[i].f1_mean == table.cells[i].f1_mean);
  }

  // emitting from the rebuilt table reproduces report.csv byte-for-byte
  experiments::emit_report(rebuilt, experiments::ReportFormat::csv,
                           cfg.output_dir / "rebuilt.csv");
  CHECK(slurp(cfg.output_dir / "report.csv") == slurp(cfg.output_dir / "rebuilt.csv"));
}

TEST_CASE("two grid executions produce byte-identical reports") {
  auto cfg = tiny_synthetic_config();
  cfg.loss_list = {losses::LossKind::cross_entropy, losses::LossKind::squared_hinge};
  cfg.strategies = {pruning::StrategyKind::easy, pruning::StrategyKind::random};
  cfg.seeds = {1, 2};

  cfg.output_dir = fresh_dir("textprune_test_det_a");
  experiments::run_grid(cfg);
  const std::string a = slurp(cfg.output_dir / "report.csv");

  cfg.output_dir = fresh_dir("textprune_test_det_b");
  experiments::run_grid(cfg);
  const std::string b = slurp(cfg.output_dir / "report.csv");
  CHECK(a == b);
  CHECK(a.find("loss,dataset,f1_mean,f1_std,n_seeds\n") == 0);
}

TEST_CASE("grid errors carry cell coordinates") {
  auto cfg = tiny_synthetic_config();
  cfg.train.batch_size = 0;  // invalid, fails inside every cell
  CHECK_THROWS_WITH_AS(experiments::run_grid(cfg),
                       doctest::Contains("cell (loss=ce, dataset=baseline, seed=1)"),
                       DataError);

  experiments::ExperimentConfig empty;
  empty.loss_list.clear();
  CHECK_THROWS_AS(experiments::run_grid(empty), ConfigError);
}
