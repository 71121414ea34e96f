// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "textprune/corpus.hpp"
#include "textprune/linear_model.hpp"
#include "textprune/losses.hpp"
#include "textprune/metrics.hpp"
#include "textprune/pruning.hpp"

namespace textprune::experiments {

struct DataFile {
  std::filesystem::path path;
  corpus::FileFormat format = corpus::FileFormat::csv;
  corpus::Schema schema = corpus::Schema::generic;
};

/// Full description of a benchmark run: data sources, selection strategies,
/// losses, trainer settings, seeds, and where to put artifacts.
struct ExperimentConfig {
  // Data either comes from files or from the synthetic generator.
  std::optional<DataFile> base_file;
  std::optional<DataFile> pool_file;
  std::optional<DataFile> test_file;
  std::optional<corpus::NoisePoolConfig> synthetic;
  std::size_t synthetic_test_size = 1000;
  /// When > 0 and no test file is given, this fraction of the base set is
  /// held out as the test split.
  double holdout_fraction = 0.0;

  std::size_t feature_dim = features::kDefaultDim;

  bool include_baseline = true;
  std::vector<pruning::StrategyKind> strategies;
  std::size_t selection_k = 10000;

  std::vector<losses::LossKind> loss_list;
  double loss_w_positive = 0.75;  ///< consulted by wce losses in the grid
  double loss_w_negative = 0.25;
  losses::LossKind teacher_loss = losses::LossKind::cross_entropy;

  model::TrainConfig train;
  std::vector<std::uint64_t> seeds{1};

  std::filesystem::path output_dir;  ///< empty = no artifacts written
};

/// Flat `key = value` config file with [section] headers; see the README for
/// the key list. Unknown keys throw ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override (the CLI's --set flag).
void apply_override(ExperimentConfig& cfg, std::string_view key,
                    std::string_view value);

/// Canonical serialization of a config, echoed into reports.
std::string format_config(const ExperimentConfig& cfg);

/// The synthetic scarce-base benchmark: a small clean base set, a large noisy
/// pool at the real corpora's noise rates, and a separation tuned so the
/// baseline lands mid-range. Strategies, losses, and seeds are left for the
/// caller.
ExperimentConfig canonical_synthetic_config();

struct CellOutcome {
  double f1 = 0.0;
  metrics::Scores scores;
  metrics::ConfusionMatrix cm;
  std::optional<pruning::SelectionReport> selection;
  std::size_t train_size = 0;
  model::TrainHistory history;  ///< final model's history
};

/// One experiment cell:
///   1. materialize (base, pool, test) for this seed;
///   2. fit a vectorizer on base only and train the teacher with teacher_loss;
///   3. score the pool and select per strategy (teacher, scoring, and
///      selection are all skipped for the baseline cell, strategy == nullopt);
///   4. augment base with the selection;
///   5. fit the final vectorizer on the augmented set, train with `loss`;
///   6. evaluate positive-class F1 on the test set.
/// Stage seeds derive from (seed, stage tag) via mix_seed: "synth", "split",
/// "teacher", "select", "final" -- so cells are independently reproducible
/// and the baseline is untouched by pool or strategy changes. The strategy's
/// own random_seed field is ignored here in favor of mix_seed(seed,
/// "select"). Stage errors are rethrown naming the stage.
CellOutcome run_cell(const ExperimentConfig& cfg,
                     const std::optional<pruning::SelectionStrategy>& strategy,
                     const losses::LossSpec& loss, std::uint64_t seed);

struct ReportCell {
  std::string loss;
  std::string dataset;
  std::vector<double> per_seed_f1;  ///< in cfg.seeds order
  double f1_mean = 0.0;
  double f1_std = 0.0;  ///< sample standard deviation; 0 when < 2 seeds
  std::vector<pruning::SelectionReport> per_seed_selection;
};

/// Loss x dataset grid of mean/std F1 over seeds.
struct ReportTable {
  std::vector<std::string> loss_labels;
  std::vector<std::string> dataset_labels;
  std::vector<ReportCell> cells;  ///< row-major: loss outer, dataset inner
  std::string config_echo;

  const ReportCell& cell(std::size_t row, std::size_t col) const {
    return cells[row * dataset_labels.size() + col];
  }
};

/// Runs every (loss, dataset column, seed) cell and aggregates. Columns are
/// the baseline (when enabled) followed by the configured strategies. Cell
/// errors abort the grid naming the cell coordinates. When cfg.output_dir is
/// set, per-cell artifacts land in cells/<loss>_<dataset>_<seed>/ and the
/// aggregate report.csv / report.md / config.txt at the top level.
ReportTable run_grid(const ExperimentConfig& cfg);

enum class ReportFormat : std::uint8_t { csv, markdown };

/// CSV: `loss,dataset,f1_mean,f1_std,n_seeds`. Markdown: a loss x dataset
/// grid, best cell bolded, config echo appended. Byte-stable for identical
/// tables.
void emit_report(const ReportTable& table, ReportFormat format,
                 const std::filesystem::path& path);

/// Rebuilds a ReportTable from the metrics.json files under
/// <output_dir>/cells; used by the `report` subcommand.
ReportTable table_from_artifacts(const std::filesystem::path& output_dir);

}  // namespace textprune::experiments
