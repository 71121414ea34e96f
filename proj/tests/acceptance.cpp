// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Oracles are re-implemented here from scratch, independent
// of both the library and the unit suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "textprune/corpus.hpp"
#include "textprune/experiments.hpp"
#include "textprune/features.hpp"
#include "textprune/linear_model.hpp"
#include "textprune/losses.hpp"
#include "textprune/metrics.hpp"
#include "textprune/pruning.hpp"
#include "textprune/rng.hpp"

using namespace textprune;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += why;
}

losses::LossSpec spec_of(losses::LossKind k) {
  losses::LossSpec s;
  s.kind = k;
  return s;
}

// --------------------------------------------------------------------------
// 1. Loss correctness: finite differences + exact class-weight ratio.
// --------------------------------------------------------------------------
Outcome criterion_losses() {
  Outcome o;
  const double h = 1e-5;
  Rng rng(424242);
  const losses::LossKind kinds[] = {
      losses::LossKind::cross_entropy, losses::LossKind::weighted_cross_entropy,
      losses::LossKind::hinge, losses::LossKind::squared_hinge};
  for (losses::LossKind kind : kinds) {
    const losses::LossSpec spec = spec_of(kind);
    const bool hinge_like = kind == losses::LossKind::hinge ||
                            kind == losses::LossKind::squared_hinge;
    int checked = 0;
    while (checked < 1000) {
      const double s = (rng.next_double() - 0.5) * 20.0;
      const int y = rng.next_double() < 0.5 ? -1 : +1;
      if (hinge_like && std::abs(y * s - 1.0) < 1e-4) continue;
      ++checked;
      const double fd = (losses::loss_value(spec, s + h, y) -
                         losses::loss_value(spec, s - h, y)) /
                        (2.0 * h);
      const double analytic = losses::loss_grad(spec, s, y);
      if (std::abs(analytic - fd) > 1e-6 * std::max(1.0, std::abs(analytic))) {
        fail(o, std::string(losses::loss_label(kind)) + " gradient mismatch at s=" +
                    std::to_string(s) + " y=" + std::to_string(y));
        break;
      }
    }
  }

  const losses::LossSpec ce = spec_of(losses::LossKind::cross_entropy);
  const losses::LossSpec wce = spec_of(losses::LossKind::weighted_cross_entropy);
  for (int i = 0; i < 500; ++i) {
    const double s = (rng.next_double() - 0.5) * 16.0;
    if (losses::loss_value(wce, s, +1) != 0.75 * losses::loss_value(ce, s, +1) ||
        losses::loss_value(wce, s, -1) != 0.25 * losses::loss_value(ce, s, -1)) {
      fail(o, "weighted/plain cross-entropy ratio not exactly 0.75 / 0.25");
      break;
    }
  }
  return o;
}

// --------------------------------------------------------------------------
// 2. Selection oracle equivalence on random pools.
// --------------------------------------------------------------------------
std::vector<pruning::ScoredExample> make_pool(std::size_t n, Rng& rng) {
  std::vector<pruning::ScoredExample> scored;
  scored.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pruning::ScoredExample se;
    se.example.id = "p" + std::to_string(i);
    se.example.text = "t" + std::to_string(i);
    se.example.label =
        rng.next_double() < 0.5 ? corpus::Label::positive : corpus::Label::negative;
    se.example.source = corpus::Source::pool;
    se.logit = (rng.next_double() - 0.5) * 6.0;
    se.predicted =
        se.logit > 0.0 ? corpus::Label::positive : corpus::Label::negative;
    se.correct = se.predicted == se.example.label;
    se.confidence = std::abs(se.logit);
    scored.push_back(std::move(se));
  }
  return scored;
}

std::vector<std::string> selected_ids(const pruning::SelectionResult& r) {
  std::vector<std::string> ids;
  for (const corpus::Example& e : r.subset) ids.push_back(e.id);
  return ids;
}

Outcome criterion_selection_oracle() {
  Outcome o;
  Rng rng(777001);
  for (int trial = 0; trial < 100 && o.pass; ++trial) {
    const std::size_t n = 1 + rng.next_below(1000);
    const auto scored = make_pool(n, rng);
    const std::size_t k = rng.next_below(n + 5);

    // brute-force sort oracle over (confidence, id) pairs
    std::vector<std::pair<double, std::string>> mis;
    for (const auto& se : scored) {
      if (!se.correct) mis.emplace_back(se.confidence, se.example.id);
    }
    auto take_ids = [&](bool ascending) {
      auto sorted = mis;
      std::sort(sorted.begin(), sorted.end(),
                [&](const auto& a, const auto& b) {
                  if (a.first != b.first) {
                    return ascending ? a.first < b.first : a.first > b.first;
                  }
                  return a.second < b.second;
                });
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < std::min(k, sorted.size()); ++i) {
        ids.push_back(sorted[i].second);
      }
      return ids;
    };

    pruning::SelectionStrategy strat;
    strat.k = k;
    strat.kind = pruning::StrategyKind::easy;
    if (selected_ids(pruning::select(scored, strat)) != take_ids(true)) {
      fail(o, "easy mismatch at trial " + std::to_string(trial));
    }
    strat.kind = pruning::StrategyKind::hard;
    if (selected_ids(pruning::select(scored, strat)) != take_ids(false)) {
      fail(o, "hard mismatch at trial " + std::to_string(trial));
    }

    // brute-force sample oracle: the documented forward partial Fisher-Yates
    strat.kind = pruning::StrategyKind::random;
    strat.random_seed = rng.next_u64();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng sampler(strat.random_seed);
    const std::size_t take = std::min(k, n);
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(sampler.next_below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> expected;
    for (std::size_t i : idx) expected.push_back(scored[i].example.id);
    if (selected_ids(pruning::select(scored, strat)) != expected) {
      fail(o, "random mismatch at trial " + std::to_string(trial));
    }
  }
  return o;
}

// --------------------------------------------------------------------------
// 3. Order-statistics invariant over random pools.
// --------------------------------------------------------------------------
Outcome criterion_order_statistics() {
  Outcome o;
  Rng rng(90210);
  for (int trial = 0; trial < 100 && o.pass; ++trial) {
    const std::size_t n = 20 + rng.next_below(600);
    const auto scored = make_pool(n, rng);
    std::size_t mis = 0;
    for (const auto& se : scored) {
      if (!se.correct) ++mis;
    }
    const std::size_t k = mis / 2;  // guarantees 2k <= |misclassified|
    if (k == 0) continue;

    pruning::SelectionStrategy easy{pruning::StrategyKind::easy, k, 0};
    pruning::SelectionStrategy hard{pruning::StrategyKind::hard, k, 0};
    const auto easy_sel = pruning::select(scored, easy);
    const auto hard_sel = pruning::select(scored, hard);
    const auto easy_rep = pruning::selection_report(easy_sel, scored);
    const auto hard_rep = pruning::selection_report(hard_sel, scored);
    if (easy_rep.confidence_max > hard_rep.confidence_min) {
      fail(o, "easy max confidence exceeds hard min at trial " +
                  std::to_string(trial));
    }
    std::set<std::string> easy_ids;
    for (const corpus::Example& e : easy_sel.subset) easy_ids.insert(e.id);
    for (const corpus::Example& e : hard_sel.subset) {
      if (easy_ids.count(e.id)) {
        fail(o, "easy and hard overlap at trial " + std::to_string(trial));
        break;
      }
    }

    pruning::SelectionStrategy next{pruning::StrategyKind::easy, k + 1, 0};
    const auto bigger = selected_ids(pruning::select(scored, next));
    const auto smaller = selected_ids(easy_sel);
    if (!std::equal(smaller.begin(), smaller.end(), bigger.begin())) {
      fail(o, "easy(k) is not a prefix of easy(k+1) at trial " +
                  std::to_string(trial));
    }
  }
  return o;
}

// --------------------------------------------------------------------------
// 4. Metrics against a brute-force pairwise counter.
// --------------------------------------------------------------------------
Outcome criterion_metrics() {
  Outcome o;
  Rng rng(5150);
  for (int trial = 0; trial < 100 && o.pass; ++trial) {
    const std::size_t n = 1 + rng.next_below(10000);
    std::vector<corpus::Label> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.next_double() < 0.35 ? corpus::Label::positive
                                      : corpus::Label::negative;
      g[i] = rng.next_double() < 0.25 ? corpus::Label::positive
                                      : corpus::Label::negative;
    }
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pp = p[i] == corpus::Label::positive;
      const bool gp = g[i] == corpus::Label::positive;
      tp += pp && gp;
      fp += pp && !gp;
      fn += !pp && gp;
    }
    double precision = 0, recall = 0, f1 = 0;
    if (tp + fp > 0) precision = tp / (tp + fp);
    if (tp + fn > 0) recall = tp / (tp + fn);
    if (precision + recall > 0) f1 = 2 * precision * recall / (precision + recall);

    const auto s = metrics::scores(metrics::confusion(p, g));
    if (s.precision != precision || s.recall != recall || s.f1 != f1) {
      fail(o, "metrics mismatch at trial " + std::to_string(trial));
    }
  }

  // degenerate 0/0 cases return 0
  metrics::ConfusionMatrix cm;
  cm.tn = 10;
  const auto s = metrics::scores(cm);
  if (s.precision != 0.0 || s.recall != 0.0 || s.f1 != 0.0) {
    fail(o, "0/0 convention violated");
  }
  return o;
}

// --------------------------------------------------------------------------
// 5. Trainer correctness: zero lr, analytic step, separable convergence.
// --------------------------------------------------------------------------
corpus::Dataset tiny_docs(std::vector<std::pair<std::string, corpus::Label>> rows) {
  corpus::Dataset d("d");
  std::size_t i = 0;
  for (auto& [text, label] : rows) {
    d.add(corpus::Example{"e" + std::to_string(i++), std::move(text), label,
                          corpus::Source::base});
  }
  return d;
}

Outcome criterion_trainer() {
  Outcome o;

  // (a) base_lr = 0 leaves the model at zero-initialization
  {
    const auto d = tiny_docs({{"alpha beta", corpus::Label::positive},
                              {"gamma delta", corpus::Label::negative}});
    const auto v = features::Vectorizer::fit(d, 256);
    model::TrainConfig cfg;
    cfg.base_lr = 0.0;
    const auto r = model::train(d, v, spec_of(losses::LossKind::cross_entropy), cfg);
    for (double w : r.model.weights) {
      if (w != 0.0) {
        fail(o, "zero-lr training moved a weight");
        break;
      }
    }
    if (r.model.bias != 0.0) fail(o, "zero-lr training moved the bias");
  }

  // (b) one full-batch step vs the analytic mean-loss gradient, dim 2
  {
    const auto d = tiny_docs({{"aa", corpus::Label::positive},
                              {"bb", corpus::Label::negative},
                              {"aa bb", corpus::Label::positive}});
    const auto v = features::Vectorizer::fit(d, 2);
    const double lr = 0.4;
    model::TrainConfig cfg;
    cfg.base_lr = lr;
    cfg.warmup_steps = 0;
    cfg.weight_decay = 0.0;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    const auto r = model::train(d, v, spec_of(losses::LossKind::cross_entropy), cfg);

    std::vector<double> expected_w(2, 0.0);
    double expected_b = 0.0;
    for (const corpus::Example& e : d) {
      const double y = e.label == corpus::Label::positive ? 1.0 : -1.0;
      const double g = -y * 0.5;  // d/ds ln(1+exp(-ys)) at s = 0
      for (const auto& [idx, val] : v.transform(e.text).entries) {
        expected_w[idx] -= lr * g * val / 3.0;
      }
      expected_b -= lr * g / 3.0;
    }
    for (std::size_t i = 0; i < 2; ++i) {
      if (std::abs(r.model.weights[i] - expected_w[i]) > 1e-12) {
        fail(o, "analytic step mismatch on weight " + std::to_string(i));
      }
    }
    if (std::abs(r.model.bias - expected_b) > 1e-12) {
      fail(o, "analytic step mismatch on bias");
    }
  }

  // (c) separable 200-point set reaches train F1 = 1.0 at defaults
  {
    corpus::Dataset d("separable");
    for (std::size_t i = 0; i < 200; ++i) {
      const bool is_pos = i % 2 == 0;
      const std::string cls = is_pos ? "pos" : "neg";
      d.add(corpus::Example{
          "s" + std::to_string(i),
          cls + "mark " + cls + std::to_string(i % 5) + " " + cls +
              std::to_string((i / 5) % 5),
          is_pos ? corpus::Label::positive : corpus::Label::negative,
          corpus::Source::synthetic});
    }
    const auto v = features::Vectorizer::fit(d, 1 << 12);
    model::TrainConfig cfg;  // defaults: batch 32, wd 0.01, warmup 500, 5 epochs
    cfg.seed = 1;
    const auto r = model::train(d, v, spec_of(losses::LossKind::cross_entropy), cfg);
    std::vector<corpus::Label> preds, gold;
    for (const corpus::Example& e : d) {
      preds.push_back(model::predict(r.model, v.transform(e.text)));
      gold.push_back(e.label);
    }
    const double f1 = metrics::f1(metrics::confusion(preds, gold));
    if (f1 != 1.0) fail(o, "separable training F1 = " + std::to_string(f1));
    if (r.history.epoch_loss.back() >= r.history.epoch_loss.front()) {
      fail(o, "epoch loss did not decrease on separable data");
    }
  }
  return o;
}

// --------------------------------------------------------------------------
// 6. Scarce-regime trend on the canonical synthetic scenario.
// --------------------------------------------------------------------------
Outcome criterion_trend(std::string& summary) {
  Outcome o;
  experiments::ExperimentConfig cfg = experiments::canonical_synthetic_config();
  cfg.loss_list = {losses::LossKind::cross_entropy};
  cfg.strategies = {pruning::StrategyKind::easy, pruning::StrategyKind::hard};
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);

  const auto table = experiments::run_grid(cfg);
  const double baseline = table.cell(0, 0).f1_mean;
  const double easy = table.cell(0, 1).f1_mean;
  const double hard = table.cell(0, 2).f1_mean;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "baseline=%.4f easy=%.4f hard=%.4f", baseline,
                easy, hard);
  summary = buf;

  if (baseline < 0.6 || baseline > 0.85) {
    fail(o, "baseline F1 outside [0.6, 0.85]: " + std::to_string(baseline));
  }
  if (easy < baseline) {
    fail(o, "easy mean F1 below baseline");
  }
  if (easy <= hard + 0.02) {
    fail(o, "easy mean F1 does not exceed hard by 0.02");
  }
  return o;
}

// --------------------------------------------------------------------------
// 7. Byte-identical grid reports across two executions.
// --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  Outcome o;
  experiments::ExperimentConfig cfg = experiments::canonical_synthetic_config();
  cfg.loss_list = {losses::LossKind::cross_entropy,
                   losses::LossKind::weighted_cross_entropy,
                   losses::LossKind::hinge, losses::LossKind::squared_hinge};
  cfg.strategies = {pruning::StrategyKind::easy, pruning::StrategyKind::hard,
                    pruning::StrategyKind::random};
  cfg.seeds = {1, 2, 3};

  const fs::path dir_a = fs::temp_directory_path() / "textprune_accept_grid_a";
  const fs::path dir_b = fs::temp_directory_path() / "textprune_accept_grid_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  cfg.output_dir = dir_a;
  const auto table_a = experiments::run_grid(cfg);
  cfg.output_dir = dir_b;
  const auto table_b = experiments::run_grid(cfg);

  if (table_a.cells.size() != 16) {
    fail(o, "expected a 4x4 grid, got " + std::to_string(table_a.cells.size()) +
                " cells");
  }
  const std::string a = slurp(dir_a / "report.csv");
  const std::string b = slurp(dir_b / "report.csv");
  if (a.empty() || a != b) fail(o, "report.csv differs between executions");
  if (slurp(dir_a / "report.md") != slurp(dir_b / "report.md")) {
    fail(o, "report.md differs between executions");
  }
  return o;
}

// --------------------------------------------------------------------------
// 8. Bundled fixture checks.
// --------------------------------------------------------------------------
Outcome criterion_fixtures() {
  Outcome o;
  const fs::path data_dir(TEXTPRUNE_DATA_DIR);
  const auto fixture =
      corpus::load_dataset(data_dir / "isarcasm_ratio.csv",
                           corpus::FileFormat::csv, corpus::Schema::generic);
  const auto counts = corpus::class_counts(fixture);
  if (counts.positive != 777 || counts.negative != 3707) {
    fail(o, "fixture class counts are (" + std::to_string(counts.positive) + ", " +
                std::to_string(counts.negative) + ")");
  }

  const auto sarc = corpus::load_dataset(data_dir / "sarc_sample.csv",
                                         corpus::FileFormat::csv,
                                         corpus::Schema::sarc);
  for (const corpus::Example& e : sarc) {
    std::istringstream words(e.text);
    std::string token;
    while (words >> token) {
      if (token == "/s") {
        fail(o, "standalone /s survived in '" + e.id + "'");
      }
    }
  }
  if (sarc.empty()) fail(o, "sarc sample fixture is empty");
  return o;
}

struct Criterion {
  const char* name;
  double budget_seconds;  // 0 = no budget
  Outcome outcome;
  double elapsed = 0.0;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria;
  std::string trend_summary;

  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::pair<Outcome, double>(
        o, std::chrono::duration<double>(t1 - t0).count());
  };

  const struct {
    const char* name;
    double budget;
    std::function<Outcome()> fn;
  } specs[] = {
      {"loss gradients match finite differences; wce ratio exact", 1.0,
       criterion_losses},
      {"easy/hard/random selections match brute-force oracles", 5.0,
       criterion_selection_oracle},
      {"order statistics: easy below hard, prefix property", 0.0,
       criterion_order_statistics},
      {"metrics match the brute-force pairwise counter", 0.0, criterion_metrics},
      {"trainer: zero-lr identity, analytic step, separable F1=1", 0.0,
       criterion_trainer},
      {"scarce-regime trend: easy >= baseline, easy > hard + 0.02", 300.0,
       [&] { return criterion_trend(trend_summary); }},
      {"full 4x4x3 grid is byte-identical across executions", 600.0,
       criterion_determinism},
      {"bundled fixtures: class counts and /s stripping", 0.0,
       criterion_fixtures},
  };

  bool all_pass = true;
  int index = 0;
  for (const auto& spec : specs) {
    ++index;
    auto [outcome, elapsed] = timed(spec.fn);
    if (spec.budget > 0.0 && elapsed > spec.budget) {
      fail(outcome, "runtime " + std::to_string(elapsed) + "s over budget " +
                        std::to_string(spec.budget) + "s");
    }
    all_pass = all_pass && outcome.pass;
    std::printf("[%s] %d. %s (%.2fs)", outcome.pass ? "PASS" : "FAIL", index,
                spec.name, elapsed);
    if (index == 6 && !trend_summary.empty()) {
      std::printf(" [%s]", trend_summary.c_str());
    }
    if (!outcome.pass) std::printf(" -- %s", outcome.detail.c_str());
    std::printf("\n");
  }
  return all_pass ? 0 : 1;
}
