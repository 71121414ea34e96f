// SPDX-License-Identifier: Apache-2.0
#include "textprune/pruning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "textprune/csv.hpp"
#include "textprune/errors.hpp"
#include "textprune/rng.hpp"

namespace textprune::pruning {

namespace {

ScoredExample score_one(const corpus::Example& e, double s) {
  ScoredExample se;
  se.example = e;
  se.logit = s;
  se.predicted = s > 0.0 ? corpus::Label::positive : corpus::Label::negative;
  se.correct = se.predicted == e.label;
  se.confidence = std::abs(s);
  return se;
}

}  // namespace

std::vector<ScoredExample> score_pool(const model::LinearModel& teacher,
                                      const features::Vectorizer& v,
                                      const corpus::Dataset& pool) {
  if (teacher.dim() != v.dim()) {
    throw DataError("teacher dim " + std::to_string(teacher.dim()) +
                    " does not match vectorizer dim " + std::to_string(v.dim()));
  }
  std::vector<ScoredExample> scored;
  scored.reserve(pool.size());
  for (const corpus::Example& e : pool) {
    scored.push_back(score_one(e, model::logit(teacher, v.transform(e.text))));
  }
  return scored;
}

std::vector<ScoredExample> import_scores(const corpus::Dataset& pool,
                                         const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields != std::vector<std::string>{"id", "logit"}) {
    throw DataError(path.string() + ": expected CSV header 'id,logit'");
  }

  std::unordered_map<std::string, double> logits;
  logits.reserve(pool.size());
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;
    if (rec->fields.size() != 2) {
      throw DataError(path.string() + ": line " + std::to_string(rec->line) +
                      ": expected 2 fields");
    }
    const std::string& id = rec->fields[0];
    const std::string& value = rec->fields[1];
    double s = 0.0;
    const auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), s);
    if (ec != std::errc{} || ptr != value.data() + value.size() ||
        !std::isfinite(s)) {
      throw DataError(path.string() + ": line " + std::to_string(rec->line) +
                      ": non-numeric logit '" + value + "'");
    }
    if (!pool.contains_id(id)) {
      throw DataError(path.string() + ": id '" + id + "' is not in the pool");
    }
    if (!logits.emplace(id, s).second) {
      throw DataError(path.string() + ": duplicate id '" + id + "'");
    }
  }

  std::vector<ScoredExample> scored;
  scored.reserve(pool.size());
  for (const corpus::Example& e : pool) {
    const auto it = logits.find(e.id);
    if (it == logits.end()) {
      throw DataError(path.string() + ": missing logit for pool id '" + e.id + "'");
    }
    scored.push_back(score_one(e, it->second));
  }
  return scored;
}

SelectionResult select(std::span<const ScoredExample> scored,
                       const SelectionStrategy& strategy) {
  SelectionResult result;
  result.kind = strategy.kind;
  result.requested = strategy.k;

  std::vector<std::size_t> candidates;
  if (strategy.kind == StrategyKind::random) {
    candidates.resize(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) candidates[i] = i;
  } else {
    // Only the teacher's misclassifications are difficulty-ordered;
    // correctly classified pool examples are never eligible for easy/hard.
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (!scored[i].correct) candidates.push_back(i);
    }
  }
  result.eligible = candidates.size();
  const std::size_t take = std::min(strategy.k, candidates.size());
  result.shortfall = candidates.size() < strategy.k;

  if (strategy.kind == StrategyKind::random) {
    Rng rng(strategy.random_seed);
    std::vector<std::size_t> picked =
        sample_without_replacement(candidates.size(), take, rng);
    std::sort(picked.begin(), picked.end());  // subset keeps pool order
    candidates = std::move(picked);
  } else {
    const bool ascending = strategy.kind == StrategyKind::easy;
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t a, std::size_t b) {
                const ScoredExample& sa = scored[a];
                const ScoredExample& sb = scored[b];
                if (sa.confidence != sb.confidence) {
                  return ascending ? sa.confidence < sb.confidence
                                   : sa.confidence > sb.confidence;
                }
                return sa.example.id < sb.example.id;  // total order, no ties
              });
    candidates.resize(take);
  }

  result.subset = corpus::Dataset(std::string(strategy_label(strategy.kind)));
  result.subset.reserve(take);
  for (std::size_t i : candidates) result.subset.add(scored[i].example);
  return result;
}

SelectionReport selection_report(const SelectionResult& result,
                                 std::span<const ScoredExample> scored) {
  std::unordered_map<std::string_view, const ScoredExample*> by_id;
  by_id.reserve(scored.size());
  for (const ScoredExample& se : scored) by_id.emplace(se.example.id, &se);

  SelectionReport report;
  report.kind = result.kind;
  report.requested = result.requested;
  report.selected = result.subset.size();
  report.eligible = result.eligible;
  report.shortfall = result.shortfall;
  report.empty = result.subset.empty();

  double sum = 0.0;
  bool first = true;
  for (const corpus::Example& e : result.subset) {
    const auto it = by_id.find(e.id);
    if (it == by_id.end()) {
      throw DataError("subset example '" + e.id + "' is not in the scored list");
    }
    const ScoredExample& se = *it->second;
    if (e.label == corpus::Label::positive) {
      ++report.n_positive;
    } else {
      ++report.n_negative;
    }
    sum += se.confidence;
    if (first || se.confidence < report.confidence_min) {
      report.confidence_min = se.confidence;
    }
    if (first || se.confidence > report.confidence_max) {
      report.confidence_max = se.confidence;
    }
    first = false;
  }
  if (!result.subset.empty()) {
    report.confidence_mean = sum / static_cast<double>(result.subset.size());
  }
  return report;
}

StrategyKind parse_strategy(std::string_view token) {
  if (token == "easy") return StrategyKind::easy;
  if (token == "hard") return StrategyKind::hard;
  if (token == "random") return StrategyKind::random;
  throw ConfigError("unknown strategy '" + std::string(token) +
                    "' (expected easy|hard|random)");
}

std::string_view strategy_label(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::easy: return "easy";
    case StrategyKind::hard: return "hard";
    case StrategyKind::random: return "random";
  }
  return "?";
}

void write_scores_csv(std::span<const ScoredExample> scored,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "id,logit\n";
  char buf[64];
  for (const ScoredExample& se : scored) {
    std::snprintf(buf, sizeof(buf), ",%.17g\n", se.logit);
    out << csv::escape_field(se.example.id) << buf;
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace textprune::pruning
