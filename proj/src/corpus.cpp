// SPDX-License-Identifier: Apache-2.0
#include "textprune/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "textprune/csv.hpp"
#include "textprune/errors.hpp"
#include "textprune/rng.hpp"

namespace textprune::corpus {

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string namespaced_id(std::string_view name, std::string_view id) {
  if (name.empty()) return std::string(id);
  std::string out;
  out.reserve(name.size() + 1 + id.size());
  out.append(name);
  out.push_back('/');
  out.append(id);
  return out;
}

}  // namespace

void Dataset::add(Example e) {
  if (e.id.empty()) throw DataError("example id is empty");
  if (trim(e.text).empty()) {
    throw DataError("example '" + e.id + "' has empty text");
  }
  if (!ids_.insert(e.id).second) {
    throw DataError("duplicate example id '" + e.id + "'");
  }
  examples_.push_back(std::move(e));
}

ClassCounts class_counts(const Dataset& d) noexcept {
  ClassCounts c;
  for (const Example& e : d) {
    if (e.label == Label::positive) {
      ++c.positive;
    } else {
      ++c.negative;
    }
  }
  return c;
}

Label parse_label(std::string_view value) {
  if (value == "1" || value == "sarcastic") return Label::positive;
  if (value == "0" || value == "not_sarcastic") return Label::negative;
  throw DataError("unknown label value '" + std::string(value) + "'");
}

std::string strip_sarc_markers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    const std::string_view token = text.substr(start, i - start);
    if (token.empty() || token == "/s") continue;
    if (!out.empty()) out.push_back(' ');
    out.append(token);
  }
  return out;
}

namespace {

Example make_row(std::string_view name, std::string&& id, std::string&& text,
                 std::string_view label_field, Schema schema, Source source,
                 std::size_t line) {
  Example e;
  e.id = namespaced_id(name, id);
  e.text = schema == Schema::sarc ? strip_sarc_markers(text) : std::move(text);
  try {
    e.label = parse_label(trim(label_field));
  } catch (const DataError& err) {
    throw DataError("line " + std::to_string(line) + ": " + err.what());
  }
  e.source = source;
  return e;
}

void add_row(Dataset& d, Example&& e, std::size_t line) {
  try {
    d.add(std::move(e));
  } catch (const DataError& err) {
    throw DataError("line " + std::to_string(line) + ": " + err.what());
  }
}

Dataset load_csv(std::istream& in, Schema schema, std::string_view name,
                 Source source, Dataset d) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields != std::vector<std::string>{"id", "text", "label"}) {
    throw DataError("expected CSV header 'id,text,label'");
  }
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // blank line
    if (rec->fields.size() != 3) {
      throw DataError("line " + std::to_string(rec->line) + ": expected 3 fields, got " +
                      std::to_string(rec->fields.size()));
    }
    Example e = make_row(name, std::move(rec->fields[0]), std::move(rec->fields[1]),
                         rec->fields[2], schema, source, rec->line);
    add_row(d, std::move(e), rec->line);
  }
  return d;
}

Dataset load_jsonl(std::istream& in, Schema schema, std::string_view name,
                   Source source, Dataset d) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + ex.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj.contains("label")) {
      throw DataError("line " + std::to_string(lineno) +
                      ": object must have keys id, text, label");
    }
    if (!obj["id"].is_string() || !obj["text"].is_string()) {
      throw DataError("line " + std::to_string(lineno) + ": id and text must be strings");
    }
    std::string label_field;
    const auto& label = obj["label"];
    if (label.is_number_integer()) {
      label_field = std::to_string(label.get<long long>());
    } else if (label.is_string()) {
      label_field = label.get<std::string>();
    } else {
      throw DataError("line " + std::to_string(lineno) + ": unknown label value");
    }
    Example e = make_row(name, obj["id"].get<std::string>(),
                         obj["text"].get<std::string>(), label_field, schema,
                         source, lineno);
    add_row(d, std::move(e), lineno);
  }
  return d;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                     Schema schema, std::string_view name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  const std::string dataset_name =
      name.empty() ? path.stem().string() : std::string(name);
  Dataset d(dataset_name);
  const Source source = schema == Schema::sarc ? Source::pool : Source::base;
  try {
    return format == FileFormat::csv
               ? load_csv(in, schema, name, source, std::move(d))
               : load_jsonl(in, schema, name, source, std::move(d));
  } catch (const DataError& err) {
    throw DataError(path.string() + ": " + err.what());
  }
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "id,text,label\n";
  for (const Example& e : d) {
    out << csv::escape_field(e.id) << ',' << csv::escape_field(e.text) << ','
        << (e.label == Label::positive ? '1' : '0') << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Dataset augment(const Dataset& base, const Dataset& extra, std::string name) {
  Dataset out(std::move(name));
  out.reserve(base.size() + extra.size());
  for (const Example& e : base) out.add(e);
  for (const Example& e : extra) {
    if (out.contains_id(e.id)) {
      throw DataError("id collision on '" + e.id + "' while augmenting '" +
                      base.name() + "' with '" + extra.name() + "'");
    }
    out.add(e);
  }
  return out;
}

namespace {

void validate(const NoisePoolConfig& cfg) {
  if (cfg.n_base == 0 || cfg.n_pool == 0) {
    throw ConfigError("n_base and n_pool must be positive");
  }
  if (cfg.dim_latent == 0) throw ConfigError("dim_latent must be positive");
  if (!(cfg.separation >= 0.0) || !std::isfinite(cfg.separation)) {
    throw ConfigError("separation must be finite and non-negative");
  }
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 0.1; };
  if (!rate_ok(cfg.false_negative_rate) || !rate_ok(cfg.false_positive_rate)) {
    throw ConfigError("noise rates must lie in [0, 0.1]");
  }
}

// Unit direction along which the class centers separate. Coordinate i gets
// weight proportional to 1/sqrt(i+1): a few strongly informative coordinates
// and a long tail of weak ones, so a scarce model has something left to
// learn from extra data.
std::vector<double> center_direction(std::size_t dim_latent) {
  std::vector<double> u(dim_latent);
  double sq = 0.0;
  for (std::size_t i = 0; i < dim_latent; ++i) {
    u[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
    sq += u[i] * u[i];
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : u) v *= inv;
  return u;
}

// Latent noise is banded: coordinates in a band of kNoiseBand share a common
// factor worth kNoiseShare of their variance. The redundancy means a model
// must learn to down-weight correlated coordinates, which takes more data
// than the scarce base set provides -- extra clean examples genuinely help.
constexpr std::size_t kNoiseBand = 8;
constexpr double kNoiseShare = 0.5;

std::string render_latent_text(const NoisePoolConfig& cfg, Label label,
                               const std::vector<double>& direction, Rng& rng) {
  // Centers sit at +/- (separation/2) * direction, so their Euclidean
  // distance equals cfg.separation. The sign suffix is spelled _p/_n rather
  // than _+/_- so the tokens survive punctuation stripping in the tokenizer.
  const double scale =
      (label == Label::positive ? 0.5 : -0.5) * cfg.separation;
  const double common_sd = std::sqrt(kNoiseShare);
  const double own_sd = std::sqrt(1.0 - kNoiseShare);
  std::string text;
  text.reserve(cfg.dim_latent * 6);
  double band_factor = 0.0;
  for (std::size_t i = 0; i < cfg.dim_latent; ++i) {
    if (i % kNoiseBand == 0) band_factor = rng.next_gauss();
    const double z =
        scale * direction[i] + common_sd * band_factor + own_sd * rng.next_gauss();
    if (!text.empty()) text.push_back(' ');
    text.push_back('f');
    text.append(std::to_string(i));
    text.append(z >= 0.0 ? "_p" : "_n");
  }
  return text;
}

std::string padded_id(std::string_view prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", i);
  std::string id(prefix);
  id.push_back('/');
  id.append(buf);
  return id;
}

Dataset draw_set(const NoisePoolConfig& cfg, std::size_t n, std::uint64_t seed,
                 std::string name) {
  Rng rng(seed);
  Dataset d(name);
  d.reserve(n);
  const std::vector<double> direction = center_direction(cfg.dim_latent);
  for (std::size_t i = 0; i < n; ++i) {
    // Alternating labels keep every drawn set exactly class-balanced, so
    // baseline behavior is not confounded by draw-to-draw class skew.
    const Label label = i % 2 == 0 ? Label::positive : Label::negative;
    Example e;
    e.id = padded_id(name, i);
    e.text = render_latent_text(cfg, label, direction, rng);
    e.label = label;
    e.source = Source::synthetic;
    d.add(std::move(e));
  }
  return d;
}

std::size_t round_half_up(double x) noexcept {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace

SyntheticBundle generate_synthetic(const NoisePoolConfig& config) {
  validate(config);
  SyntheticBundle out;
  out.base = draw_set(config, config.n_base, mix_seed(config.seed, "base"), "base");
  Dataset clean_pool =
      draw_set(config, config.n_pool, mix_seed(config.seed, "pool"), "pool");

  out.clean_pool_labels.reserve(clean_pool.size());
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < clean_pool.size(); ++i) {
    out.clean_pool_labels.push_back(clean_pool[i].label);
    if (clean_pool[i].label == Label::positive) {
      positives.push_back(i);
    } else {
      negatives.push_back(i);
    }
  }

  // Distant-supervision noise: false negatives are positives whose label
  // flips to negative, false positives the reverse. Exact counts, rounded
  // half-up, so the configured rates are hit exactly at round sizes.
  Rng flip_rng(mix_seed(config.seed, "flips"));
  const std::size_t n_fn = std::min(
      positives.size(),
      round_half_up(config.false_negative_rate * static_cast<double>(positives.size())));
  const std::size_t n_fp = std::min(
      negatives.size(),
      round_half_up(config.false_positive_rate * static_cast<double>(negatives.size())));

  std::vector<Label> pool_labels = out.clean_pool_labels;
  for (std::size_t pick : sample_without_replacement(positives.size(), n_fn, flip_rng)) {
    pool_labels[positives[pick]] = Label::negative;
  }
  for (std::size_t pick : sample_without_replacement(negatives.size(), n_fp, flip_rng)) {
    pool_labels[negatives[pick]] = Label::positive;
  }

  out.pool = Dataset("pool");
  out.pool.reserve(clean_pool.size());
  for (std::size_t i = 0; i < clean_pool.size(); ++i) {
    Example e = clean_pool[i];
    e.label = pool_labels[i];
    out.pool.add(std::move(e));
  }
  return out;
}

Dataset generate_clean_set(const NoisePoolConfig& config, std::size_t n,
                           std::uint64_t seed, std::string name) {
  validate(config);
  if (n == 0) throw ConfigError("clean set size must be positive");
  return draw_set(config, n, mix_seed(seed, "clean"), std::move(name));
}

}  // namespace textprune::corpus
