// SPDX-License-Identifier: Apache-2.0
#include "textprune/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "textprune/errors.hpp"
#include "textprune/rng.hpp"

namespace textprune::features {

namespace {

bool is_unicode_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_strippable_punct(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
           (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
  }
  switch (cp) {
    case 0x00A1: case 0x00BF:               // inverted ! ?
    case 0x2013: case 0x2014:               // en/em dash
    case 0x2026:                            // ellipsis
      return true;
    default:
      return cp >= 0x2018 && cp <= 0x201F;  // curly quotes
  }
}

bool is_emoji(char32_t cp) noexcept {
  return (cp >= 0x1F300 && cp <= 0x1F5FF) ||  // pictographs
         (cp >= 0x1F600 && cp <= 0x1F64F) ||  // emoticons
         (cp >= 0x1F680 && cp <= 0x1F6FF) ||  // transport
         (cp >= 0x1F900 && cp <= 0x1F9FF) ||  // supplemental symbols
         (cp >= 0x1FA70 && cp <= 0x1FAFF) ||  // extended-A
         (cp >= 0x1F1E6 && cp <= 0x1F1FF) ||  // regional indicators
         (cp >= 0x2600 && cp <= 0x26FF) ||    // misc symbols
         (cp >= 0x2700 && cp <= 0x27BF);      // dingbats
}

// Decodes one code point, advancing i. Invalid sequences yield U+FFFD and
// advance a single byte, which keeps tokenization total and deterministic.
char32_t decode_utf8(std::string_view s, std::size_t& i) noexcept {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++i;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string finish_token(std::vector<char32_t>& cps) {
  std::size_t start = 0;
  std::size_t end = cps.size();
  while (start < end && is_strippable_punct(cps[start]) && cps[start] != '#' &&
         cps[start] != '@') {
    ++start;
  }
  while (end > start && is_strippable_punct(cps[end - 1])) --end;
  std::string token;
  for (std::size_t i = start; i < end; ++i) encode_utf8(cps[i], token);
  cps.clear();
  return token;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<char32_t> current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string token = finish_token(current);
    if (!token.empty()) tokens.push_back(std::move(token));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = decode_utf8(text, i);
    if (is_unicode_space(cp)) {
      flush();
      continue;
    }
    if (cp == 0xFE0E || cp == 0xFE0F) continue;  // variation selectors
    if (is_emoji(cp)) {
      flush();
      std::string emoji;
      encode_utf8(cp, emoji);
      tokens.push_back(std::move(emoji));
      continue;
    }
    if (cp < 0x80 && cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    current.push_back(cp);
  }
  flush();
  return tokens;
}

namespace {

// Collects the bucket counts of all unigrams and bigrams of a text.
void accumulate_buckets(std::string_view text, std::size_t mask,
                        std::unordered_map<std::uint32_t, std::size_t>& counts) {
  const std::vector<std::string> tokens = tokenize(text);
  std::string joined;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    counts[static_cast<std::uint32_t>(fnv1a64(tokens[i]) & mask)]++;
    if (i + 1 < tokens.size()) {
      joined.clear();
      joined.append(tokens[i]);
      joined.push_back(kNgramJoin);
      joined.append(tokens[i + 1]);
      counts[static_cast<std::uint32_t>(fnv1a64(joined) & mask)]++;
    }
  }
}

void check_dim(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw ConfigError("feature dimension must be a power of two, got " +
                      std::to_string(dim));
  }
  if (dim > (std::size_t{1} << 31)) {
    throw ConfigError("feature dimension too large");
  }
}

}  // namespace

Vectorizer Vectorizer::fit(const corpus::Dataset& corpus, std::size_t dim) {
  check_dim(dim);
  if (corpus.empty()) {
    throw DataError("cannot fit a vectorizer on an empty corpus");
  }
  Vectorizer v;
  v.dim_ = dim;
  v.n_documents_ = corpus.size();

  const std::size_t mask = dim - 1;
  std::unordered_map<std::uint32_t, std::size_t> df;
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (const corpus::Example& e : corpus) {
    counts.clear();
    accumulate_buckets(e.text, mask, counts);
    for (const auto& [bucket, _] : counts) df[bucket]++;
  }

  const double n = static_cast<double>(corpus.size());
  v.idf_.reserve(df.size());
  for (const auto& [bucket, count] : df) {
    v.idf_.emplace(bucket,
                   std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return v;
}

double Vectorizer::idf(std::uint32_t bucket) const noexcept {
  const auto it = idf_.find(bucket);
  return it == idf_.end() ? 1.0 : it->second;
}

std::uint32_t Vectorizer::bucket_of(std::string_view ngram) const noexcept {
  return static_cast<std::uint32_t>(fnv1a64(ngram) & (dim_ - 1));
}

FeatureVector Vectorizer::transform(std::string_view text) const {
  std::unordered_map<std::uint32_t, std::size_t> counts;
  accumulate_buckets(text, dim_ - 1, counts);

  FeatureVector out;
  out.entries.reserve(counts.size());
  for (const auto& [bucket, count] : counts) {
    out.entries.emplace_back(bucket, static_cast<double>(count) * idf(bucket));
  }
  std::sort(out.entries.begin(), out.entries.end());

  double sq = 0.0;
  for (const auto& [_, w] : out.entries) sq += w * w;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [_, w] : out.entries) w *= inv;
  }
  return out;
}

void Vectorizer::save(const std::filesystem::path& path) const {
  std::vector<std::pair<std::uint32_t, double>> sorted(idf_.begin(), idf_.end());
  std::sort(sorted.begin(), sorted.end());

  nlohmann::json j;
  j["format"] = "textprune.vectorizer.v1";
  j["dim"] = dim_;
  j["documents"] = n_documents_;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [bucket, value] : sorted) {
    entries.push_back(nlohmann::json::array({bucket, value}));
  }
  j["idf"] = std::move(entries);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump() << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Vectorizer Vectorizer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(path.string() + ": malformed vectorizer file: " + ex.what());
  }
  if (!j.is_object() || j.value("format", "") != "textprune.vectorizer.v1") {
    throw DataError(path.string() + ": not a textprune.vectorizer.v1 file");
  }
  Vectorizer v;
  v.dim_ = j.at("dim").get<std::size_t>();
  check_dim(v.dim_);
  v.n_documents_ = j.at("documents").get<std::size_t>();
  for (const auto& entry : j.at("idf")) {
    const auto bucket = entry.at(0).get<std::uint32_t>();
    const auto value = entry.at(1).get<double>();
    if (bucket >= v.dim_ || value < 0.0) {
      throw DataError(path.string() + ": invalid idf entry");
    }
    v.idf_.emplace(bucket, value);
  }
  return v;
}

}  // namespace textprune::features
