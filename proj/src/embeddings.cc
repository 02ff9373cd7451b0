// Copyright 2026 The cbsdecode Authors. All Rights Reserved.
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
// =============================================================================

#include "cbs/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cbs/errors.h"
#include "cbs/text.h"

namespace cbs {
namespace {

bool IsBlank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

LoadedEmbeddings ParseStream(std::istream& in,
                             const std::set<std::string>* needed,
                             std::size_t dim) {
  LoadedEmbeddings out;
  out.table.dim = dim;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    while (!rest.empty() && IsBlank(rest.front())) rest.remove_prefix(1);
    while (!rest.empty() && IsBlank(rest.back())) rest.remove_suffix(1);
    if (rest.empty()) continue;
    std::size_t cut = 0;
    while (cut < rest.size() && !IsBlank(rest[cut])) ++cut;
    const std::string word = ToLower(rest.substr(0, cut));
    rest.remove_prefix(cut);
    const bool keep = !needed || needed->count(word) > 0;
    if (!keep && out.table.dim != 0) continue;

    values.clear();
    while (true) {
      while (!rest.empty() && IsBlank(rest.front())) rest.remove_prefix(1);
      if (rest.empty()) break;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
      if (ec != std::errc() || (ptr != rest.data() + rest.size() && !IsBlank(*ptr))) {
        throw ParseError("embedding file: bad number for \"" + word + "\"",
                         line_no);
      }
      if (!std::isfinite(v)) {
        throw ParseError("embedding file: non-finite value for \"" + word + "\"",
                         line_no);
      }
      values.push_back(v);
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
    if (out.table.dim == 0) out.table.dim = values.size();
    if (values.size() != out.table.dim || values.empty()) {
      throw ParseError("embedding file: \"" + word + "\" has " +
                           std::to_string(values.size()) + " values, expected " +
                           std::to_string(out.table.dim),
                       line_no);
    }
    if (keep) out.table.vectors.try_emplace(word, values);
  }
  if (needed) {
    for (const auto& w : *needed) {
      if (!out.table.vectors.count(w)) out.missing.push_back(w);
    }
  }
  return out;
}

}  // namespace

const std::vector<double>* EmbeddingTable::Find(std::string_view word) const {
  auto it = vectors.find(word);
  return it == vectors.end() ? nullptr : &it->second;
}

LoadedEmbeddings LoadEmbeddings(const std::string& path,
                                const std::set<std::string>* needed,
                                std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return ParseStream(in, needed, dim);
}

LoadedEmbeddings ParseEmbeddings(std::string_view text,
                                 const std::set<std::string>* needed,
                                 std::size_t dim) {
  std::istringstream in{std::string(text)};
  return ParseStream(in, needed, dim);
}

void SaveEmbeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  char buf[32];
  for (const auto& [word, vec] : table.vectors) {
    out << word;
    for (double v : vec) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

nn::Matrix EmbeddingMatrix(const EmbeddingTable& table, const Vocabulary& vocab) {
  nn::Matrix m(static_cast<Eigen::Index>(table.dim),
               static_cast<Eigen::Index>(vocab.size()));
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    const auto* vec = table.Find(ToLower(vocab.tokens()[k]));
    if (!vec) {
      missing.push_back(vocab.tokens()[k]);
      continue;
    }
    for (std::size_t d = 0; d < table.dim; ++d) {
      m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) = (*vec)[d];
    }
  }
  if (!missing.empty()) {
    throw DataError("vocabulary words missing from embeddings: " +
                    Join(missing, ", "));
  }
  return m;
}

ExpandedModel ExpandVocab(const nn::CaptionModelParams& model,
                          std::string_view word, std::span<const double> vector,
                          std::size_t order) {
  if (model.vocab.Contains(word)) {
    throw DataError("word already in vocabulary: \"" + std::string(word) + "\"");
  }
  if (static_cast<int>(vector.size()) != model.embedding_dim()) {
    throw ContractViolation("expansion vector has " +
                            std::to_string(vector.size()) + " entries, model uses " +
                            std::to_string(model.embedding_dim()));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw ContractViolation("non-finite expansion vector");
  }
  ExpandedModel out{model, {}};
  const Eigen::Index cols = model.embeddings.cols();
  out.model.embeddings.conservativeResize(Eigen::NoChange, cols + 1);
  for (std::size_t d = 0; d < vector.size(); ++d) {
    out.model.embeddings(static_cast<Eigen::Index>(d), cols) = vector[d];
  }
  out.record.word = std::string(word);
  out.record.id = out.model.vocab.Add(std::string(word));
  out.record.order = order;
  return out;
}

std::vector<ManifestEntry> ParseExpansionManifest(std::string_view json_text) {
  try {
    const auto in = nlohmann::json::parse(json_text);
    std::vector<ManifestEntry> out;
    for (const auto& e : in) {
      ManifestEntry entry;
      entry.word = ToLower(e.at("word").get<std::string>());
      entry.source = e.value("source", std::string("embedding-file"));
      if (entry.source != "embedding-file") {
        throw ParseError("unsupported expansion source \"" + entry.source + "\"");
      }
      out.push_back(std::move(entry));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("expansion manifest: ") + e.what());
  }
}

std::vector<ExpansionRecord> ApplyExpansions(nn::CaptionModelParams* model,
                                             std::span<const std::string> words,
                                             const EmbeddingTable& table) {
  std::vector<std::string> missing;
  for (const auto& w : words) {
    if (!model->vocab.Contains(w) && !table.Find(w)) missing.push_back(w);
  }
  if (!missing.empty()) {
    throw DataError("expansion words missing from embeddings: " +
                    Join(missing, ", "));
  }
  std::vector<ExpansionRecord> records;
  for (const auto& w : words) {
    if (model->vocab.Contains(w)) continue;
    auto expanded = ExpandVocab(*model, w, *table.Find(w), records.size());
    *model = std::move(expanded.model);
    records.push_back(std::move(expanded.record));
  }
  return records;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("vector sizes differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<Neighbor> NearestNeighbors(const EmbeddingTable& table,
                                       std::string_view word, std::size_t k) {
  const auto* query = table.Find(word);
  if (!query) {
    throw DataError("word not in embedding table: \"" + std::string(word) + "\"");
  }
  std::vector<Neighbor> all;
  all.reserve(table.vectors.size());
  for (const auto& [w, vec] : table.vectors) {
    if (w == word) continue;
    all.push_back({w, CosineSimilarity(*query, vec)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.word < b.word;
  };
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(keep), all.end(),
                    better);
  all.resize(keep);
  return all;
}

}  // namespace cbs
