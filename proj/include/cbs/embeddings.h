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

#ifndef CBS_EMBEDDINGS_H_
#define CBS_EMBEDDINGS_H_

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/caption_model.h"

namespace cbs {

inline constexpr std::size_t kEmbeddingDim = 300;

// Pretrained word vectors keyed by lower-cased surface form.
struct EmbeddingTable {
  std::size_t dim = kEmbeddingDim;
  std::map<std::string, std::vector<double>, std::less<>> vectors;

  const std::vector<double>* Find(std::string_view word) const;
};

struct LoadedEmbeddings {
  EmbeddingTable table;
  // Needed words that the file did not contain, sorted.
  std::vector<std::string> missing;
};

// Streams a text file of `word v1 ... v_dim` lines. With `needed`, keeps
// only those words (lower-cased match) and reports the rest as missing;
// without it keeps everything. `dim` 0 takes the width of the first line.
// A line with the wrong number of values raises ParseError with its line
// number. Later duplicates of a word are ignored.
LoadedEmbeddings LoadEmbeddings(const std::string& path,
                                const std::set<std::string>* needed = nullptr,
                                std::size_t dim = kEmbeddingDim);
LoadedEmbeddings ParseEmbeddings(std::string_view text,
                                 const std::set<std::string>* needed = nullptr,
                                 std::size_t dim = kEmbeddingDim);

// Writes with enough digits to round-trip every double exactly.
void SaveEmbeddings(const EmbeddingTable& table, const std::string& path);

// D x |V| matrix with the vector of vocab word i in column i. Words the
// table lacks raise DataError listing all of them.
nn::Matrix EmbeddingMatrix(const EmbeddingTable& table, const Vocabulary& vocab);

struct ExpansionRecord {
  std::string word;
  TokenId id = 0;
  // 0-based position among the expansions applied to one model.
  std::size_t order = 0;
};

struct ExpandedModel {
  nn::CaptionModelParams model;
  ExpansionRecord record;
};

// Appends `vector` as a new embedding column and `word` at id |V|. Nothing
// else changes. Throws DataError for a word already in the vocabulary and
// ContractViolation for a wrong-sized or non-finite vector.
ExpandedModel ExpandVocab(const nn::CaptionModelParams& model,
                          std::string_view word, std::span<const double> vector,
                          std::size_t order = 0);

// Expansion manifest: [{"word": "racket", "source": "embedding-file"}, ...]
struct ManifestEntry {
  std::string word;
  std::string source = "embedding-file";
};
std::vector<ManifestEntry> ParseExpansionManifest(std::string_view json_text);

// Expands every manifest word not yet in the vocabulary, in manifest order.
// Words missing from `table` raise DataError listing them.
std::vector<ExpansionRecord> ApplyExpansions(
    nn::CaptionModelParams* model, std::span<const std::string> words,
    const EmbeddingTable& table);

struct Neighbor {
  std::string word;
  double similarity = 0.0;
};

double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// Top-k by cosine similarity, excluding the query; equal similarities are
// ordered by word. Throws DataError when `word` is not in the table.
std::vector<Neighbor> NearestNeighbors(const EmbeddingTable& table,
                                       std::string_view word, std::size_t k);

}  // namespace cbs

#endif  // CBS_EMBEDDINGS_H_
