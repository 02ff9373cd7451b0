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

#include "cbs/text.h"

#include <fstream>
#include <sstream>

#include "cbs/errors.h"

namespace cbs {
namespace {

// Decodes one UTF-8 code point at `pos` and advances it. Invalid bytes come
// back as themselves so they pass through untouched.
char32_t NextCodePoint(std::string_view s, std::size_t* pos, std::size_t* len) {
  const auto b0 = static_cast<unsigned char>(s[*pos]);
  std::size_t n = 1;
  char32_t cp = b0;
  if (b0 >= 0xC0 && b0 < 0xE0) {
    n = 2;
    cp = b0 & 0x1F;
  } else if (b0 >= 0xE0 && b0 < 0xF0) {
    n = 3;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xF0 && b0 < 0xF8) {
    n = 4;
    cp = b0 & 0x07;
  }
  if (n > 1) {
    if (*pos + n > s.size()) {
      n = 1;
      cp = b0;
    } else {
      for (std::size_t k = 1; k < n; ++k) {
        const auto b = static_cast<unsigned char>(s[*pos + k]);
        if ((b & 0xC0) != 0x80) {
          n = 1;
          cp = b0;
          break;
        }
        cp = (cp << 6) | (b & 0x3F);
      }
    }
  }
  *len = n;
  *pos += n;
  return cp;
}

bool IsSpace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Simple case mapping for ASCII, Latin-1, Greek and basic Cyrillic.
char32_t LowerCodePoint(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

void AppendUtf8(char32_t cp, std::string* out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::string ToLower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    std::size_t len = 0;
    const char32_t cp = NextCodePoint(text, &pos, &len);
    const char32_t lower = LowerCodePoint(cp);
    if (lower == cp) {
      out.append(text.substr(start, len));
    } else {
      AppendUtf8(lower, &out);
    }
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  while (pos < line.size()) {
    const std::size_t start = pos;
    std::size_t len = 0;
    const char32_t cp = NextCodePoint(line, &pos, &len);
    if (IsSpace(cp)) {
      if (word_start != std::string_view::npos) {
        tokens.push_back(ToLower(line.substr(word_start, start - word_start)));
        word_start = std::string_view::npos;
      }
    } else if (word_start == std::string_view::npos) {
      word_start = start;
    }
  }
  if (word_start != std::string_view::npos) {
    tokens.push_back(ToLower(line.substr(word_start)));
  }
  return tokens;
}

std::string Join(std::span<const std::string> words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(words[i]);
  }
  return out;
}

std::vector<std::vector<std::string>> ParseCorpus(std::string_view text) {
  std::vector<std::vector<std::string>> sentences;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto tokens = Tokenize(text.substr(pos, end - pos));
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
    pos = end + 1;
  }
  return sentences;
}

std::vector<std::vector<std::string>> ReadCorpus(const std::string& path) {
  return ParseCorpus(ReadFile(path));
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cbs
