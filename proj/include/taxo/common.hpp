//
// Copyright 2026 The Taxo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef TAXO_COMMON_HPP_
#define TAXO_COMMON_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace taxo {

// ---------------------------------------------------------------------------
// Errors. Every failure the library reports derives from taxo::Error; the
// category decides the CLI exit code.

enum class ErrorCategory { kConfig, kData, kProvider };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define TAXO_DEFINE_ERROR(Name, Category)                   \
  class Name : public Error {                               \
   public:                                                  \
    explicit Name(const std::string& what)                  \
        : Error(ErrorCategory::Category, what) {}           \
  };

TAXO_DEFINE_ERROR(ConfigError, kConfig)
TAXO_DEFINE_ERROR(SchemaError, kData)
TAXO_DEFINE_ERROR(ValueError, kData)
TAXO_DEFINE_ERROR(PreconditionError, kData)
TAXO_DEFINE_ERROR(InvariantError, kData)
TAXO_DEFINE_ERROR(InfeasibleError, kData)
TAXO_DEFINE_ERROR(ContractError, kData)
TAXO_DEFINE_ERROR(StateError, kData)
TAXO_DEFINE_ERROR(ShapeError, kData)
TAXO_DEFINE_ERROR(ParameterError, kConfig)
TAXO_DEFINE_ERROR(DegenerateDataError, kData)
TAXO_DEFINE_ERROR(UndefinedCorrelationError, kData)
TAXO_DEFINE_ERROR(ProviderError, kProvider)

#undef TAXO_DEFINE_ERROR

// Raised when fewer than two low-frequency tokens qualify as nouns.
class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, std::size_t found)
      : Error(ErrorCategory::kData, what), found_(found) {}
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t found_;
};

// ---------------------------------------------------------------------------
// Warnings go through a replaceable sink so tests can observe them.

using WarningSink = std::function<void(const std::string&)>;

inline WarningSink& warning_sink() {
  static WarningSink sink = [](const std::string& message) {
    std::cerr << "warning: " << message << '\n';
  };
  return sink;
}

inline void warn(const std::string& message) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (warning_sink()) warning_sink()(message);
}

// ---------------------------------------------------------------------------
// Languages.

enum class Language { kEn, kFr, kIt };

inline constexpr std::array<Language, 3> kAllLanguages = {
    Language::kEn, Language::kFr, Language::kIt};

inline std::string_view to_string(Language language) {
  switch (language) {
    case Language::kEn: return "en";
    case Language::kFr: return "fr";
    case Language::kIt: return "it";
  }
  return "en";
}

inline Language parse_language(std::string_view code) {
  if (code == "en") return Language::kEn;
  if (code == "fr") return Language::kFr;
  if (code == "it") return Language::kIt;
  throw ValueError("unknown language '" + std::string(code) +
                   "' (expected one of: en, fr, it)");
}

// ---------------------------------------------------------------------------
// Text helpers.

inline bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space_byte(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space_byte(s.back())) s.remove_suffix(1);
  return s;
}

// ASCII plus the Latin-1 capitals (U+00C0..U+00DE, minus U+00D7), which
// covers the French and Italian alphabets.
inline std::string case_fold(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      unsigned char next = static_cast<unsigned char>(out[i + 1]);
      if (next >= 0x80 && next <= 0x9E && next != 0x97) {
        out[i + 1] = static_cast<char>(next + 0x20);
      }
      ++i;
    }
  }
  return out;
}

// Collapses internal whitespace runs (including U+00A0) to one space.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool space = is_space_byte(s[i]);
    std::size_t width = 1;
    if (!space && static_cast<unsigned char>(s[i]) == 0xC2 && i + 1 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0xA0) {
      space = true;
      width = 2;
    }
    if (space) {
      pending_space = !out.empty();
      i += width - 1;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(s[i]);
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char delimiter) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delimiter, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(separator);
    out.append(parts[i]);
  }
  return out;
}

// Values written into TSV cells must not contain tabs or line breaks.
inline std::string tsv_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string tsv_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char next = s[++i];
      switch (next) {
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        default: out.push_back(next);
      }
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

// Reads one line, dropping a trailing CR so CRLF files parse like LF files.
inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

// Fixed-point rendering of a value; rounding follows the current FP mode
// (round-half-even on exact binary ties).
inline std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  std::string out(buffer);
  if (out.find_first_not_of("-0.") == std::string::npos && out[0] == '-') {
    out.erase(0, 1);  // no "-0.000"
  }
  return out;
}

// Round-trippable rendering for machine-read artifacts.
inline std::string format_exact(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

inline double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::nearbyint(value * scale) / scale;
}

// ---------------------------------------------------------------------------
// Hashing and seeded randomness. Everything here is specified bit-for-bit so
// artifacts are identical across standard libraries.

inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a run seed and a salt sequence.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> salts) {
  std::uint64_t state = splitmix64(seed);
  for (std::uint64_t salt : salts) state = splitmix64(state ^ salt);
  return state;
}

inline std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

using Rng = std::mt19937_64;

// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// First `count` entries of a seeded permutation of [0, n).
inline std::vector<std::size_t> sample_without_replacement(Rng& rng,
                                                           std::size_t n,
                                                           std::size_t count) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  if (count > n) count = n;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace taxo

#endif  // TAXO_COMMON_HPP_
