#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "recur/errors.hpp"

namespace recur {

using Symbol = int;

// Finite word over the alphabet {0, ..., m-1}. Immutable after construction;
// safe to share between threads. The empty word is a first-class value for
// every alphabet size. All user-facing indices are 1-based.
class Word {
 public:
  explicit Word(int alphabet_size = 2) : m_(alphabet_size) { check_alphabet(); }

  Word(int alphabet_size, std::vector<Symbol> symbols)
      : m_(alphabet_size), symbols_(std::move(symbols)) {
    check_alphabet();
    for (Symbol s : symbols_)
      if (s < 0 || s >= m_) throw DomainError("word: symbol out of alphabet range");
  }

  // Parses the word text format: ASCII digit string when m <= 10 (e.g. "0110"),
  // comma-separated integers otherwise. "" and "eps" both denote the empty word.
  static Word from_text(int alphabet_size, const std::string& text) {
    if (text.empty() || text == "eps") return Word(alphabet_size);
    std::vector<Symbol> syms;
    if (alphabet_size <= 10) {
      syms.reserve(text.size());
      for (char c : text) {
        if (c < '0' || c > '9') throw DomainError("word: expected digit, got '" + std::string(1, c) + "'");
        syms.push_back(c - '0');
      }
    } else {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string piece = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (piece.empty()) throw DomainError("word: empty symbol in comma-separated form");
        syms.push_back(std::stoi(piece));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
    return Word(alphabet_size, std::move(syms));
  }

  int alphabet_size() const { return m_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }

  // 1-based access.
  Symbol at(std::size_t i) const {
    if (i < 1 || i > symbols_.size()) throw DomainError("word: index out of range");
    return symbols_[i - 1];
  }

  const std::vector<Symbol>& symbols() const { return symbols_; }

  std::string text() const {
    std::string out;
    if (m_ <= 10) {
      out.reserve(symbols_.size());
      for (Symbol s : symbols_) out.push_back(static_cast<char>('0' + s));
    } else {
      for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(symbols_[i]);
      }
    }
    return out;
  }

  friend bool operator==(const Word& a, const Word& b) {
    return a.m_ == b.m_ && a.symbols_ == b.symbols_;
  }
  friend bool operator!=(const Word& a, const Word& b) { return !(a == b); }

  // Lexicographic by symbols, shorter prefix first. Only meaningful between
  // words over the same alphabet.
  friend bool operator<(const Word& a, const Word& b) { return a.symbols_ < b.symbols_; }

 private:
  void check_alphabet() const {
    if (m_ < 2) throw DomainError("word: alphabet size must be at least 2");
  }

  int m_;
  std::vector<Symbol> symbols_;
};

// A Word read as the first coordinates x_1 x_2 ... of a one-sided sequence.
using SymbolicPrefix = Word;

inline Word concat(const Word& u, const Word& v) {
  if (u.alphabet_size() != v.alphabet_size()) throw DomainError("concat: alphabet mismatch");
  std::vector<Symbol> s;
  s.reserve(u.size() + v.size());
  s.insert(s.end(), u.symbols().begin(), u.symbols().end());
  s.insert(s.end(), v.symbols().begin(), v.symbols().end());
  return Word(u.alphabet_size(), std::move(s));
}

// First n symbols. n = 0 yields the empty word; n > |w| is an error.
inline Word prefix(const Word& w, std::size_t n) {
  if (n > w.size()) throw DomainError("prefix: length exceeds word length");
  return Word(w.alphabet_size(),
              std::vector<Symbol>(w.symbols().begin(), w.symbols().begin() + n));
}

// Last n symbols. n = 0 yields the empty word; n > |w| is an error.
inline Word suffix(const Word& w, std::size_t n) {
  if (n > w.size()) throw DomainError("suffix: length exceeds word length");
  return Word(w.alphabet_size(),
              std::vector<Symbol>(w.symbols().end() - n, w.symbols().end()));
}

// 1-based start indices of every occurrence of v inside w, ascending.
// Occurrences may overlap. v must be non-empty.
inline std::vector<std::size_t> subword_occurrences(const Word& v, const Word& w) {
  if (v.empty()) throw DomainError("subword_occurrences: pattern must be non-empty");
  if (v.alphabet_size() != w.alphabet_size())
    throw DomainError("subword_occurrences: alphabet mismatch");
  std::vector<std::size_t> out;
  if (v.size() > w.size()) return out;
  const auto& vs = v.symbols();
  const auto& ws = w.symbols();
  for (std::size_t i = 0; i + vs.size() <= ws.size(); ++i)
    if (std::equal(vs.begin(), vs.end(), ws.begin() + i)) out.push_back(i + 1);
  return out;
}

// Distance between the one-sided sequences two prefixes begin: e^{-i} where i
// is the first 1-based index of disagreement. Prefixes agreeing on the whole
// comparable range cannot be separated by the data in hand.
struct MetricResult {
  bool indistinguishable = false;
  double value = 0.0;       // e^{-first_diff} when determined
  std::size_t first_diff = 0;  // 1-based; 0 when indistinguishable
};

inline MetricResult metric_distance(const SymbolicPrefix& x, const SymbolicPrefix& y) {
  if (x.alphabet_size() != y.alphabet_size())
    throw DomainError("metric_distance: alphabet mismatch");
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (x.symbols()[i] != y.symbols()[i]) {
      MetricResult r;
      r.indistinguishable = false;
      r.value = std::exp(-static_cast<double>(i + 1));
      r.first_diff = i + 1;
      return r;
    }
  }
  MetricResult r;
  r.indistinguishable = true;
  return r;
}

}  // namespace recur
