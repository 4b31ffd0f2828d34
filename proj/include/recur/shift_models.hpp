#pragma once

// Admissibility oracles for concrete subshift families, plus language
// enumeration, counting, and entropy estimation on top of them.
//
// A model is an immutable description of a shift space over the alphabet
// {0, ..., m-1}. `admits` decides whether a finite word belongs to the factor
// language of the space; `enumerate_language` materializes one length slice of
// that language; `entropy_estimate` reports log(#L_n)/n along a range of n.
// All enumeration walks the prefix tree of the language, which is sound
// because every family here has a factor-closed language: each admissible
// word's prefixes are admissible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "recur/errors.hpp"
#include "recur/interval_maps.hpp"
#include "recur/word.hpp"

namespace recur {

// Set of allowed 0-run lengths for gap shifts. Holds a finite part and an
// optional ray {s : s >= ray_min}, so infinite rules stay a predicate rather
// than a materialized set.
struct GapSet {
  std::set<long long> finite;
  std::optional<long long> ray_min;

  bool contains(long long s) const {
    if (s < 0) return false;
    if (ray_min && s >= *ray_min) return true;
    return finite.count(s) > 0;
  }

  // True iff some allowed run length is >= len (the boundary-run test).
  bool any_at_least(long long len) const {
    if (ray_min) return true;
    if (finite.empty()) return false;
    return *finite.rbegin() >= len;
  }

  bool empty() const { return finite.empty() && !ray_min; }
};

struct SubshiftModel {
  enum class Kind { Full, SFT, SGap, Coded, IntervalCoding };

  Kind kind = Kind::Full;
  int m = 2;                          // alphabet size
  std::vector<Word> forbidden;        // SFT: forbidden factors
  GapSet gaps;                        // SGap: allowed 0-run lengths
  std::vector<Word> generators;       // Coded: generating words
  std::optional<AlphaBetaParams> interval_map;  // IntervalCoding
};

inline SubshiftModel full_shift(int m) {
  if (m < 2) throw DomainError("full_shift: alphabet size must be at least 2");
  SubshiftModel model;
  model.kind = SubshiftModel::Kind::Full;
  model.m = m;
  return model;
}

inline SubshiftModel sft(int m, std::vector<Word> forbidden) {
  if (m < 2) throw DomainError("sft: alphabet size must be at least 2");
  for (const Word& f : forbidden) {
    if (f.empty()) throw DomainError("sft: forbidden words must be non-empty");
    if (f.alphabet_size() != m)
      throw DomainError("sft: forbidden word over wrong alphabet");
  }
  SubshiftModel model;
  model.kind = SubshiftModel::Kind::SFT;
  model.m = m;
  model.forbidden = std::move(forbidden);
  return model;
}

inline SubshiftModel s_gap(GapSet gaps) {
  if (gaps.empty()) throw DomainError("s_gap: the set of run lengths is empty");
  if (gaps.ray_min && *gaps.ray_min < 0)
    throw DomainError("s_gap: ray minimum must be non-negative");
  for (long long s : gaps.finite)
    if (s < 0) throw DomainError("s_gap: run lengths must be non-negative");
  SubshiftModel model;
  model.kind = SubshiftModel::Kind::SGap;
  model.m = 2;
  model.gaps = std::move(gaps);
  return model;
}

inline SubshiftModel coded(int m, std::vector<Word> generators) {
  if (m < 2) throw DomainError("coded: alphabet size must be at least 2");
  if (generators.empty())
    throw DomainError("coded: at least one generator is required");
  for (const Word& g : generators) {
    if (g.empty()) throw DomainError("coded: generators must be non-empty");
    if (g.alphabet_size() != m)
      throw DomainError("coded: generator over wrong alphabet");
  }
  SubshiftModel model;
  model.kind = SubshiftModel::Kind::Coded;
  model.m = m;
  model.generators = std::move(generators);
  return model;
}

inline SubshiftModel interval_coding(const AlphaBetaParams& p) {
  SubshiftModel model;
  model.kind = SubshiftModel::Kind::IntervalCoding;
  model.m = p.m;
  model.interval_map = p;
  return model;
}

namespace detail {

inline bool contains_factor(const std::vector<Symbol>& w,
                            const std::vector<Symbol>& f) {
  if (f.size() > w.size()) return false;
  const std::size_t last = w.size() - f.size();
  for (std::size_t start = 0; start <= last; ++start) {
    bool match = true;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (w[start + i] != f[i]) {
        match = false;
        break;
      }
    if (match) return true;
  }
  return false;
}

inline bool admits_sft(const SubshiftModel& model, const std::vector<Symbol>& w) {
  for (const Word& f : model.forbidden)
    if (contains_factor(w, f.symbols())) return false;
  return true;
}

inline bool admits_s_gap(const SubshiftModel& model,
                         const std::vector<Symbol>& w) {
  // Decompose w into maximal runs of 0s. Runs strictly between two 1s must
  // have an allowed length; runs touching either end of the word only need to
  // be completable, i.e. some allowed length must be >= the truncated run.
  std::size_t i = 0;
  bool seen_one = false;
  while (i < w.size()) {
    if (w[i] == 1) {
      seen_one = true;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < w.size() && w[j] == 0) ++j;
    const long long run = static_cast<long long>(j - i);
    const bool left_closed = seen_one;
    const bool right_closed = j < w.size();  // a 1 follows the run
    if (left_closed && right_closed) {
      if (!model.gaps.contains(run)) return false;
    } else {
      if (!model.gaps.any_at_least(run)) return false;
    }
    i = j;
  }
  // A word of consecutive 1s has interior runs of length zero between them.
  for (std::size_t k = 0; k + 1 < w.size(); ++k)
    if (w[k] == 1 && w[k + 1] == 1 && !model.gaps.contains(0)) return false;
  return true;
}

// Coded-shift membership: w is a factor of some concatenation of generators.
// The search aligns w against a concatenation: it may begin in the middle of
// one generator, then must continue with whole generators. States are "number
// of symbols of w already matched at a generator boundary"; they strictly
// increase, so the search visits at most |w| states.
inline bool admits_coded(const SubshiftModel& model,
                         const std::vector<Symbol>& w) {
  if (w.empty()) return true;
  const std::size_t n = w.size();

  // Match w[from..] against generator g starting at offset `off` inside g.
  // Returns the number of symbols matched if the overlap agrees (either w or
  // the generator ends), or nullopt on a symbol mismatch.
  const auto overlap = [&](const std::vector<Symbol>& g, std::size_t off,
                           std::size_t from) -> std::optional<std::size_t> {
    const std::size_t len = std::min(g.size() - off, n - from);
    for (std::size_t i = 0; i < len; ++i)
      if (g[off + i] != w[from + i]) return std::nullopt;
    return len;
  };

  std::vector<char> queued(n + 1, 0);
  std::vector<std::size_t> stack;
  const auto push = [&](std::size_t matched) {
    if (matched >= n) return true;  // fully matched
    if (!queued[matched]) {
      queued[matched] = 1;
      stack.push_back(matched);
    }
    return false;
  };

  // Seed: w may start at any offset inside any generator.
  for (const Word& gw : model.generators) {
    const auto& g = gw.symbols();
    for (std::size_t off = 0; off < g.size(); ++off) {
      const auto len = overlap(g, off, 0);
      if (!len) continue;
      if (off + *len < g.size()) {
        // w ended strictly inside this generator: fully matched.
        return true;
      }
      if (push(*len)) return true;
    }
  }
  while (!stack.empty()) {
    const std::size_t matched = stack.back();
    stack.pop_back();
    for (const Word& gw : model.generators) {
      const auto& g = gw.symbols();
      const auto len = overlap(g, 0, matched);
      if (!len) continue;
      if (push(matched + *len)) return true;
    }
  }
  return false;
}

}  // namespace detail

inline bool admits(const SubshiftModel& model, const Word& w) {
  if (w.alphabet_size() != model.m)
    throw DomainError("admits: word alphabet does not match the model");
  if (w.empty()) return true;
  switch (model.kind) {
    case SubshiftModel::Kind::Full:
      return true;
    case SubshiftModel::Kind::SFT:
      return detail::admits_sft(model, w.symbols());
    case SubshiftModel::Kind::SGap:
      return detail::admits_s_gap(model, w.symbols());
    case SubshiftModel::Kind::Coded:
      return detail::admits_coded(model, w.symbols());
    case SubshiftModel::Kind::IntervalCoding:
      return cylinder_interval(*model.interval_map, w).has_value();
  }
  throw DomainError("admits: unknown model kind");
}

struct LanguageSlice {
  long long n = 0;
  std::vector<Word> words;
  long long count = 0;
};

inline constexpr long long kDefaultEnumerationBudget = 10'000'000;

namespace detail {

// Depth-first walk of the admissible prefix tree in symbol order (hence
// lexicographic output). `visit(word, depth)` is called for every admissible
// word with 1 <= depth <= n_max. Each admissibility test consumes one unit of
// budget; running out raises BudgetError rather than truncating.
template <typename Visit>
inline void walk_language(const SubshiftModel& model, int n_max,
                          long long budget, Visit&& visit) {
  long long used = 0;
  std::vector<Symbol> prefix;
  const auto step = [&](const auto& self) -> void {
    if (static_cast<int>(prefix.size()) == n_max) return;
    for (Symbol s = 0; s < model.m; ++s) {
      prefix.push_back(s);
      if (++used > budget)
        throw BudgetError("enumeration budget exhausted at " +
                          std::to_string(budget) + " candidate words");
      if (admits(model, Word(model.m, prefix))) {
        visit(prefix, static_cast<int>(prefix.size()));
        self(self);
      }
      prefix.pop_back();
    }
  };
  step(step);
}

}  // namespace detail

inline LanguageSlice enumerate_language(
    const SubshiftModel& model, long long n,
    long long budget = kDefaultEnumerationBudget) {
  if (n < 0) throw DomainError("enumerate_language: length must be >= 0");
  if (budget <= 0) throw DomainError("enumerate_language: budget must be positive");
  LanguageSlice slice;
  slice.n = n;
  if (n == 0) {
    slice.words.push_back(Word(model.m));
    slice.count = 1;
    return slice;
  }
  detail::walk_language(model, static_cast<int>(n), budget,
                        [&](const std::vector<Symbol>& w, int depth) {
                          if (depth == static_cast<int>(n))
                            slice.words.push_back(Word(model.m, w));
                        });
  slice.count = static_cast<long long>(slice.words.size());
  return slice;
}

struct EntropyEstimate {
  // (n, log(#L_n)/n) for n = 1..n_max; the sequence converges to the entropy
  // from above for the families here.
  std::vector<std::pair<int, double>> points;
  std::vector<long long> counts;  // counts[i] = #L_{i+1}
  double value = 0.0;             // log(#L_{n_max}) / n_max
};

inline EntropyEstimate entropy_estimate(
    const SubshiftModel& model, int n_max,
    long long budget = kDefaultEnumerationBudget) {
  if (n_max < 1) throw DomainError("entropy_estimate: n_max must be >= 1");
  if (budget <= 0) throw DomainError("entropy_estimate: budget must be positive");
  std::vector<long long> counts(static_cast<std::size_t>(n_max), 0);
  detail::walk_language(model, n_max, budget,
                        [&](const std::vector<Symbol>&, int depth) {
                          ++counts[static_cast<std::size_t>(depth - 1)];
                        });
  EntropyEstimate est;
  est.counts = counts;
  for (int n = 1; n <= n_max; ++n) {
    const long long c = counts[static_cast<std::size_t>(n - 1)];
    const double v = c > 0 ? std::log(static_cast<double>(c)) / n
                           : -std::numeric_limits<double>::infinity();
    est.points.emplace_back(n, v);
  }
  est.value = est.points.back().second;
  return est;
}

}  // namespace recur
