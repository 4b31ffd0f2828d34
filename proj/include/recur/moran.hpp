#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "recur/errors.hpp"
#include "recur/interval_maps.hpp"
#include "recur/markov_diagram.hpp"
#include "recur/recurrence.hpp"
#include "recur/schedules.hpp"
#include "recur/shift_models.hpp"
#include "recur/word.hpp"

namespace recur {

// ---- seed sets -------------------------------------------------------------
//
// A seed set is a pruned collection Q of good words of one fixed length k
// together with a distinguished anchor word v* of the same length that is
// *not* in Q. The pruning removes every word whose prefix or suffix overlaps
// v* deeply enough that v* could reappear across a block boundary; the
// payoff is the non-recurrence property checked by `build_qk`: v* never
// occurs inside u w v for u, v in Q and any word w of length <= t. Points
// assembled from Q-blocks therefore see v* exactly where the constructor
// put it, which is what makes return times exactly computable.

struct SeedConfig {
  MarkovDiagram diagram;   // carries the model
  DecompositionN decomp;
  long long k = 0;         // block length
  long long t = 0;         // connector budget (max gap between blocks)
  Word anchor_prefix;      // reserved pruning anchor; empty in this builder
  std::vector<Word> qk;    // the seed blocks, in lexicographic order
  Word vstar;              // the anchor word, not a member of qk
  long long pool_size = 0; // good words of length k before pruning
  long long property_c_checked = 0;  // (u, v, w) triples examined
  bool property_c_exhaustive = true;

  const SubshiftModel& model() const { return diagram.model; }
};

namespace detail {

// True when w has a proper border: a strict prefix that is also a suffix.
// Borderless anchors admit no self-overlapping occurrences, which keeps
// every anchor occurrence in a constructed point at a block-aligned spot.
inline bool has_border(const std::vector<Symbol>& w) {
  const std::size_t n = w.size();
  for (std::size_t len = 1; len < n; ++len) {
    bool match = true;
    for (std::size_t i = 0; i < len; ++i)
      if (w[i] != w[n - len + i]) {
        match = false;
        break;
      }
    if (match) return true;
  }
  return false;
}

// All words over the model alphabet of length <= t, ordered by length then
// lexicographically. This is the fixed total order on connector words.
inline std::vector<Word> connector_pool(int m, long long t) {
  std::vector<Word> out;
  out.emplace_back(m);
  std::vector<Symbol> cur;
  for (long long len = 1; len <= t; ++len) {
    cur.assign(static_cast<std::size_t>(len), 0);
    while (true) {
      out.emplace_back(m, cur);
      int i = static_cast<int>(len) - 1;
      while (i >= 0 && cur[static_cast<std::size_t>(i)] == m - 1) {
        cur[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
      ++cur[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

struct QkAttempt {
  std::vector<Word> qk;
  Word vstar;
  long long pool_size = 0;
  bool viable = false;     // non-empty qk and the anchor test passed
  std::string failure;
};

// One pruning pass at a fixed k. Collects the good-word pool, picks the
// lexicographically least borderless pool member as the anchor, prunes the
// deep-overlap classes, and checks the anchor non-recurrence property.
inline QkAttempt attempt_qk(const MarkovDiagram& dg, const DecompositionN& d,
                            long long k, long long t, long long budget) {
  const SubshiftModel& model = dg.model;
  QkAttempt out{std::vector<Word>{}, Word(model.m), 0, false, ""};

  const LanguageSlice slice = enumerate_language(model, static_cast<int>(k), budget);
  std::vector<Word> pool;
  for (const Word& w : slice.words)
    if (in_good_set(dg, d, w)) pool.push_back(w);
  out.pool_size = static_cast<long long>(pool.size());
  if (pool.empty()) {
    out.failure = "no good words of this length";
    return out;
  }

  const Word* anchor = nullptr;
  for (const Word& w : pool)
    if (!has_border(w.symbols())) {
      anchor = &w;
      break;
    }
  if (anchor == nullptr) {
    out.failure = "no borderless good word to anchor on";
    return out;
  }
  out.vstar = *anchor;
  const auto& vs = out.vstar.symbols();

  // Remove words that overlap the anchor on a prefix or suffix of length
  // j = k - i + 1 for i = 1..floor(2k/3 + 1); i = 1 removes the anchor itself.
  const long long i_max = (2 * k) / 3 + 1;  // floor(2k/3 + 1) for integer k
  const long long j_min = k - i_max + 1;
  for (const Word& w : pool) {
    const auto& sy = w.symbols();
    bool pruned = false;
    for (long long j = j_min; j <= k && !pruned; ++j) {
      bool suffix_hits_prefix = true;  // suffix_j(w) == prefix_j(v*)
      bool prefix_hits_suffix = true;  // prefix_j(w) == suffix_j(v*)
      for (long long i = 0; i < j; ++i) {
        if (sy[static_cast<std::size_t>(k - j + i)] != vs[static_cast<std::size_t>(i)])
          suffix_hits_prefix = false;
        if (sy[static_cast<std::size_t>(i)] != vs[static_cast<std::size_t>(k - j + i)])
          prefix_hits_suffix = false;
        if (!suffix_hits_prefix && !prefix_hits_suffix) break;
      }
      pruned = suffix_hits_prefix || prefix_hits_suffix;
    }
    if (!pruned) out.qk.push_back(w);
  }
  if (out.qk.empty()) {
    out.failure = "every good word pruned";
    return out;
  }

  out.viable = true;
  return out;
}

}  // namespace detail

inline constexpr double kDimensionEpsilon = 0.01;

// Builds the seed set at block length k with connector budget t over the
// good set of the given decomposition. The anchor v* is the lexicographically
// least borderless good word; pruning then removes every word whose length-j
// suffix equals a prefix of v* or whose length-j prefix equals a suffix of
// v*, for j from k - floor(2k/3 + 1) + 1 up to k. The anchor non-recurrence
// property (v* never a factor of u w v with u, v in Q, |w| <= t) is checked
// by direct search, sampled evenly when the triple count exceeds the budget.
// An empty result is a hard error that names the smallest viable k found by
// scanning upward.
inline SeedConfig build_qk(const MarkovDiagram& dg, const DecompositionN& d,
                           long long k, long long t,
                           long long selection_budget = kDefaultEnumerationBudget) {
  if (t < 0) throw DomainError("build_qk: t must be >= 0");
  if (k <= 3 * t) throw DomainError("build_qk: k must exceed 3t");
  if (selection_budget <= 0) throw DomainError("build_qk: budget must be positive");
  const SubshiftModel& model = dg.model;
  const long long word_gap = gap_size(dg, d).word_gap;
  if (t < word_gap)
    throw DomainError("build_qk: t = " + std::to_string(t) +
                      " is below the decomposition's word gap " +
                      std::to_string(word_gap));

  const auto check_anchor_property =
      [&](const detail::QkAttempt& att, long long& checked, bool& exhaustive,
          std::string& violation) {
        const auto connectors = detail::connector_pool(model.m, t);
        const long long nq = static_cast<long long>(att.qk.size());
        const long long total =
            nq * nq * static_cast<long long>(connectors.size());
        long long stride = 1;
        while (total / (stride * stride) > selection_budget) ++stride;
        exhaustive = stride == 1;
        checked = 0;
        std::vector<Symbol> glued;
        for (long long iu = 0; iu < nq; iu += stride) {
          for (long long iv = 0; iv < nq; iv += stride) {
            for (const Word& w : connectors) {
              glued = att.qk[static_cast<std::size_t>(iu)].symbols();
              const auto& ws = w.symbols();
              const auto& vsyms = att.qk[static_cast<std::size_t>(iv)].symbols();
              glued.insert(glued.end(), ws.begin(), ws.end());
              glued.insert(glued.end(), vsyms.begin(), vsyms.end());
              ++checked;
              if (detail::contains_factor(glued, att.vstar.symbols())) {
                violation = "anchor occurs in " +
                            att.qk[static_cast<std::size_t>(iu)].text() + " + " +
                            w.text() + " + " +
                            att.qk[static_cast<std::size_t>(iv)].text();
                return false;
              }
            }
          }
        }
        return true;
      };

  detail::QkAttempt att = detail::attempt_qk(dg, d, k, t, selection_budget);
  long long checked = 0;
  bool exhaustive = true;
  std::string violation;
  bool ok = att.viable && check_anchor_property(att, checked, exhaustive, violation);
  if (att.viable && !ok) att.failure = "anchor non-recurrence fails: " + violation;

  if (!ok) {
    // Scan upward for the smallest viable k to report.
    for (long long k2 = k + 1; k2 <= k + 24; ++k2) {
      if (k2 <= 3 * t) continue;
      detail::QkAttempt att2;
      try {
        att2 = detail::attempt_qk(dg, d, k2, t, selection_budget);
      } catch (const BudgetError&) {
        break;
      }
      long long c2 = 0;
      bool e2 = true;
      std::string viol2;
      if (att2.viable && check_anchor_property(att2, c2, e2, viol2))
        throw DomainError("build_qk: seed set not viable at k = " + std::to_string(k) +
                          " (" + att.failure + "); smallest passing k is " +
                          std::to_string(k2));
    }
    throw DomainError("build_qk: seed set not viable at k = " + std::to_string(k) +
                      " (" + att.failure + "); no passing k found by upward scan");
  }

  SeedConfig cfg;
  cfg.diagram = dg;
  cfg.decomp = d;
  cfg.k = k;
  cfg.t = t;
  cfg.anchor_prefix = Word(model.m);
  cfg.qk = std::move(att.qk);
  cfg.vstar = att.vstar;
  cfg.pool_size = att.pool_size;
  cfg.property_c_checked = checked;
  cfg.property_c_exhaustive = exhaustive;
  return cfg;
}

// Convenience form: builds the diagram for the model (a few levels suffice
// for the decomposition at depth 0) and seeds from the depth-0 good set.
inline SeedConfig build_qk(const SubshiftModel& model, long long k, long long t,
                           long long selection_budget = kDefaultEnumerationBudget) {
  MarkovDiagram dg = build_diagram(model, 8);
  DecompositionN d = make_decomposition(dg, 0);
  return build_qk(dg, d, k, t, selection_budget);
}

// ---- point construction ----------------------------------------------------
//
// A point is grown as a word y, block by block. Ordinarily each step appends
// a connector and a fresh seed block (Case 1). When the plain block stream
// crosses the timing threshold e^{gamma_p ell_p} of the schedule, the step
// instead replays a prefix theta of y (Case 2): it appends
// w1 theta w2 lambda w3 v, where theta is block-aligned with length in
// [ell_p, ell_p + k + t), and lambda is a seed block chosen so that
// theta w lambda extends past agreement with y for every eligible connector
// w. The replay manufactures the first return of the length-|theta| prefix
// at an exactly known position, which the verifier re-derives from the text.

struct BlockRecord {
  enum class Kind { Anchor, Seed, Connector, ThetaCopy, Lambda };
  Kind kind = Kind::Seed;
  long long start = 0;   // 1-based start position in y
  long long length = 0;
  long long qk_index = -1;  // for Seed / Lambda blocks
  int p = -1;               // insertion index for Case-2 blocks
  int role = 0;             // connectors: 0 plain, 1..3 = w^{p,1..3}
};

struct InsertionRecord {
  int p = 0;                  // 1-based checkpoint index (post-shift)
  long long m_index = 0;      // the step q at which the insertion fired
  long long y_len_before = 0; // |y_q| just before the insertion
  long long theta_len = 0;    // |theta^p|
  Word w1, w2, w3;
  long long lambda_index = -1;
  long long predicted_return = 0;  // y_len_before + |w1|
  long long s_p = 0;  // longest i with prefix_i(theta w2 lambda) a prefix of y_q
  double ell = 0.0;            // ell_p
  double gamma = 0.0;          // gamma_p
  double gamma_ell = 0.0;      // gamma_p * ell_p (log of the timing target)
};

struct MoranPoint {
  SubshiftModel model;
  long long k = 0, t = 0;
  double a = 0.0, b = 0.0;
  int schedule_shift = 0;
  std::uint64_t seed = 0;
  long long target_length = 0;
  Word vstar;
  std::vector<Word> qk;
  Word prefix;  // the constructed y; at least target_length symbols
  std::vector<BlockRecord> blocks;
  std::vector<InsertionRecord> insertions;
  std::vector<long long> seed_indices;  // qk index drawn for each step
};

namespace detail {

// Online admissibility tracker: feeds one symbol at a time and reports when
// the grown word leaves the language. Copyable, so lookahead is a clone.
class AdmissTracker {
 public:
  explicit AdmissTracker(const SubshiftModel& model) : model_(&model) {
    switch (model.kind) {
      case SubshiftModel::Kind::Full:
        break;
      case SubshiftModel::Kind::SFT:
        break;  // empty overlap profile
      case SubshiftModel::Kind::SGap:
        gap_ = GapState{};
        break;
      case SubshiftModel::Kind::Coded: {
        // A factor may start anywhere inside a generator.
        for (int g = 0; g < static_cast<int>(model.generators.size()); ++g) {
          const auto len = static_cast<int>(model.generators[static_cast<std::size_t>(g)].size());
          for (int o = 0; o < len; ++o) coded_insert(coded_.positions, g, o);
        }
        break;
      }
      case SubshiftModel::Kind::IntervalCoding:
        lo_ = 0.0;
        hi_ = 1.0;
        break;
    }
  }

  bool feed(Symbol s) {
    if (dead_) return false;
    switch (model_->kind) {
      case SubshiftModel::Kind::Full:
        return true;
      case SubshiftModel::Kind::SFT: {
        auto nx = sft_step(*model_, sft_, s);
        if (!nx) return dead();
        sft_ = std::move(*nx);
        return true;
      }
      case SubshiftModel::Kind::SGap: {
        auto nx = gap_step(*model_, gap_, s);
        if (!nx) return dead();
        gap_ = *nx;
        return true;
      }
      case SubshiftModel::Kind::Coded: {
        auto nx = coded_step(*model_, coded_, s);
        if (!nx) return dead();
        coded_ = std::move(*nx);
        return true;
      }
      case SubshiftModel::Kind::IntervalCoding: {
        const auto& p = *model_->interval_map;
        const Interval B = branch_closure(p, s);
        const double lo = std::max(lo_, B.left);
        const double hi = std::min(hi_, B.right);
        if (hi - lo <= kEndpointTol) return dead();
        lo_ = std::max(0.0, p.beta * lo + p.alpha - s);
        hi_ = std::min(1.0, p.beta * hi + p.alpha - s);
        return true;
      }
    }
    return dead();
  }

  bool feed_all(const std::vector<Symbol>& syms) {
    for (Symbol s : syms)
      if (!feed(s)) return false;
    return true;
  }

 private:
  bool dead() {
    dead_ = true;
    return false;
  }

  const SubshiftModel* model_;
  bool dead_ = false;
  SftState sft_;
  GapState gap_;
  CodedState coded_;
  double lo_ = 0.0, hi_ = 1.0;
};

// Minimal connector w (length-then-lex) with context + w + target admissible,
// where context is the tracker state of everything already written.
inline std::optional<Word> min_connector(const SubshiftModel& model,
                                         const AdmissTracker& context, long long t,
                                         const std::vector<Symbol>& target) {
  std::vector<Symbol> cur;
  for (long long len = 0; len <= t; ++len) {
    cur.assign(static_cast<std::size_t>(len), 0);
    while (true) {
      AdmissTracker probe = context;
      if (probe.feed_all(cur) && probe.feed_all(target)) return Word(model.m, cur);
      int i = static_cast<int>(len) - 1;
      while (i >= 0 && cur[static_cast<std::size_t>(i)] == model.m - 1) {
        cur[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
      ++cur[static_cast<std::size_t>(i)];
    }
  }
  return std::nullopt;
}

// Growth state shared by the point constructor and the tree materializer.
struct BuilderState {
  std::vector<Symbol> y;
  std::vector<long long> qk_ends;  // 1-based end positions of seed blocks
  long long plain_len = 0;         // anchor + connectors + blocks, no replays
  long long q = 0;                 // blocks appended so far
  std::size_t pending = 0;         // next schedule term index
  long long last_theta = 0;
  long long last_s = 0;
  AdmissTracker y_state;
  AdmissTracker plain_state;
  std::vector<Symbol> plain_tail;  // last block of the plain stream
  std::vector<BlockRecord> blocks;
  std::vector<InsertionRecord> insertions;
  std::vector<long long> seed_indices;

  explicit BuilderState(const SubshiftModel& model)
      : y_state(model), plain_state(model) {}
};

inline BuilderState init_builder(const SeedConfig& cfg) {
  BuilderState st(cfg.model());
  const auto& vs = cfg.vstar.symbols();
  if (!st.y_state.feed_all(vs) || !st.plain_state.feed_all(vs))
    throw DomainError("construct_point: anchor word is not admissible");
  st.y = vs;
  st.plain_len = static_cast<long long>(vs.size());
  st.plain_tail = vs;
  st.blocks.push_back(BlockRecord{BlockRecord::Kind::Anchor, 1,
                                  static_cast<long long>(vs.size()), -1, -1, 0});
  return st;
}

inline void append_block(BuilderState& st, BlockRecord::Kind kind,
                         const std::vector<Symbol>& syms, long long qk_index,
                         int p, int role) {
  if (syms.empty()) return;
  st.blocks.push_back(BlockRecord{kind, static_cast<long long>(st.y.size()) + 1,
                                  static_cast<long long>(syms.size()), qk_index, p,
                                  role});
  st.y.insert(st.y.end(), syms.begin(), syms.end());
}

// One growth step y_q -> y_{q+1} with the given seed-block choice.
inline void advance(const SeedConfig& cfg, const Schedule& sched, BuilderState& st,
                    long long choice) {
  const SubshiftModel& model = cfg.model();
  const long long k = cfg.k, t = cfg.t;
  const Word& v_next = cfg.qk[static_cast<std::size_t>(choice)];

  const bool fire = st.pending < sched.terms.size() &&
                    std::log(static_cast<double>(st.plain_len)) >=
                        std::exp(sched.terms[st.pending].log_gamma_ell);
  if (fire) {
    const ScheduleTerm& term = sched.terms[st.pending];
    const int p = static_cast<int>(st.pending) + 1;
    const double ell = term.ell;
    const long long y_len = static_cast<long long>(st.y.size());

    // theta: smallest block-aligned prefix end inside [ell_p, ell_p + k + t)
    // strictly past both the previous replay prefix and its agreement reach.
    const double win_lo = ell;
    const double win_hi = ell + static_cast<double>(k + t);
    long long theta_len = -1;
    for (long long e : st.qk_ends) {
      if (static_cast<double>(e) < win_lo) continue;
      if (static_cast<double>(e) >= win_hi) break;
      if (e <= st.last_theta || e <= st.last_s) continue;
      theta_len = e;
      break;
    }
    if (theta_len < 0)
      throw DomainError(
          "construct_point: no block-aligned replay prefix in [" +
          std::to_string(win_lo) + ", " + std::to_string(win_hi) +
          ") at checkpoint p = " + std::to_string(p));
    const std::vector<Symbol> theta(st.y.begin(), st.y.begin() + theta_len);

    // lambda: first seed block such that theta w lambda fails to be a prefix
    // of y for every eligible connector w. Eligibility is plain
    // admissibility of theta w lambda; at least one eligible w must exist.
    const auto connectors = connector_pool(model.m, t);
    long long lambda_index = -1;
    Word w2_probe(model.m);
    for (std::size_t li = 0; li < cfg.qk.size(); ++li) {
      const auto& lam = cfg.qk[li].symbols();
      bool any_eligible = false;
      bool all_nonprefix = true;
      for (const Word& w : connectors) {
        std::vector<Symbol> cand = theta;
        cand.insert(cand.end(), w.symbols().begin(), w.symbols().end());
        cand.insert(cand.end(), lam.begin(), lam.end());
        if (!admits(model, Word(model.m, cand))) continue;
        any_eligible = true;
        if (cand.size() <= st.y.size() &&
            std::equal(cand.begin(), cand.end(), st.y.begin())) {
          all_nonprefix = false;
          break;
        }
      }
      if (any_eligible && all_nonprefix) {
        lambda_index = static_cast<long long>(li);
        break;
      }
    }
    if (lambda_index < 0)
      throw DomainError(
          "construct_point: no seed block breaks prefix agreement at checkpoint p = " +
          std::to_string(p) + " (k too small for this t)");
    const auto& lam = cfg.qk[static_cast<std::size_t>(lambda_index)].symbols();

    // Connectors w1, w2, w3, each minimal in the running context.
    const auto need = [&](const std::optional<Word>& w, const char* which) {
      if (!w)
        throw DomainError(std::string("construct_point: no connector ") + which +
                          " within gap " + std::to_string(t) +
                          " at checkpoint p = " + std::to_string(p) +
                          " (specification failure)");
      return *w;
    };
    const Word w1 = need(min_connector(model, st.y_state, t, theta), "w1");
    append_block(st, BlockRecord::Kind::Connector, w1.symbols(), -1, p, 1);
    if (!st.y_state.feed_all(w1.symbols()) || !st.y_state.feed_all(theta))
      throw DomainError("construct_point: replay went inadmissible (w1)");
    {
      BlockRecord rec{BlockRecord::Kind::ThetaCopy,
                      static_cast<long long>(st.y.size()) + 1, theta_len, -1, p, 0};
      st.blocks.push_back(rec);
    }
    const long long theta_base = static_cast<long long>(st.y.size());
    st.y.insert(st.y.end(), theta.begin(), theta.end());

    const Word w2 = need(min_connector(model, st.y_state, t, lam), "w2");
    append_block(st, BlockRecord::Kind::Connector, w2.symbols(), -1, p, 2);
    if (!st.y_state.feed_all(w2.symbols()) || !st.y_state.feed_all(lam))
      throw DomainError("construct_point: replay went inadmissible (w2)");
    append_block(st, BlockRecord::Kind::Lambda, lam, lambda_index, p, 0);

    const Word w3 = need(min_connector(model, st.y_state, t, v_next.symbols()), "w3");
    append_block(st, BlockRecord::Kind::Connector, w3.symbols(), -1, p, 3);
    if (!st.y_state.feed_all(w3.symbols()) || !st.y_state.feed_all(v_next.symbols()))
      throw DomainError("construct_point: replay went inadmissible (w3)");
    append_block(st, BlockRecord::Kind::Seed, v_next.symbols(), choice, -1, 0);

    // Replayed seed-block boundaries are boundaries again in the copy.
    std::vector<long long> copied;
    for (long long e : st.qk_ends) {
      if (e > theta_len) break;
      copied.push_back(theta_base + e);
    }
    st.qk_ends.insert(st.qk_ends.end(), copied.begin(), copied.end());
    st.qk_ends.push_back(theta_base + theta_len + static_cast<long long>(w2.size()) +
                         k);  // lambda block end
    st.qk_ends.push_back(static_cast<long long>(st.y.size()));  // v block end
    std::sort(st.qk_ends.begin(), st.qk_ends.end());

    // Agreement reach of the replay against the old y: the first return of
    // the replay prefix plateaus exactly up to this index.
    long long s = theta_len;
    {
      std::vector<Symbol> ext(w2.symbols());
      ext.insert(ext.end(), lam.begin(), lam.end());
      while (s - theta_len < static_cast<long long>(ext.size()) && s < y_len &&
             st.y[static_cast<std::size_t>(s)] ==
                 ext[static_cast<std::size_t>(s - theta_len)])
        ++s;
    }

    InsertionRecord rec;
    rec.p = p;
    rec.m_index = st.q;
    rec.y_len_before = y_len;
    rec.theta_len = theta_len;
    rec.w1 = w1;
    rec.w2 = w2;
    rec.w3 = w3;
    rec.lambda_index = lambda_index;
    rec.predicted_return = y_len + static_cast<long long>(w1.size());
    rec.s_p = s;
    rec.ell = ell;
    rec.gamma = term.gamma;
    rec.gamma_ell = std::exp(term.log_gamma_ell);
    st.insertions.push_back(rec);
    st.last_theta = theta_len;
    st.last_s = s;
    ++st.pending;
  } else {
    const auto w = min_connector(model, st.y_state, t, v_next.symbols());
    if (!w)
      throw DomainError("construct_point: no connector joins the stream to block '" +
                        v_next.text() + "' within gap " + std::to_string(t) +
                        " (specification failure)");
    append_block(st, BlockRecord::Kind::Connector, w->symbols(), -1, -1, 0);
    if (!st.y_state.feed_all(w->symbols()) || !st.y_state.feed_all(v_next.symbols()))
      throw DomainError("construct_point: stream went inadmissible");
    append_block(st, BlockRecord::Kind::Seed, v_next.symbols(), choice, -1, 0);
    st.qk_ends.push_back(static_cast<long long>(st.y.size()));
  }

  // The plain stream advances by a direct connector + block either way.
  const auto wp = min_connector(model, st.plain_state, t, v_next.symbols());
  if (!wp)
    throw DomainError("construct_point: plain stream cannot absorb block '" +
                      v_next.text() + "' within gap " + std::to_string(t));
  if (!st.plain_state.feed_all(wp->symbols()) ||
      !st.plain_state.feed_all(v_next.symbols()))
    throw DomainError("construct_point: plain stream went inadmissible");
  st.plain_len += static_cast<long long>(wp->size()) + cfg.k;
  st.plain_tail = v_next.symbols();
  st.seed_indices.push_back(choice);
  ++st.q;
}

inline void require_prepared(const Schedule& sched, long long k, long long t) {
  if (sched.terms.size() < 2)
    throw DomainError("construct_point: schedule needs at least 2 terms");
  const double need_first = std::log(static_cast<double>(2 * k + t));
  const double need_ell = std::log(static_cast<double>(k + 1));
  if (std::exp(sched.terms[0].log_gamma_ell) < need_first - 1e-9 ||
      sched.terms[0].log_ell < need_ell - 1e-9)
    throw DomainError(
        "construct_point: schedule not prepared; apply the construction shift");
}

// The timing thresholds must be spaced wider than one block step, otherwise
// the crossing indices are not strictly increasing. Checked in linear space
// for every reachable term.
inline void require_threshold_gaps(const Schedule& sched, long long k, long long t,
                                   long long target) {
  const double reach = std::log(4.0 * static_cast<double>(target) + 256.0);
  for (std::size_t i = 0; i + 1 < sched.terms.size(); ++i) {
    const double g0 = std::exp(sched.terms[i].log_gamma_ell);
    const double g1 = std::exp(sched.terms[i + 1].log_gamma_ell);
    if (g0 > reach) break;
    if (std::exp(g1) - std::exp(g0) <= static_cast<double>(k + t))
      throw DomainError(
          "construct_point: timing thresholds closer than one block step at p = " +
          std::to_string(i + 1));
  }
}

}  // namespace detail

// Grows a point to at least target_length symbols. The seed-block stream is
// drawn from qk by a deterministic generator on the given seed; connectors
// and replay choices follow fixed minimal-selection rules, so identical
// inputs rebuild identical points. Throws when the schedule runs out of
// timing checkpoints below the target, when no admissible connector exists
// (a specification failure of the model), or when a replay window contains
// no usable block boundary.
inline MoranPoint construct_point(const SeedConfig& cfg, const Schedule& sched,
                                  long long target_length, std::uint64_t seed) {
  if (target_length < 1) throw DomainError("construct_point: target must be >= 1");
  if (target_length > 100000000LL)
    throw DomainError("construct_point: target above the 1e8 cap");
  if (cfg.qk.empty()) throw DomainError("construct_point: empty seed set");
  detail::require_prepared(sched, cfg.k, cfg.t);
  detail::require_threshold_gaps(sched, cfg.k, cfg.t, target_length);
  {
    const double last = std::exp(sched.terms.back().log_gamma_ell);
    const double bound =
        std::log(2.0 * static_cast<double>(target_length) +
                 64.0 * static_cast<double>(cfg.k + cfg.t + 1));
    if (last <= bound)
      throw DomainError(
          "construct_point: schedule exhausted before the target length; "
          "generate more terms");
  }

  detail::BuilderState st = detail::init_builder(cfg);
  std::mt19937_64 rng(seed);
  while (static_cast<long long>(st.y.size()) < target_length) {
    const long long choice =
        static_cast<long long>(rng() % static_cast<std::uint64_t>(cfg.qk.size()));
    detail::advance(cfg, sched, st, choice);
  }

  MoranPoint pt;
  pt.model = cfg.model();
  pt.k = cfg.k;
  pt.t = cfg.t;
  pt.a = sched.a;
  pt.b = sched.b;
  pt.schedule_shift = sched.index_shift;
  pt.seed = seed;
  pt.target_length = target_length;
  pt.vstar = cfg.vstar;
  pt.qk = cfg.qk;
  pt.prefix = Word(cfg.model().m, std::move(st.y));
  pt.blocks = std::move(st.blocks);
  pt.insertions = std::move(st.insertions);
  pt.seed_indices = std::move(st.seed_indices);
  return pt;
}

// ---- verification ----------------------------------------------------------

struct CheckpointReport {
  int p = 0;
  long long n = 0;          // |theta^p|
  long long tau = 0;        // measured first return of the n-prefix
  long long predicted = 0;  // ledger prediction
  bool exact_match = false;
  bool sandwich_ok = false;
  double sandwich_lo = 0.0, sandwich_hi = 0.0;
  bool plateau_ok = false;
  long long s_p = 0;
  double ratio_n = 0.0;    // log tau / n
  double ratio_ell = 0.0;  // log tau / ell_p, comparable to gamma_p
  double gamma = 0.0;
};

struct VerifyReport {
  bool passed = false;
  std::string note;
  std::vector<CheckpointReport> checkpoints;
};

// Re-derives everything checkable from the text of the point: the ledger
// re-parses the prefix exactly; every replay window and block-suffix
// condition holds; the measured first return at each checkpoint equals the
// ledger's prediction exactly, sits inside the growth sandwich, and is
// piecewise constant on the two ranges between consecutive checkpoints.
inline VerifyReport verify_point(const MoranPoint& pt) {
  VerifyReport rep;
  const auto& y = pt.prefix.symbols();
  const long long len = static_cast<long long>(y.size());
  const auto fail = [&](const std::string& why) {
    rep.passed = false;
    rep.note = why;
    return rep;
  };

  // Ledger re-parse.
  long long cursor = 0;
  for (const BlockRecord& b : pt.blocks) {
    if (b.start != cursor + 1) return fail("ledger gap before position " + std::to_string(b.start));
    if (b.start + b.length - 1 > len) return fail("ledger overruns the prefix");
    const auto matches = [&](const std::vector<Symbol>& ref) {
      return b.length == static_cast<long long>(ref.size()) &&
             std::equal(ref.begin(), ref.end(), y.begin() + (b.start - 1));
    };
    switch (b.kind) {
      case BlockRecord::Kind::Anchor:
        if (!matches(pt.vstar.symbols())) return fail("anchor block mismatch");
        break;
      case BlockRecord::Kind::Seed:
      case BlockRecord::Kind::Lambda: {
        if (b.qk_index < 0 || b.qk_index >= static_cast<long long>(pt.qk.size()))
          return fail("block references a missing seed word");
        if (!matches(pt.qk[static_cast<std::size_t>(b.qk_index)].symbols()))
          return fail("seed block mismatch at position " + std::to_string(b.start));
        break;
      }
      case BlockRecord::Kind::ThetaCopy: {
        if (b.length >= b.start) return fail("replay block not a strict prefix copy");
        if (!std::equal(y.begin(), y.begin() + b.length, y.begin() + (b.start - 1)))
          return fail("replay block differs from the prefix it copies");
        break;
      }
      case BlockRecord::Kind::Connector:
        if (b.length > pt.t) return fail("connector longer than the gap budget");
        break;
    }
    cursor = b.start + b.length - 1;
  }
  if (cursor != len) return fail("ledger does not cover the whole prefix");
  if (!admits(pt.model, pt.prefix)) return fail("prefix not admissible");

  // Seed-word sanity for replay windows.
  std::set<std::vector<Symbol>> qset;
  for (const Word& w : pt.qk) qset.insert(w.symbols());

  long long n_max = 2;
  for (const InsertionRecord& ins : pt.insertions) {
    if (ins.theta_len < 1 || ins.theta_len >= len || ins.s_p < ins.theta_len ||
        ins.s_p >= len || ins.y_len_before > len || ins.lambda_index < 0 ||
        ins.lambda_index >= static_cast<long long>(pt.qk.size()))
      return fail("checkpoint record out of range at p = " + std::to_string(ins.p));
    n_max = std::max({n_max, ins.theta_len + 1, ins.s_p + 1});
  }
  const RecurrenceTrace tr = trace(pt.prefix, n_max);
  const auto tau_at = [&](long long n) -> long long {
    const TraceEntry& e = tr.entries[static_cast<std::size_t>(n - 1)];
    return e.determined ? e.tau : -1;
  };

  bool all_ok = true;
  long long prev_theta = 0, prev_s = 0;
  double ell_sum = 0.0;
  for (std::size_t idx = 0; idx < pt.insertions.size(); ++idx) {
    const InsertionRecord& ins = pt.insertions[idx];
    CheckpointReport cp;
    cp.p = ins.p;
    cp.n = ins.theta_len;
    cp.gamma = ins.gamma;

    // Replay window conditions.
    const double off = static_cast<double>(ins.theta_len) - ins.ell;
    if (!(off >= 0.0 && off < static_cast<double>(pt.k + pt.t)))
      return fail("replay length outside its window at p = " + std::to_string(ins.p));
    if (ins.theta_len < pt.k) return fail("replay shorter than one block");
    const std::vector<Symbol> tail(y.begin() + (ins.theta_len - pt.k),
                                   y.begin() + ins.theta_len);
    if (qset.find(tail) == qset.end())
      return fail("replay prefix does not end in a seed block at p = " +
                  std::to_string(ins.p));
    if (ins.theta_len <= prev_theta || ins.theta_len <= prev_s)
      return fail("replay prefixes fail to grow strictly at p = " + std::to_string(ins.p));

    // Non-prefix property and the agreement reach s_p.
    std::vector<Symbol> probe(y.begin(), y.begin() + ins.theta_len);
    probe.insert(probe.end(), ins.w2.symbols().begin(), ins.w2.symbols().end());
    probe.insert(probe.end(),
                 pt.qk[static_cast<std::size_t>(ins.lambda_index)].symbols().begin(),
                 pt.qk[static_cast<std::size_t>(ins.lambda_index)].symbols().end());
    if (static_cast<long long>(probe.size()) <= ins.y_len_before &&
        std::equal(probe.begin(), probe.end(), y.begin()))
      return fail("replay extension is a prefix of the old stream at p = " +
                  std::to_string(ins.p));
    long long s = ins.theta_len;
    while (s < static_cast<long long>(probe.size()) && s < ins.y_len_before &&
           y[static_cast<std::size_t>(s)] == probe[static_cast<std::size_t>(s)])
      ++s;
    if (s != ins.s_p)
      return fail("agreement reach mismatch at p = " + std::to_string(ins.p));
    cp.s_p = s;

    // (i) exact first return at n = |theta^p|.
    cp.tau = tau_at(cp.n);
    cp.predicted = ins.predicted_return;
    cp.exact_match = cp.tau == cp.predicted;

    // (ii) growth sandwich: the return is at least the timing target and at
    // most the target plus all replay overhead accumulated so far.
    const double target = std::exp(ins.gamma_ell);
    cp.sandwich_lo = target;
    cp.sandwich_hi = target + static_cast<double>(pt.k + 2 * pt.t) + ell_sum +
                     static_cast<double>(idx) *
                         static_cast<double>(2 * pt.k + 4 * pt.t);
    cp.sandwich_ok = static_cast<double>(cp.tau) >= cp.sandwich_lo &&
                     static_cast<double>(cp.tau) <= cp.sandwich_hi;

    // (iii) plateaus: constant on [|theta^p|, s_p]; the previous checkpoint's
    // upper range [s_{p-1}+1, |theta^p|-1] already points at this return.
    cp.plateau_ok = true;
    for (long long n = cp.n; n <= s && cp.plateau_ok; ++n)
      if (tau_at(n) != cp.tau) cp.plateau_ok = false;
    // The lower range reaches back to the previous agreement reach, or for
    // the first checkpoint to the anchor length (shorter prefixes do not
    // start with the full anchor and recur on their own terms).
    for (long long n = (idx == 0 ? pt.k : prev_s + 1); n < cp.n && cp.plateau_ok; ++n)
      if (tau_at(n) != cp.tau) cp.plateau_ok = false;

    cp.ratio_n = std::log(static_cast<double>(cp.tau)) / static_cast<double>(cp.n);
    cp.ratio_ell = std::log(static_cast<double>(cp.tau)) / ins.ell;
    if (!cp.exact_match || !cp.sandwich_ok || !cp.plateau_ok) {
      all_ok = false;
      if (rep.note.empty())
        rep.note = std::string("checkpoint p = ") + std::to_string(ins.p) +
                   (cp.exact_match ? (cp.sandwich_ok ? " plateau breaks" : " leaves the sandwich")
                                   : " return time differs from the ledger") +
                   " at n = " + std::to_string(cp.n);
    }
    rep.checkpoints.push_back(cp);
    prev_theta = ins.theta_len;
    prev_s = s;
    ell_sum += ins.ell + static_cast<double>(pt.k + pt.t);
  }

  rep.passed = all_ok;
  if (rep.passed && rep.checkpoints.empty())
    rep.note = "no checkpoints reached below the target length";
  return rep;
}

// ---- tree statistics -------------------------------------------------------

struct DeltaStats {
  long long q_max = 0;
  long long branching = 0;      // seed-set size
  bool branching_exact = true;  // every expanded node had exactly that many
                                // distinct one-step extensions
  bool sampled = false;         // levels were truncated to sample_width
  long long words_materialized = 0;
  long long case1_ceiling = 0;  // m^(k+t+1)
  long long case2_ceiling = 0;  // m^(2k+3t+3)
  long long max_case1_ambiguity = 0;  // extensions of a one-symbol overhang
  long long max_case2_ambiguity = 0;
  std::vector<int> level_case;  // 1 or 2 per growth step
  std::vector<std::vector<long long>> level_lengths;  // distinct |y_q| per level
};

// Materializes (or samples) the tree of all seed-block choices to depth
// q_max under the fixed selection rules, and checks the counting facts the
// dimension bound rests on: every node branches into exactly one extension
// per seed block, and the number of level-(q+1) words sharing a one-symbol
// overhang of a level-q word stays under the per-case ceilings.
inline DeltaStats delta_stats(const SeedConfig& cfg, const Schedule& sched,
                              long long q_max, long long sample_width) {
  if (q_max < 1) throw DomainError("delta_stats: q_max must be >= 1");
  if (sample_width < 1) throw DomainError("delta_stats: sample_width must be >= 1");
  const long long nq = static_cast<long long>(cfg.qk.size());
  if (q_max * sample_width * nq > 50000000LL)
    throw BudgetError("delta_stats: tree walk exceeds the work budget");
  detail::require_prepared(sched, cfg.k, cfg.t);

  DeltaStats stats;
  stats.q_max = q_max;
  stats.branching = nq;
  const auto ceil_pow = [&](long long e) {
    long long v = 1;
    for (long long i = 0; i < e; ++i) {
      if (v > std::numeric_limits<long long>::max() / cfg.model().m)
        return std::numeric_limits<long long>::max();
      v *= cfg.model().m;
    }
    return v;
  };
  stats.case1_ceiling = ceil_pow(cfg.k + cfg.t + 1);
  stats.case2_ceiling = ceil_pow(2 * cfg.k + 3 * cfg.t + 3);

  std::vector<detail::BuilderState> level;
  level.push_back(detail::init_builder(cfg));
  for (long long q = 1; q <= q_max; ++q) {
    std::vector<detail::BuilderState> next;
    std::set<std::vector<Symbol>> level_words;
    std::set<long long> lengths;
    int case_seen = 0;
    for (const detail::BuilderState& parent : level) {
      std::set<std::vector<Symbol>> children;
      for (long long c = 0; c < nq; ++c) {
        detail::BuilderState child = parent;
        detail::advance(cfg, sched, child, c);
        const int this_case =
            child.insertions.size() > parent.insertions.size() ? 2 : 1;
        if (case_seen == 0) case_seen = this_case;
        else if (case_seen != this_case)
          throw DomainError("delta_stats: growth case differs across one level");
        children.insert(child.y);
        level_words.insert(child.y);
        lengths.insert(static_cast<long long>(child.y.size()));
        if (static_cast<long long>(next.size()) < sample_width)
          next.push_back(std::move(child));
        else
          stats.sampled = true;
      }
      if (static_cast<long long>(children.size()) != nq) stats.branching_exact = false;
    }
    stats.level_case.push_back(case_seen);
    stats.level_lengths.emplace_back(lengths.begin(), lengths.end());
    stats.words_materialized += static_cast<long long>(level_words.size());

    // Ambiguity at a one-symbol overhang of the first parent: how many
    // freshly materialized words continue that prefix.
    const detail::BuilderState& ref_parent = level.front();
    const long long cut = static_cast<long long>(ref_parent.y.size()) + 1;
    long long sharing = 0;
    for (const auto& w : level_words)
      if (static_cast<long long>(w.size()) >= cut &&
          std::equal(next.front().y.begin(), next.front().y.begin() + cut, w.begin()))
        ++sharing;
    if (case_seen == 2)
      stats.max_case2_ambiguity = std::max(stats.max_case2_ambiguity, sharing);
    else
      stats.max_case1_ambiguity = std::max(stats.max_case1_ambiguity, sharing);

    level = std::move(next);
  }
  return stats;
}

// ---- dimension lower bound -------------------------------------------------

struct DimensionEstimate {
  double epsilon = kDimensionEpsilon;
  long long qk_size = 0;
  double symbolic_bound = 0.0;  // log(#Q) / ((1 + 2 eps)(k + t))
  double ambiguity_log = 0.0;   // log(m^(k+t+1) + m^(2k+3t+3))
  bool interval_mode = false;
  double closed_form = 0.0;      // (h - eps) / (chi + 2 eps)
  double box_count_slope = 0.0;  // regression of log count vs -log diameter
  std::vector<std::array<double, 2>> box_points;  // (-log diam, log count)
};

// Closed-form lower bound from the seed-set count, plus (in interval mode)
// an empirical box-count slope: level-q tree words map to parameter-space
// cylinders, whose diameters shrink geometrically while counts multiply by
// the branching, so the log-log slope estimates the dimension directly.
inline DimensionEstimate dimension_lower_bound(const SeedConfig& cfg,
                                               const Schedule& sched,
                                               bool interval_mode,
                                               double epsilon = kDimensionEpsilon,
                                               long long q_depth = 3) {
  if (epsilon <= 0.0) throw DomainError("dimension_lower_bound: epsilon must be positive");
  if (q_depth < 2) throw DomainError("dimension_lower_bound: need depth >= 2");
  DimensionEstimate est;
  est.epsilon = epsilon;
  est.qk_size = static_cast<long long>(cfg.qk.size());
  const double log_q = std::log(static_cast<double>(est.qk_size));
  est.symbolic_bound =
      log_q / ((1.0 + 2.0 * epsilon) * static_cast<double>(cfg.k + cfg.t));
  const double m = static_cast<double>(cfg.model().m);
  est.ambiguity_log = detail::log_add_exp(
      static_cast<double>(cfg.k + cfg.t + 1) * std::log(m),
      static_cast<double>(2 * cfg.k + 3 * cfg.t + 3) * std::log(m));
  if (!interval_mode) return est;

  if (cfg.model().kind != SubshiftModel::Kind::IntervalCoding || !cfg.model().interval_map)
    throw DomainError("dimension_lower_bound: interval mode needs an interval-coded model");
  est.interval_mode = true;
  const AlphaBetaParams& params = *cfg.model().interval_map;
  detail::require_prepared(sched, cfg.k, cfg.t);

  detail::BuilderState st = detail::init_builder(cfg);
  for (long long q = 1; q <= q_depth; ++q) {
    detail::advance(cfg, sched, st, 0);
    const auto iv = cylinder_interval(params, Word(cfg.model().m, st.y));
    if (!iv || iv->diameter() <= 0.0)
      throw DomainError("dimension_lower_bound: tree word has no cylinder");
    est.box_points.push_back(
        {-std::log(iv->diameter()),
         static_cast<double>(q) * log_q});
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(est.box_points.size());
  for (const auto& pt : est.box_points) {
    sx += pt[0];
    sy += pt[1];
    sxx += pt[0] * pt[0];
    sxy += pt[0] * pt[1];
  }
  est.box_count_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  const double h = log_q / static_cast<double>(cfg.k + cfg.t);
  const double chi = std::log(params.beta);
  est.closed_form = (h - epsilon) / (chi + 2.0 * epsilon);
  return est;
}

}  // namespace recur
