#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "recur/word.hpp"

namespace recur {

// Return-time answer on a finite prefix. A finite prefix cannot certify the
// absence of a return, so the undetermined case reports what was verified:
// every k with 1 <= k <= lower_bound fails to return.
struct ReturnTime {
  bool determined = false;
  long long tau = 0;         // least k with x_{i+k} = x_i for i = 1..n
  long long lower_bound = 0; // meaningful when !determined
};

// lcp[k] = length of the longest common prefix of s and s shifted left by k.
// Classic linear scan; lcp[0] = |s|.
inline std::vector<long long> self_match_table(const std::vector<Symbol>& s) {
  const long long n = static_cast<long long>(s.size());
  std::vector<long long> z(s.size(), 0);
  if (n == 0) return z;
  z[0] = n;
  long long l = 0, r = 0;
  for (long long i = 1; i < n; ++i) {
    if (i < r) z[i] = std::min(r - i, z[i - l]);
    while (i + z[i] < n && s[z[i]] == s[i + z[i]]) ++z[i];
    if (i + z[i] > r) { l = i; r = i + z[i]; }
  }
  return z;
}

// Least k >= 1 such that the k-shift of x matches x on the first n symbols,
// decidable only when k + n <= |x|.
inline ReturnTime first_return(const SymbolicPrefix& x, long long n) {
  if (n < 1) throw DomainError("first_return: n must be >= 1");
  const long long len = static_cast<long long>(x.size());
  ReturnTime out;
  out.lower_bound = std::max<long long>(0, len - n);
  const auto z = self_match_table(x.symbols());
  for (long long k = 1; k + n <= len; ++k) {
    if (z[k] >= n) {
      out.determined = true;
      out.tau = k;
      break;
    }
  }
  return out;
}

struct TraceEntry {
  long long n = 0;
  bool determined = false;
  long long tau = 0;
  long long lower_bound = 0;            // every k <= lower_bound fails, when undetermined
  double ratio = 0.0;                   // log(tau)/n when determined
};

struct RecurrenceTrace {
  long long prefix_length = 0;
  std::vector<TraceEntry> entries;  // n = 1..n_max in order
};

// Return times for every cylinder depth n = 1..n_max in one linear pass:
// tau_n = min{k : lcp[k] >= n} is non-decreasing in n, so a single forward
// pointer over the table serves all depths.
inline RecurrenceTrace trace(const SymbolicPrefix& x, long long n_max) {
  if (n_max < 1) throw DomainError("trace: n_max must be >= 1");
  const long long len = static_cast<long long>(x.size());
  RecurrenceTrace tr;
  tr.prefix_length = len;
  tr.entries.reserve(static_cast<std::size_t>(n_max));
  const auto z = self_match_table(x.symbols());
  long long k = 1;
  for (long long n = 1; n <= n_max; ++n) {
    while (k < len && z[k] < n) ++k;
    TraceEntry e;
    e.n = n;
    if (k < len && z[k] >= n) {
      e.determined = true;
      e.tau = k;
      e.ratio = std::log(static_cast<double>(k)) / static_cast<double>(n);
    } else {
      e.determined = false;
      e.lower_bound = std::max<long long>(0, len - n);
    }
    tr.entries.push_back(e);
  }
  return tr;
}

// Windowed min/max of log(tau_n)/n over n in [tail_start, n_max]. A finite
// stand-in for the liminf/limsup pair; the window is always explicit.
inline std::pair<double, double> rate_bounds(const RecurrenceTrace& tr, long long tail_start) {
  const long long n_max = static_cast<long long>(tr.entries.size());
  if (tail_start < 1 || tail_start >= n_max)
    throw DomainError("rate_bounds: tail_start must lie in [1, n_max)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (long long n = tail_start; n <= n_max; ++n) {
    const TraceEntry& e = tr.entries[static_cast<std::size_t>(n - 1)];
    if (!e.determined)
      throw DomainError("rate_bounds: undetermined entry in the tail window");
    lo = std::min(lo, e.ratio);
    hi = std::max(hi, e.ratio);
  }
  return {lo, hi};
}

// ---- Seeded sampling ----

// Derives an independent stream seed for one sample of an experiment. Keeps
// results identical no matter how samples are scheduled.
inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform [0,1) built from the engine's fully specified output; no
// implementation-defined distribution adapters, so streams are portable.
inline double next_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline Symbol draw_from(const std::vector<double>& probs, std::mt19937_64& g) {
  const double u = next_unit(g);
  double c = 0.0;
  for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
    c += probs[j];
    if (u < c) return static_cast<Symbol>(j);
  }
  return static_cast<Symbol>(probs.size() - 1);
}

// Symbol-sequence sampler: independent draws or a finite-state chain.
struct SamplerSpec {
  enum class Kind { Bernoulli, Markov };
  Kind kind = Kind::Bernoulli;
  std::vector<double> probs;                     // Bernoulli law over symbols
  std::vector<std::vector<double>> transition;   // Markov rows, row-stochastic
  std::vector<double> initial;                   // Markov start law

  static SamplerSpec bernoulli(std::vector<double> p) {
    SamplerSpec s;
    s.kind = Kind::Bernoulli;
    s.probs = std::move(p);
    s.validate();
    return s;
  }

  static SamplerSpec markov(std::vector<std::vector<double>> rows, std::vector<double> init) {
    SamplerSpec s;
    s.kind = Kind::Markov;
    s.transition = std::move(rows);
    s.initial = std::move(init);
    s.validate();
    return s;
  }

  int alphabet_size() const {
    return static_cast<int>(kind == Kind::Bernoulli ? probs.size() : transition.size());
  }

  void validate() const {
    auto check_law = [](const std::vector<double>& p, const char* what) {
      if (p.size() < 2) throw DomainError(std::string(what) + ": need at least 2 symbols");
      double sum = 0.0;
      for (double v : p) {
        if (v < 0.0) throw DomainError(std::string(what) + ": negative probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw DomainError(std::string(what) + ": probabilities must sum to 1");
    };
    if (kind == Kind::Bernoulli) {
      check_law(probs, "sampler");
    } else {
      if (transition.size() < 2) throw DomainError("sampler: need at least 2 states");
      for (const auto& row : transition) {
        if (row.size() != transition.size())
          throw DomainError("sampler: transition matrix must be square");
        check_law(row, "sampler row");
      }
      if (initial.size() != transition.size())
        throw DomainError("sampler: initial law size mismatch");
      check_law(initial, "sampler initial");
    }
  }

  // Entropy of the sampled process: -sum p log p, or the stationary-weighted
  // row entropies of the chain (stationary law via iterated application).
  double entropy() const {
    auto h_of = [](const std::vector<double>& p) {
      double h = 0.0;
      for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
      return h;
    };
    if (kind == Kind::Bernoulli) return h_of(probs);
    std::vector<double> pi = initial;
    for (int iter = 0; iter < 500; ++iter) {
      std::vector<double> next(pi.size(), 0.0);
      for (std::size_t i = 0; i < pi.size(); ++i)
        for (std::size_t j = 0; j < pi.size(); ++j) next[j] += pi[i] * transition[i][j];
      pi.swap(next);
    }
    double h = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) h += pi[i] * h_of(transition[i]);
    return h;
  }

  std::vector<Symbol> sample_sequence(long long length, std::uint64_t seed) const {
    std::mt19937_64 g(seed);
    std::vector<Symbol> out;
    out.reserve(static_cast<std::size_t>(length));
    if (kind == Kind::Bernoulli) {
      for (long long i = 0; i < length; ++i) out.push_back(draw_from(probs, g));
    } else {
      Symbol state = draw_from(initial, g);
      out.push_back(state);
      for (long long i = 1; i < length; ++i) {
        state = draw_from(transition[static_cast<std::size_t>(state)], g);
        out.push_back(state);
      }
    }
    return out;
  }
};

struct ExperimentSample {
  bool censored = false;
  long long tau = 0;     // valid when !censored
  double ratio = 0.0;    // log(tau)/n; +inf when censored
};

struct ExperimentSummary {
  int n = 0;
  int num_samples = 0;
  long long horizon = 0;
  double reference_entropy = 0.0;
  int censored_count = 0;
  double median_ratio = 0.0;  // censored samples rank as +inf
  double mean_ratio = 0.0;    // over determined samples only
  double iqr_low = 0.0;
  double iqr_high = 0.0;
  std::vector<ExperimentSample> samples;
};

// Draws num_samples sequences, measures the first return of each into its own
// depth-n cylinder within the horizon, and summarizes log(tau)/n against the
// sampler's entropy. Fully determined by (spec, n, num_samples, horizon, seed).
inline ExperimentSummary ornstein_weiss_experiment(const SamplerSpec& spec, int n,
                                                   int num_samples, long long horizon,
                                                   std::uint64_t seed) {
  if (n < 1) throw DomainError("experiment: n must be >= 1");
  if (num_samples < 1) throw DomainError("experiment: need at least one sample");
  if (horizon < 1) throw DomainError("experiment: horizon must be >= 1");
  spec.validate();

  ExperimentSummary out;
  out.n = n;
  out.num_samples = num_samples;
  out.horizon = horizon;
  out.reference_entropy = spec.entropy();
  out.samples.reserve(static_cast<std::size_t>(num_samples));

  const int m = spec.alphabet_size();
  for (int i = 0; i < num_samples; ++i) {
    // horizon + n symbols make k = horizon the last decidable return step.
    auto seq = spec.sample_sequence(horizon + n, split_seed(seed, static_cast<std::uint64_t>(i)));
    ReturnTime rt = first_return(Word(m, std::move(seq)), n);
    ExperimentSample s;
    if (rt.determined && rt.tau <= horizon) {
      s.censored = false;
      s.tau = rt.tau;
      s.ratio = std::log(static_cast<double>(rt.tau)) / static_cast<double>(n);
    } else {
      s.censored = true;
      s.ratio = std::numeric_limits<double>::infinity();
      ++out.censored_count;
    }
    out.samples.push_back(s);
  }

  std::vector<double> ranked;
  ranked.reserve(out.samples.size());
  double mean = 0.0;
  int determined = 0;
  for (const auto& s : out.samples) {
    ranked.push_back(s.ratio);
    if (!s.censored) {
      mean += s.ratio;
      ++determined;
    }
  }
  std::sort(ranked.begin(), ranked.end());
  const std::size_t N = ranked.size();
  out.median_ratio = (N % 2 == 1) ? ranked[N / 2] : 0.5 * (ranked[N / 2 - 1] + ranked[N / 2]);
  out.mean_ratio = determined > 0 ? mean / determined : std::numeric_limits<double>::quiet_NaN();
  auto rank = [&](double q) {
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(N)));
    return ranked[std::min(N - 1, idx > 0 ? idx - 1 : 0)];
  };
  out.iqr_low = rank(0.25);
  out.iqr_high = rank(0.75);
  return out;
}

}  // namespace recur
