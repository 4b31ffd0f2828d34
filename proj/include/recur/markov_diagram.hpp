#pragma once

// Markov diagram of a coding space: the vertex set is grown level by level
// from the 1-cylinders via the successor relation D = [j] ∩ σC, then analyzed
// for its irreducible part (strongly connected component analysis plus
// spectral growth), gap sizes between core vertices, the good-word set, a
// connector-word search, and distinct-word path counting.
//
// Conventions fixed here and relied on by tests and the CLI:
//   * A path of n vertices spells a word of length n (one symbol per vertex,
//     the vertex's 1-cylinder tag). A connecting path of e edges therefore
//     contributes e-1 symbols strictly between the two endpoint words.
//   * gap sizes are reported both ways: `edge_gap` counts edges on the
//     longest shortest connecting path (>= 1), `word_gap` = edge_gap - 1 is
//     the length bound for connector words.
//   * Vertex identity for interval codings is toleranced endpoint equality
//     (1e-9): iterated endpoints are transcendental in general, and genuine
//     distinct endpoints at tested depths stay far above that resolution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "recur/errors.hpp"
#include "recur/interval_maps.hpp"
#include "recur/shift_models.hpp"
#include "recur/word.hpp"

namespace recur {

inline constexpr double kVertexMergeTol = 1e-9;

struct DiagramVertex {
  int id = -1;
  Symbol symbol = 0;  // the 1-cylinder this vertex lives in
  int level = 0;      // least n with vertex in D_n
  bool is_interval = false;
  double lo = 0.0, hi = 0.0;  // interval representation, when is_interval
  std::string state_key;      // canonical follower description otherwise

  std::string repr() const {
    std::ostringstream os;
    if (is_interval) {
      os.setf(std::ios::fixed);
      os.precision(9);
      os << "[" << lo << "," << hi << "]#" << symbol;
    } else {
      os << state_key << "#" << symbol;
    }
    return os.str();
  }
};

struct MarkovDiagram {
  SubshiftModel model;
  int built_to = 0;
  bool stabilized = false;     // no new vertices appeared at the last level
  bool frontier_open = false;  // deepest vertices have unmaterialized successors
  std::vector<DiagramVertex> vertices;
  // out[v] = (symbol, target id), sorted by symbol; at most one edge per
  // symbol because [j] ∩ σC is a single vertex.
  std::vector<std::vector<std::pair<Symbol, int>>> out;
};

namespace detail {

// ---- follower-state machines per model family ------------------------------
//
// A symbolic vertex is (tag, state) where the state is a canonical finite
// description of the follower set. Interval vertices carry closed intervals.

struct SftState {
  // Sorted (forbidden index, overlap length >= 1): every suffix of the read
  // word that is a proper prefix of a forbidden word. Equal profiles give
  // equal follower sets, because a forbidden word can only straddle the
  // boundary through exactly these overlaps.
  std::vector<std::pair<int, int>> overlaps;
};

inline std::optional<SftState> sft_step(const SubshiftModel& model,
                                        const SftState& st, Symbol s) {
  SftState next;
  const auto push = [&](int f, int len) {
    const auto p = std::make_pair(f, len);
    if (std::find(next.overlaps.begin(), next.overlaps.end(), p) ==
        next.overlaps.end())
      next.overlaps.push_back(p);
  };
  for (const auto& [f, len] : st.overlaps) {
    const auto& fw = model.forbidden[static_cast<std::size_t>(f)].symbols();
    if (fw[static_cast<std::size_t>(len)] == s) {
      if (static_cast<std::size_t>(len) + 1 == fw.size())
        return std::nullopt;  // completed a forbidden word
      push(f, len + 1);
    }
  }
  for (int f = 0; f < static_cast<int>(model.forbidden.size()); ++f) {
    const auto& fw = model.forbidden[static_cast<std::size_t>(f)].symbols();
    if (fw[0] == s) {
      if (fw.size() == 1) return std::nullopt;
      push(f, 1);
    }
  }
  std::sort(next.overlaps.begin(), next.overlaps.end());
  return next;
}

struct GapState {
  bool seen_one = false;
  long long zeros = 0;  // trailing zero-run length, capped at state_cap
};

inline long long gap_state_cap(const SubshiftModel& model) {
  if (model.gaps.ray_min) return *model.gaps.ray_min;
  return *model.gaps.finite.rbegin();
}

inline std::optional<GapState> gap_step(const SubshiftModel& model,
                                        const GapState& st, Symbol s) {
  const long long cap = gap_state_cap(model);
  if (s == 1) {
    if (st.seen_one && !model.gaps.contains(st.zeros))
      return std::nullopt;  // closing an interior run of a disallowed length
    return GapState{true, 0};
  }
  // Continue the current zero-run; it must stay completable.
  if (!model.gaps.any_at_least(st.zeros + 1)) return std::nullopt;
  return GapState{st.seen_one, std::min(st.zeros + 1, cap)};
}

struct CodedState {
  // Sorted (generator index, offset): "about to read generator[offset]".
  std::vector<std::pair<int, int>> positions;
};

inline void coded_insert(std::vector<std::pair<int, int>>& ps, int g, int o) {
  const auto p = std::make_pair(g, o);
  const auto it = std::lower_bound(ps.begin(), ps.end(), p);
  if (it == ps.end() || *it != p) ps.insert(it, p);
}

inline std::optional<CodedState> coded_step(const SubshiftModel& model,
                                            const CodedState& st, Symbol s) {
  CodedState next;
  const auto advance = [&](int g, int o) {
    const auto& gw = model.generators[static_cast<std::size_t>(g)].symbols();
    if (gw[static_cast<std::size_t>(o)] != s) return;
    if (static_cast<std::size_t>(o) + 1 == gw.size()) {
      // Generator boundary: any generator may start next.
      for (int g2 = 0; g2 < static_cast<int>(model.generators.size()); ++g2)
        coded_insert(next.positions, g2, 0);
    } else {
      coded_insert(next.positions, g, o + 1);
    }
  };
  for (const auto& [g, o] : st.positions) advance(g, o);
  if (next.positions.empty()) return std::nullopt;
  return next;
}

// Canonical key strings.
inline std::string key_of(const SftState& st) {
  std::string k = "S";
  for (const auto& [f, len] : st.overlaps)
    k += "(" + std::to_string(f) + ":" + std::to_string(len) + ")";
  return k;
}
inline std::string key_of(const GapState& st) {
  return (st.seen_one ? "G" : "B") + std::to_string(st.zeros);
}
inline std::string key_of(const CodedState& st) {
  std::string k = "C";
  for (const auto& [g, o] : st.positions)
    k += "(" + std::to_string(g) + ":" + std::to_string(o) + ")";
  return k;
}

// Type-erased follower state used during construction.
struct AnyState {
  SftState sft;
  GapState gap;
  CodedState coded;
  double lo = 0.0, hi = 0.0;  // interval kinds
};

struct ChildRep {
  Symbol symbol;
  AnyState state;
  std::string key;   // canonical identity key for symbolic kinds
  double lo = 0.0, hi = 0.0;
  bool is_interval = false;
};

inline std::vector<std::pair<double, double>> closed_branches(
    const AlphaBetaParams& p) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [l, r] : branch_intervals(p)) out.emplace_back(l, r);
  return out;
}

}  // namespace detail

inline MarkovDiagram build_diagram(const SubshiftModel& model, int N,
                                   long long vertex_budget = 100000) {
  if (N < 0) throw DomainError("build_diagram: depth must be >= 0");
  if (vertex_budget <= 0)
    throw DomainError("build_diagram: vertex budget must be positive");
  MarkovDiagram dg;
  dg.model = model;
  dg.built_to = N;

  const bool interval = model.kind == SubshiftModel::Kind::IntervalCoding;
  std::vector<std::pair<double, double>> branches;
  if (interval) branches = detail::closed_branches(*model.interval_map);

  struct Pending {
    detail::AnyState state;
    Symbol symbol;
    std::string key;
    double lo = 0.0, hi = 0.0;
  };

  // Children of one materialized vertex, one candidate per outgoing symbol.
  const auto children_of = [&](const DiagramVertex& v,
                               const detail::AnyState& st) {
    std::vector<detail::ChildRep> kids;
    for (Symbol j = 0; j < model.m; ++j) {
      detail::ChildRep c;
      c.symbol = j;
      c.is_interval = interval;
      if (interval) {
        const auto& p = *model.interval_map;
        double ilo = p.beta * v.lo + p.alpha - v.symbol;
        double ihi = p.beta * v.hi + p.alpha - v.symbol;
        ilo = std::max(0.0, ilo);
        ihi = std::min(1.0, ihi);
        const double lo = std::max(ilo, branches[static_cast<std::size_t>(j)].first);
        const double hi = std::min(ihi, branches[static_cast<std::size_t>(j)].second);
        if (hi - lo <= kVertexMergeTol) continue;
        c.lo = c.state.lo = lo;
        c.hi = c.state.hi = hi;
      } else {
        switch (model.kind) {
          case SubshiftModel::Kind::Full:
            c.key = "F";
            break;
          case SubshiftModel::Kind::SFT: {
            const auto next = detail::sft_step(model, st.sft, j);
            if (!next) continue;
            c.state.sft = *next;
            c.key = detail::key_of(*next);
            break;
          }
          case SubshiftModel::Kind::SGap: {
            const auto next = detail::gap_step(model, st.gap, j);
            if (!next) continue;
            c.state.gap = *next;
            c.key = detail::key_of(*next);
            break;
          }
          case SubshiftModel::Kind::Coded: {
            const auto next = detail::coded_step(model, st.coded, j);
            if (!next) continue;
            c.state.coded = *next;
            c.key = detail::key_of(*next);
            break;
          }
          default:
            throw DomainError("build_diagram: unsupported model kind");
        }
      }
      kids.push_back(std::move(c));
    }
    return kids;
  };

  // Level-0 seeds: one vertex per non-empty 1-cylinder.
  std::vector<Pending> seeds;
  for (Symbol j = 0; j < model.m; ++j) {
    Pending s;
    s.symbol = j;
    if (interval) {
      s.lo = s.state.lo = branches[static_cast<std::size_t>(j)].first;
      s.hi = s.state.hi = branches[static_cast<std::size_t>(j)].second;
      if (s.hi - s.lo <= kVertexMergeTol) continue;
    } else {
      switch (model.kind) {
        case SubshiftModel::Kind::Full:
          s.key = "F";
          break;
        case SubshiftModel::Kind::SFT: {
          const auto st = detail::sft_step(model, detail::SftState{}, j);
          if (!st) continue;
          s.state.sft = *st;
          s.key = detail::key_of(*st);
          break;
        }
        case SubshiftModel::Kind::SGap: {
          const auto st =
              detail::gap_step(model, detail::GapState{false, 0}, j);
          if (!st) continue;
          s.state.gap = *st;
          s.key = detail::key_of(*st);
          break;
        }
        case SubshiftModel::Kind::Coded: {
          // A word may start anywhere inside any generator.
          detail::CodedState all;
          for (int g = 0; g < static_cast<int>(model.generators.size()); ++g)
            for (int o = 0;
                 o < static_cast<int>(model.generators[static_cast<std::size_t>(g)].size());
                 ++o)
              detail::coded_insert(all.positions, g, o);
          const auto st = detail::coded_step(model, all, j);
          if (!st) continue;
          s.state.coded = *st;
          s.key = detail::key_of(*st);
          break;
        }
        default:
          throw DomainError("build_diagram: unsupported model kind");
      }
    }
    seeds.push_back(std::move(s));
  }

  std::vector<detail::AnyState> states;  // parallel to dg.vertices
  // Find an existing vertex with this identity, or -1.
  const auto find_vertex = [&](Symbol sym, bool is_interval, double lo,
                               double hi, const std::string& key) {
    for (const auto& v : dg.vertices) {
      if (v.symbol != sym) continue;
      if (is_interval) {
        if (std::abs(v.lo - lo) <= kVertexMergeTol &&
            std::abs(v.hi - hi) <= kVertexMergeTol)
          return v.id;
      } else if (v.state_key == key) {
        return v.id;
      }
    }
    return -1;
  };
  const auto add_vertex = [&](Symbol sym, bool is_iv, double lo, double hi,
                              const std::string& key,
                              const detail::AnyState& st, int level) {
    if (static_cast<long long>(dg.vertices.size()) >= vertex_budget)
      throw BudgetError("build_diagram: vertex budget " +
                        std::to_string(vertex_budget) + " exhausted");
    DiagramVertex v;
    v.id = static_cast<int>(dg.vertices.size());
    v.symbol = sym;
    v.level = level;
    v.is_interval = is_iv;
    v.lo = lo;
    v.hi = hi;
    v.state_key = key;
    dg.vertices.push_back(v);
    dg.out.emplace_back();
    states.push_back(st);
    return v.id;
  };

  // Seeds are already in canonical (symbol) order.
  for (auto& s : seeds)
    add_vertex(s.symbol, interval, s.lo, s.hi, s.key, s.state, 0);

  std::size_t processed = 0;  // vertices whose out-edges are final
  for (int level = 1; level <= N; ++level) {
    const std::size_t frontier_end = dg.vertices.size();
    if (processed == frontier_end) {
      dg.stabilized = true;
      break;
    }
    // Phase 1: children of the frontier, in vertex order.
    struct Edge {
      int src;
      detail::ChildRep child;
    };
    std::vector<Edge> pending;
    for (std::size_t i = processed; i < frontier_end; ++i)
      for (auto& c : children_of(dg.vertices[i], states[i]))
        pending.push_back({static_cast<int>(i), std::move(c)});
    // Phase 2: resolve novel representations; new ids sorted by representation.
    std::vector<const detail::ChildRep*> novel;
    for (const auto& e : pending) {
      const auto& c = e.child;
      if (find_vertex(c.symbol, c.is_interval, c.lo, c.hi, c.key) >= 0) continue;
      bool dup = false;
      for (const auto* n : novel) {
        if (n->symbol != c.symbol) continue;
        if (c.is_interval
                ? (std::abs(n->lo - c.lo) <= kVertexMergeTol &&
                   std::abs(n->hi - c.hi) <= kVertexMergeTol)
                : n->key == c.key) {
          dup = true;
          break;
        }
      }
      if (!dup) novel.push_back(&e.child);
    }
    std::sort(novel.begin(), novel.end(),
              [](const detail::ChildRep* a, const detail::ChildRep* b) {
                if (a->symbol != b->symbol) return a->symbol < b->symbol;
                if (a->is_interval)
                  return std::make_pair(a->lo, a->hi) <
                         std::make_pair(b->lo, b->hi);
                return a->key < b->key;
              });
    for (const auto* c : novel)
      add_vertex(c->symbol, c->is_interval, c->lo, c->hi, c->key, c->state,
                 level);
    // Phase 3: record the frontier's edges.
    for (const auto& e : pending) {
      const auto& c = e.child;
      const int tgt = find_vertex(c.symbol, c.is_interval, c.lo, c.hi, c.key);
      dg.out[static_cast<std::size_t>(e.src)].emplace_back(c.symbol, tgt);
    }
    processed = frontier_end;
  }
  if (processed == dg.vertices.size()) dg.stabilized = true;

  // Deepest level: record edges into existing vertices only; novel successors
  // mark the frontier as open.
  for (std::size_t i = processed; i < dg.vertices.size(); ++i)
    for (const auto& c : children_of(dg.vertices[i], states[i])) {
      const int tgt = find_vertex(c.symbol, c.is_interval, c.lo, c.hi, c.key);
      if (tgt >= 0)
        dg.out[i].emplace_back(c.symbol, tgt);
      else
        dg.frontier_open = true;
    }
  for (auto& edges : dg.out) std::sort(edges.begin(), edges.end());
  return dg;
}

inline const std::vector<std::pair<Symbol, int>>& successors(
    const MarkovDiagram& dg, int v) {
  if (v < 0 || v >= static_cast<int>(dg.vertices.size()))
    throw DomainError("successors: vertex id out of range");
  return dg.out[static_cast<std::size_t>(v)];
}

struct IrreducibleComponent {
  bool found = false;
  std::vector<int> component;  // C: successor-closed, sorted ids
  std::vector<int> core;       // F: vertices of the chosen SCC with level <= N
  double spectral_radius = 0.0;
  std::string note;
};

namespace detail {

// Iterative Tarjan strongly-connected components; returns component index per
// vertex, components numbered in reverse topological order.
inline std::vector<int> tarjan_scc(const MarkovDiagram& dg, int& count) {
  const int n = static_cast<int>(dg.vertices.size());
  std::vector<int> index(static_cast<std::size_t>(n), -1),
      low(static_cast<std::size_t>(n), 0), comp(static_cast<std::size_t>(n), -1);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  int next_index = 0;
  count = 0;
  struct Frame {
    int v;
    std::size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] =
        next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      auto& fr = call.back();
      const auto& edges = dg.out[static_cast<std::size_t>(fr.v)];
      if (fr.edge < edges.size()) {
        const int w = edges[fr.edge].second;
        ++fr.edge;
        if (w < 0) continue;
        if (index[static_cast<std::size_t>(w)] == -1) {
          index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] =
              next_index++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = 1;
          call.push_back({w, 0});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(fr.v)] = std::min(
              low[static_cast<std::size_t>(fr.v)], index[static_cast<std::size_t>(w)]);
        }
      } else {
        const int v = fr.v;
        call.pop_back();
        if (!call.empty())
          low[static_cast<std::size_t>(call.back().v)] =
              std::min(low[static_cast<std::size_t>(call.back().v)],
                       low[static_cast<std::size_t>(v)]);
        if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
          while (true) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = 0;
            comp[static_cast<std::size_t>(w)] = count;
            if (w == v) break;
          }
          ++count;
        }
      }
    }
  }
  return comp;
}

// Spectral radius of the multiplicity adjacency restricted to `members`.
inline double spectral_radius_of(const MarkovDiagram& dg,
                                 const std::vector<int>& members) {
  std::map<int, int> idx;
  for (int i = 0; i < static_cast<int>(members.size()); ++i)
    idx[members[static_cast<std::size_t>(i)]] = i;
  const int n = static_cast<int>(members.size());
  std::vector<std::vector<int>> a(static_cast<std::size_t>(n),
                                  std::vector<int>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i)
    for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(
             members[static_cast<std::size_t>(i)])]) {
      (void)sym;
      const auto it = idx.find(tgt);
      if (it != idx.end()) ++a[static_cast<std::size_t>(i)][static_cast<std::size_t>(it->second)];
    }
  std::vector<double> v(static_cast<std::size_t>(n), 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        w[static_cast<std::size_t>(i)] +=
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
            v[static_cast<std::size_t>(j)];
    double norm = 0.0;
    for (double x : w) norm = std::max(norm, x);
    if (norm == 0.0) return 0.0;
    for (double& x : w) x /= norm;
    lambda = norm;
    v = std::move(w);
  }
  return lambda;
}

}  // namespace detail

inline IrreducibleComponent irreducible_component(const MarkovDiagram& dg,
                                                  int N) {
  IrreducibleComponent result;
  if (dg.vertices.empty()) {
    result.note = "empty diagram";
    return result;
  }
  int comp_count = 0;
  const auto comp = detail::tarjan_scc(dg, comp_count);
  // Collect non-trivial SCCs: size >= 2 or a self-loop.
  std::vector<std::vector<int>> sccs(static_cast<std::size_t>(comp_count));
  for (int v = 0; v < static_cast<int>(dg.vertices.size()); ++v)
    sccs[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])].push_back(v);
  std::vector<int> candidates;
  for (int c = 0; c < comp_count; ++c) {
    const auto& members = sccs[static_cast<std::size_t>(c)];
    bool nontrivial = members.size() >= 2;
    if (!nontrivial)
      for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(members[0])]) {
        (void)sym;
        if (tgt == members[0]) nontrivial = true;
      }
    if (nontrivial) candidates.push_back(c);
  }
  if (candidates.empty()) {
    result.note = "no non-trivial strongly connected component at this depth";
    return result;
  }
  // Pick the SCC with maximal spectral radius; ties by earliest level, then
  // smallest vertex id.
  int best = -1;
  double best_lambda = -1.0;
  int best_level = 0, best_id = 0;
  for (int c : candidates) {
    const auto& members = sccs[static_cast<std::size_t>(c)];
    const double lambda = detail::spectral_radius_of(dg, members);
    int min_level = dg.vertices[static_cast<std::size_t>(members[0])].level;
    int min_id = members[0];
    for (int v : members) {
      min_level = std::min(min_level, dg.vertices[static_cast<std::size_t>(v)].level);
      min_id = std::min(min_id, v);
    }
    const bool better =
        lambda > best_lambda + 1e-9 ||
        (std::abs(lambda - best_lambda) <= 1e-9 &&
         (min_level < best_level ||
          (min_level == best_level && min_id < best_id)));
    if (best < 0 || better) {
      best = c;
      best_lambda = lambda;
      best_level = min_level;
      best_id = min_id;
    }
  }
  const auto& core_scc = sccs[static_cast<std::size_t>(best)];
  // Close under successors.
  std::vector<char> in_c(dg.vertices.size(), 0);
  std::vector<int> queue = core_scc;
  for (int v : core_scc) in_c[static_cast<std::size_t>(v)] = 1;
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(v)]) {
      (void)sym;
      if (tgt >= 0 && !in_c[static_cast<std::size_t>(tgt)]) {
        in_c[static_cast<std::size_t>(tgt)] = 1;
        queue.push_back(tgt);
      }
    }
  }
  for (int v = 0; v < static_cast<int>(dg.vertices.size()); ++v)
    if (in_c[static_cast<std::size_t>(v)]) result.component.push_back(v);
  for (int v : core_scc)
    if (dg.vertices[static_cast<std::size_t>(v)].level <= N)
      result.core.push_back(v);
  std::sort(result.core.begin(), result.core.end());
  result.spectral_radius = best_lambda;
  result.found = !result.core.empty();
  if (!result.found)
    result.note = "irreducible part has no vertex within depth " +
                  std::to_string(N);
  return result;
}

// The language decomposition at depth N: the irreducible part C, the finite
// core F, and the set of "good endpoints" D_N ∩ C used by the good-word set.
struct DecompositionN {
  int N = 0;
  std::vector<int> component;       // C
  std::vector<int> core;            // F
  std::vector<int> good_endpoints;  // D_N ∩ C
  double spectral_radius = 0.0;
};

inline DecompositionN make_decomposition(const MarkovDiagram& dg, int N) {
  if (N < 0) throw DomainError("make_decomposition: depth must be >= 0");
  if (N > dg.built_to && !dg.stabilized)
    throw DomainError("make_decomposition: diagram not built to this depth");
  const auto irr = irreducible_component(dg, N);
  if (!irr.found)
    throw DomainError("make_decomposition: no irreducible part: " + irr.note);
  DecompositionN d;
  d.N = N;
  d.component = irr.component;
  d.core = irr.core;
  d.spectral_radius = irr.spectral_radius;
  for (int v : irr.component)
    if (dg.vertices[static_cast<std::size_t>(v)].level <= N)
      d.good_endpoints.push_back(v);
  return d;
}

struct GapInfo {
  long long edge_gap = 0;  // max over ordered pairs of min connecting edges
  long long word_gap = 0;  // edge_gap - 1: symbols strictly between blocks
};

// Minimal t such that every ordered pair of good endpoints is joined by a
// path of at most t edges (paths of at least one edge, so the diagonal needs
// a genuine cycle). Coded models glue at generator boundaries, which is the
// word-gap-0 fast path.
inline GapInfo gap_size(const MarkovDiagram& dg, const DecompositionN& d) {
  if (dg.model.kind == SubshiftModel::Kind::Coded) return {1, 0};
  if (d.good_endpoints.empty())
    throw DomainError("gap_size: no good endpoints at this depth");
  long long worst = 0;
  const int n = static_cast<int>(dg.vertices.size());
  for (int u : d.good_endpoints) {
    // Multi-source BFS from the successors of u at distance 1.
    std::vector<long long> dist(static_cast<std::size_t>(n), -1);
    std::vector<int> frontier;
    for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(u)]) {
      (void)sym;
      if (tgt >= 0 && dist[static_cast<std::size_t>(tgt)] < 0) {
        dist[static_cast<std::size_t>(tgt)] = 1;
        frontier.push_back(tgt);
      }
    }
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int v : frontier)
        for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(v)]) {
          (void)sym;
          if (tgt >= 0 && dist[static_cast<std::size_t>(tgt)] < 0) {
            dist[static_cast<std::size_t>(tgt)] =
                dist[static_cast<std::size_t>(v)] + 1;
            next.push_back(tgt);
          }
        }
      frontier = std::move(next);
    }
    for (int v : d.good_endpoints) {
      if (dist[static_cast<std::size_t>(v)] < 0)
        throw DomainError(
            "gap_size: no connecting path from " +
            dg.vertices[static_cast<std::size_t>(u)].repr() + " to " +
            dg.vertices[static_cast<std::size_t>(v)].repr() +
            " at truncation depth " + std::to_string(dg.built_to));
      worst = std::max(worst, dist[static_cast<std::size_t>(v)]);
    }
  }
  return {worst, std::max<long long>(0, worst - 1)};
}

namespace detail {

// Is w exactly a concatenation of the model's generators?
inline bool exact_concatenation(const SubshiftModel& model, const Word& w) {
  if (w.empty()) return true;
  const auto& s = w.symbols();
  std::vector<char> reach(s.size() + 1, 0);
  reach[0] = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!reach[i]) continue;
    for (const Word& gw : model.generators) {
      const auto& g = gw.symbols();
      if (i + g.size() > s.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < g.size(); ++k)
        if (s[i + k] != g[k]) {
          ok = false;
          break;
        }
      if (ok) reach[i + g.size()] = 1;
    }
  }
  return reach[s.size()] != 0;
}

// Evolve a set of current vertices by one symbol (diagram is symbol-
// deterministic per vertex). Empty result means no path spells the word.
inline std::vector<int> evolve(const MarkovDiagram& dg,
                               const std::vector<int>& current, Symbol s) {
  std::vector<int> next;
  for (int v : current)
    for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(v)])
      if (sym == s && tgt >= 0) next.push_back(tgt);
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return next;
}

}  // namespace detail

// Membership in the good set G^N: some diagram path spelling w (one symbol
// per vertex) starts and ends in D_N ∩ C. The empty word is always good.
// Coded models use the generator-boundary fast path: good = exact
// concatenations of generators.
inline bool in_good_set(const MarkovDiagram& dg, const DecompositionN& d,
                        const Word& w) {
  if (w.alphabet_size() != dg.model.m)
    throw DomainError("in_good_set: word alphabet does not match the model");
  if (w.empty()) return true;
  if (dg.model.kind == SubshiftModel::Kind::Coded)
    return detail::exact_concatenation(dg.model, w);
  const auto& syms = w.symbols();
  std::vector<char> good(dg.vertices.size(), 0);
  for (int v : d.good_endpoints) good[static_cast<std::size_t>(v)] = 1;
  std::vector<int> current;
  for (int v : d.good_endpoints)
    if (dg.vertices[static_cast<std::size_t>(v)].symbol == syms[0])
      current.push_back(v);
  for (std::size_t i = 1; i < syms.size() && !current.empty(); ++i)
    current = detail::evolve(dg, current, syms[i]);
  for (int v : current)
    if (good[static_cast<std::size_t>(v)]) return true;
  return false;
}

// Lexicographically-least shortest connector w with |w| <= edge gap and uwv
// admissible; nullopt when none exists within the bound.
inline std::optional<Word> connect(const MarkovDiagram& dg,
                                   const DecompositionN& d, const Word& u,
                                   const Word& v) {
  const auto& model = dg.model;
  if (!admits(model, u) || !admits(model, v))
    throw DomainError("connect: both endpoint words must be admissible");
  const auto gap = gap_size(dg, d);
  const auto glue = [&](const Word& w) {
    std::vector<Symbol> joined = u.symbols();
    joined.insert(joined.end(), w.symbols().begin(), w.symbols().end());
    joined.insert(joined.end(), v.symbols().begin(), v.symbols().end());
    return admits(model, Word(model.m, joined));
  };
  for (long long len = 0; len <= gap.edge_gap; ++len) {
    std::vector<Symbol> cur(static_cast<std::size_t>(len), 0);
    while (true) {
      const Word w(model.m, cur);
      if (glue(w)) return w;
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

struct WPrimeReport {
  bool passed = false;
  long long word_gap = 0;
  long long pairs_checked = 0;
  std::optional<std::pair<Word, Word>> counterexample;
  std::string note;
};

// Empirical check of the gluing property for the good set: every pair (u, v)
// of good-block assemblies must admit a connector of length <= word_gap.
// Coverage: exhaustive over single-block pairs, class representatives for
//2-block assemblies (gluability depends only on the follower class of u and
// the entry class of v), and a seeded random sample of 2- and 3-block
// assemblies. Necessarily finite, so a pass is evidence, not proof.
inline WPrimeReport verify_w_prime(const MarkovDiagram& dg,
                                   const DecompositionN& d, int L,
                                   long long budget = kDefaultEnumerationBudget) {
  if (L < 1) throw DomainError("verify_w_prime: block length bound must be >= 1");
  const auto& model = dg.model;
  WPrimeReport report;
  long long word_gap = 0;
  try {
    word_gap = gap_size(dg, d).word_gap;
  } catch (const DomainError& e) {
    // Gap size undefined (some pair of good endpoints is unconnectable):
    // check with a small fallback gap so the witness pair can be reported.
    word_gap = 2;
    report.note = std::string("gap size undefined (") + e.what() +
                  "); checked with fallback word gap 2";
  }
  report.word_gap = word_gap;

  long long used = 0;
  const auto charge = [&](long long units) {
    used += units;
    if (used > budget)
      throw BudgetError("verify_w_prime: budget exhausted after " +
                        std::to_string(budget) + " admissibility tests");
  };

  // Good blocks of length 1..L.
  std::vector<Word> blocks;
  for (int n = 1; n <= L; ++n) {
    const auto slice = enumerate_language(model, n, budget);
    charge(slice.count);
    for (const auto& w : slice.words)
      if (in_good_set(dg, d, w)) blocks.push_back(w);
  }
  if (blocks.empty()) {
    report.note += (report.note.empty() ? "" : "; ") + std::string("no good blocks");
    return report;
  }

  // Can u glue to v within the word gap?
  const auto gluable = [&](const Word& u, const Word& v) {
    std::vector<Symbol> cur;
    for (long long len = 0; len <= word_gap; ++len) {
      cur.assign(static_cast<std::size_t>(len), 0);
      while (true) {
        std::vector<Symbol> joined = u.symbols();
        joined.insert(joined.end(), cur.begin(), cur.end());
        joined.insert(joined.end(), v.symbols().begin(), v.symbols().end());
        charge(1);
        if (admits(model, Word(model.m, joined))) return true;
        int i = static_cast<int>(len) - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == model.m - 1) {
          cur[static_cast<std::size_t>(i)] = 0;
          --i;
        }
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
      }
    }
    return false;
  };
  const auto fail_with = [&](const Word& u, const Word& v) {
    report.passed = false;
    report.counterexample = std::make_pair(u, v);
  };

  // Exhaustive single-block pairs.
  for (const auto& u : blocks)
    for (const auto& v : blocks) {
      ++report.pairs_checked;
      if (!gluable(u, v)) {
        fail_with(u, v);
        return report;
      }
    }

  // Class coverage for 2-block assemblies: follower class of u = end-vertex
  // set of its paths from good starts; entry class of v = set of vertices it
  // can be read from. One representative per class on each side.
  const auto follower_key = [&](const Word& w) {
    const auto& syms = w.symbols();
    std::vector<int> cur;
    for (int v : d.good_endpoints)
      if (dg.vertices[static_cast<std::size_t>(v)].symbol == syms[0])
        cur.push_back(v);
    for (std::size_t i = 1; i < syms.size() && !cur.empty(); ++i)
      cur = detail::evolve(dg, cur, syms[i]);
    std::string key;
    for (int v : cur) key += std::to_string(v) + ",";
    return key;
  };
  const auto entry_key = [&](const Word& w) {
    const auto& syms = w.symbols();
    std::string key;
    for (const auto& v : dg.vertices) {
      if (v.symbol != syms[0]) continue;
      std::vector<int> cur = {v.id};
      for (std::size_t i = 1; i < syms.size() && !cur.empty(); ++i)
        cur = detail::evolve(dg, cur, syms[i]);
      if (!cur.empty()) key += std::to_string(v.id) + ",";
    }
    return key;
  };

  std::vector<Word> assemblies;  // 2-block assemblies, deterministic order
  const std::size_t assembly_cap = 4000;
  for (const auto& a : blocks) {
    for (const auto& b : blocks) {
      if (assemblies.size() >= assembly_cap) break;
      const auto w = connect(dg, d, a, b);
      if (!w) continue;
      std::vector<Symbol> joined = a.symbols();
      joined.insert(joined.end(), w->symbols().begin(), w->symbols().end());
      joined.insert(joined.end(), b.symbols().begin(), b.symbols().end());
      const Word uw(model.m, joined);
      if (in_good_set(dg, d, uw)) assemblies.push_back(uw);
    }
    if (assemblies.size() >= assembly_cap) break;
  }
  std::map<std::string, const Word*> follower_reps, entry_reps;
  for (const auto* list : {&blocks, &assemblies})
    for (const auto& w : *list) {
      follower_reps.emplace(follower_key(w), &w);
      entry_reps.emplace(entry_key(w), &w);
    }
  for (const auto& [fk, u] : follower_reps)
    for (const auto& [ek, v] : entry_reps) {
      (void)fk;
      (void)ek;
      ++report.pairs_checked;
      if (!gluable(*u, *v)) {
        fail_with(*u, *v);
        return report;
      }
    }

  // Seeded random 2- and 3-block assemblies on both sides.
  std::mt19937_64 rng(99);
  const auto random_assembly = [&]() -> std::optional<Word> {
    const int parts = 2 + static_cast<int>(rng() % 2);
    Word acc = blocks[static_cast<std::size_t>(rng() % blocks.size())];
    for (int i = 1; i < parts; ++i) {
      const Word& nxt = blocks[static_cast<std::size_t>(rng() % blocks.size())];
      const auto w = connect(dg, d, acc, nxt);
      if (!w) return std::nullopt;
      std::vector<Symbol> joined = acc.symbols();
      joined.insert(joined.end(), w->symbols().begin(), w->symbols().end());
      joined.insert(joined.end(), nxt.symbols().begin(), nxt.symbols().end());
      acc = Word(model.m, joined);
    }
    if (!in_good_set(dg, d, acc)) return std::nullopt;
    return acc;
  };
  for (int rep = 0; rep < 200; ++rep) {
    const auto u = random_assembly();
    const auto v = random_assembly();
    if (!u || !v) continue;
    ++report.pairs_checked;
    if (!gluable(*u, *v)) {
      fail_with(*u, *v);
      return report;
    }
  }
  report.passed = true;
  return report;
}

// Number of distinct words of length n spelled by diagram paths of n vertices
// starting in the core F. Cross-checked against direct language enumeration
// whenever that fits in the given budget; a mismatch means the truncation is
// too shallow and raises DomainError.
inline long long count_paths(const MarkovDiagram& dg, const DecompositionN& d,
                             int n,
                             long long budget = kDefaultEnumerationBudget) {
  if (n < 0) throw DomainError("count_paths: length must be >= 0");
  if (n == 0) return 1;  // the empty word
  std::map<std::pair<std::vector<int>, int>, long long> memo;
  const auto count_from = [&](const std::vector<int>& set, int remaining,
                              const auto& self) -> long long {
    if (remaining == 0) return 1;
    const auto key = std::make_pair(set, remaining);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    long long total = 0;
    for (Symbol s = 0; s < dg.model.m; ++s) {
      const auto next = detail::evolve(dg, set, s);
      if (!next.empty()) total += self(next, remaining - 1, self);
    }
    memo[key] = total;
    return total;
  };
  long long total = 0;
  for (Symbol s = 0; s < dg.model.m; ++s) {
    std::vector<int> start;
    for (int v : d.core)
      if (dg.vertices[static_cast<std::size_t>(v)].symbol == s)
        start.push_back(v);
    if (!start.empty()) total += count_from(start, n - 1, count_from);
  }
  try {
    const auto direct = enumerate_language(dg.model, n, budget).count;
    if (total != direct)
      throw DomainError("count_paths: truncation insufficient: diagram spells " +
                        std::to_string(total) + " words of length " +
                        std::to_string(n) + " but the language has " +
                        std::to_string(direct));
  } catch (const BudgetError&) {
    // Direct enumeration does not fit the budget; skip the cross-check.
  }
  return total;
}

// Number of distinct words of length n in the suffix part C^{s,N}: paths that
// start at a vertex of level exactly N+1 and stay inside C at levels > N. The
// entropy of this part must vanish as N grows.
inline long long suffix_word_count(const MarkovDiagram& dg,
                                   const DecompositionN& d, int n) {
  if (n <= 0) return n == 0 ? 1 : 0;
  std::vector<char> allowed(dg.vertices.size(), 0);
  for (int v : d.component)
    if (dg.vertices[static_cast<std::size_t>(v)].level > d.N)
      allowed[static_cast<std::size_t>(v)] = 1;
  const auto evolve_allowed = [&](const std::vector<int>& cur, Symbol s) {
    std::vector<int> next;
    for (int v : cur)
      for (const auto& [sym, tgt] : dg.out[static_cast<std::size_t>(v)])
        if (sym == s && tgt >= 0 && allowed[static_cast<std::size_t>(tgt)])
          next.push_back(tgt);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    return next;
  };
  std::map<std::pair<std::vector<int>, int>, long long> memo;
  const auto count_from = [&](const std::vector<int>& set, int remaining,
                              const auto& self) -> long long {
    if (remaining == 0) return 1;
    const auto key = std::make_pair(set, remaining);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    long long total = 0;
    for (Symbol s = 0; s < dg.model.m; ++s) {
      const auto next = evolve_allowed(set, s);
      if (!next.empty()) total += self(next, remaining - 1, self);
    }
    memo[key] = total;
    return total;
  };
  long long total = 0;
  for (Symbol s = 0; s < dg.model.m; ++s) {
    std::vector<int> start;
    for (int v : d.component)
      if (dg.vertices[static_cast<std::size_t>(v)].level == d.N + 1 &&
          dg.vertices[static_cast<std::size_t>(v)].symbol == s)
        start.push_back(v);
    if (!start.empty()) total += count_from(start, n - 1, count_from);
  }
  return total;
}

}  // namespace recur
