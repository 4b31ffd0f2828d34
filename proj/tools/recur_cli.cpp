// Command-line front end for the recurrence library.
//
// Exit codes: 0 success, 1 domain error (single-line diagnostic on stderr),
// 2 usage error or exhausted work budget.  Commands that write artifact
// files also write a run manifest recording the command, its full parameter
// set, the seed (when randomness is involved), the produced schemas, and an
// FNV-1a digest of the artifact bytes; re-running the same command with the
// same parameters reproduces the artifacts byte for byte.
//
// The environment variable RECUR_BUDGET (a positive integer) overrides the
// default enumeration budgets everywhere a command enumerates words or paths.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "recur/errors.hpp"
#include "recur/interval_maps.hpp"
#include "recur/io.hpp"
#include "recur/markov_diagram.hpp"
#include "recur/moran.hpp"
#include "recur/recurrence.hpp"
#include "recur/schedules.hpp"
#include "recur/shift_models.hpp"
#include "recur/word.hpp"

namespace {

using recur::BudgetError;
using recur::DomainError;
using recur::Word;
using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "recur/1.0.0";

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

std::optional<long long> env_budget() {
  const char* e = std::getenv("RECUR_BUDGET");
  if (e == nullptr || *e == '\0') return std::nullopt;
  return recur::io::parse_ll(e, "RECUR_BUDGET");
}

long long budget_or(long long dflt) {
  auto b = env_budget();
  if (b && *b <= 0) throw DomainError("RECUR_BUDGET must be positive");
  return b.value_or(dflt);
}

// Accepts decimal text or "inf" (case-insensitive) for schedule targets.
double parse_rate(const std::string& s, const char* what) {
  std::string t = s;
  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "inf" || t == "+inf" || t == "infinity")
    return std::numeric_limits<double>::infinity();
  return recur::io::parse_double(s, what);
}

// One produced file: path, schema tag, and the exact bytes to write.
struct Artifact {
  std::string path;
  std::string schema;
  std::string bytes;
};

struct RunContext {
  std::string command;
  std::vector<std::string> params;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
};

void add_param(RunContext& ctx, const std::string& flag, const std::string& value) {
  ctx.params.push_back(flag + " " + value);
}

// Writes the artifacts, then one manifest alongside them.  `manifest_path`
// names the manifest file itself; the digest covers the artifact bytes in
// the order given, which is also the order of the schema lines.
void finish_artifacts(const RunContext& ctx, const std::vector<Artifact>& artifacts,
                      const std::string& manifest_path) {
  std::uint64_t digest = 14695981039346656037ull;
  recur::io::Manifest man;
  man.command = ctx.command;
  man.params = ctx.params;
  man.seed = ctx.seed;
  man.tool_version = kToolVersion;
  for (const Artifact& a : artifacts) {
    std::ofstream out(a.path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + a.path + "'");
    out.write(a.bytes.data(), static_cast<std::streamsize>(a.bytes.size()));
    if (!out) throw DomainError("failed writing '" + a.path + "'");
    digest = recur::io::fnv1a64(a.bytes, digest);
    man.schemas.push_back(a.schema);
  }
  man.digest = digest;
  man.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - ctx.t0)
                          .count();
  std::ofstream mout(manifest_path, std::ios::binary);
  if (!mout) throw DomainError("cannot write '" + manifest_path + "'");
  recur::io::write_manifest(mout, man);
}

// Emits tabular output: CSV text (schema comment, units header, rows) either
// to stdout or to a file with a manifest next to it.  With `as_json`, the
// same records go out as {"schema": ..., "rows": [...]} instead.
struct Table {
  std::string schema;              // e.g. "recur-trace-csv/1"
  std::vector<std::string> columns;  // CSV headers, units in parentheses
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> trailer;  // comment lines appended after the rows
  std::set<std::size_t> string_columns;  // JSON keeps these as text (e.g. words)

  void add_row(std::initializer_list<std::string> cells) { rows.emplace_back(cells); }

  // Numeric cells become JSON numbers; non-finite values stay as text since
  // JSON has no literal for them.
  static json numeric_cell(const std::string& cell) {
    long long iv = 0;
    auto ires = std::from_chars(cell.data(), cell.data() + cell.size(), iv);
    if (ires.ec == std::errc{} && ires.ptr == cell.data() + cell.size()) return json(iv);
    double dv = 0.0;
    auto dres = std::from_chars(cell.data(), cell.data() + cell.size(), dv);
    if (dres.ec == std::errc{} && dres.ptr == cell.data() + cell.size() &&
        std::isfinite(dv))
      return json(dv);
    return json(cell);
  }

  std::string render_csv() const {
    std::ostringstream out;
    out << "# " << schema << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << row[i];
      out << "\n";
    }
    for (const std::string& t : trailer) out << "# " << t << "\n";
    return out.str();
  }

  std::string render_json() const {
    json doc;
    doc["schema"] = schema;
    json rows_j = json::array();
    for (const auto& row : rows) {
      json obj;
      for (std::size_t i = 0; i < columns.size(); ++i) {
        std::string key = columns[i].substr(0, columns[i].find('('));
        obj[key] = string_columns.count(i) ? json(row[i]) : numeric_cell(row[i]);
      }
      rows_j.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows_j);
    json notes = json::array();
    for (const std::string& t : trailer) notes.push_back(t);
    if (!notes.empty()) doc["notes"] = std::move(notes);
    return doc.dump(2) + "\n";
  }

  // Prints to stdout, or writes `*out_path` plus a manifest.
  void deliver(const RunContext& ctx, const std::optional<std::string>& out_path,
               bool as_json) const {
    const std::string bytes = as_json ? render_json() : render_csv();
    if (!out_path) {
      std::cout << bytes;
      return;
    }
    finish_artifacts(ctx, {{*out_path, schema, bytes}}, *out_path + ".manifest");
    std::cout << "wrote " << *out_path << "\n";
  }
};

std::string fd(double v) { return recur::io::fmt_double(v); }
std::string fi(long long v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// lang
// ---------------------------------------------------------------------------

int run_lang_enum(const std::string& model_path, long long n,
                  const std::optional<std::string>& out, bool as_json) {
  RunContext ctx;
  ctx.command = "lang enum";
  add_param(ctx, "--model", model_path);
  add_param(ctx, "--n", fi(n));
  auto model = recur::io::load_model(model_path);
  auto slice = recur::enumerate_language(model, n, budget_or(recur::kDefaultEnumerationBudget));
  Table t;
  t.schema = "recur-words-csv/1";
  t.columns = {"index", "word(symbols)"};
  t.string_columns.insert(1);
  for (std::size_t i = 0; i < slice.words.size(); ++i)
    t.add_row({fi(static_cast<long long>(i)), slice.words[i].text()});
  t.trailer.push_back("count " + fi(slice.count));
  t.deliver(ctx, out, as_json);
  return 0;
}

int run_lang_entropy(const std::string& model_path, int nmax,
                     const std::optional<std::string>& out, bool as_json) {
  RunContext ctx;
  ctx.command = "lang entropy";
  add_param(ctx, "--model", model_path);
  add_param(ctx, "--nmax", fi(nmax));
  auto model = recur::io::load_model(model_path);
  auto est = recur::entropy_estimate(model, nmax, budget_or(recur::kDefaultEnumerationBudget));
  Table t;
  t.schema = "recur-entropy-csv/1";
  t.columns = {"n(symbols)", "count(words)", "log_count_over_n(nats_per_symbol)"};
  for (std::size_t i = 0; i < est.points.size(); ++i)
    t.add_row({fi(est.points[i].first), fi(est.counts[i]), fd(est.points[i].second)});
  t.trailer.push_back("entropy_estimate_nats " + fd(est.value));
  t.deliver(ctx, out, as_json);
  return 0;
}

// ---------------------------------------------------------------------------
// map
// ---------------------------------------------------------------------------

int run_map_digits(double alpha, double beta, double x, long long n,
                   const std::optional<std::string>& out, bool as_json) {
  RunContext ctx;
  ctx.command = "map digits";
  add_param(ctx, "--alpha", fd(alpha));
  add_param(ctx, "--beta", fd(beta));
  add_param(ctx, "--x", fd(x));
  add_param(ctx, "--n", fi(n));
  auto p = recur::make_alpha_beta(alpha, beta);
  auto tr = recur::digits(p, x, n);
  Table t;
  t.schema = "recur-digits-csv/1";
  t.columns = {"k(step)", "orbit_x(unit_interval)", "digit", "flag(0_or_1)"};
  for (std::size_t i = 0; i < tr.orbit.size(); ++i)
    t.add_row({fi(static_cast<long long>(i)), fd(tr.orbit[i]),
               fi(tr.digits.symbols()[i]), fi(tr.flagged(i) ? 1 : 0)});
  if (tr.first_flagged >= 0)
    t.trailer.push_back("first_flagged " + fi(tr.first_flagged));
  t.deliver(ctx, out, as_json);
  return 0;
}

int run_map_transitive(double alpha, double beta, bool as_json) {
  auto p = recur::make_alpha_beta(alpha, beta);
  auto res = recur::check_transitive(p);
  const bool transitive = res.outcome == recur::TransitivityResult::Outcome::Transitive;
  if (as_json) {
    json doc;
    doc["schema"] = "recur-transitive/1";
    doc["outcome"] = transitive ? "transitive" : "inconclusive";
    doc["a0_left"] = res.a0_left;
    doc["a0_right"] = res.a0_right;
    doc["iterations"] = res.iterations;
    doc["covering_branch"] = res.covering_branch;
    doc["final_left"] = res.final_left;
    doc["final_right"] = res.final_right;
    doc["note"] = res.note;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "outcome " << (transitive ? "transitive" : "inconclusive") << "\n";
    std::cout << "seed_interval [" << fd(res.a0_left) << ", " << fd(res.a0_right) << ")\n";
    std::cout << "iterations " << res.iterations << "\n";
    if (transitive) std::cout << "covering_branch " << res.covering_branch << "\n";
    std::cout << "final_interval [" << fd(res.final_left) << ", " << fd(res.final_right) << ")\n";
    if (!res.note.empty()) std::cout << "note " << res.note << "\n";
  }
  return 0;
}

int run_map_cylinder(double alpha, double beta, const std::string& word_text,
                     const std::optional<std::string>& out, bool as_json) {
  RunContext ctx;
  ctx.command = "map cylinder";
  add_param(ctx, "--alpha", fd(alpha));
  add_param(ctx, "--beta", fd(beta));
  add_param(ctx, "--word", word_text);
  auto p = recur::make_alpha_beta(alpha, beta);
  Word w = Word::from_text(p.m, word_text);
  if (w.empty()) throw DomainError("map cylinder: the word must be non-empty");
  Table t;
  t.schema = "recur-cylinder-csv/1";
  t.columns = {"depth(symbols)", "left(unit_interval)", "right(unit_interval)",
               "width(unit_interval)"};
  for (std::size_t d = 1; d <= w.size(); ++d) {
    Word prefix(p.m, std::vector<recur::Symbol>(w.symbols().begin(),
                                                w.symbols().begin() + static_cast<long>(d)));
    auto iv = recur::cylinder_interval(p, prefix);
    if (!iv) {
      t.trailer.push_back("empty_from_depth " + fi(static_cast<long long>(d)));
      break;
    }
    t.add_row({fi(static_cast<long long>(d)), fd(iv->left), fd(iv->right),
               fd(iv->right - iv->left)});
  }
  t.deliver(ctx, out, as_json);
  return 0;
}

// ---------------------------------------------------------------------------
// diagram
// ---------------------------------------------------------------------------

int run_diagram_build(const std::string& model_path, int N,
                      const std::string& out_path) {
  RunContext ctx;
  ctx.command = "diagram build";
  add_param(ctx, "--model", model_path);
  add_param(ctx, "--N", fi(N));
  add_param(ctx, "--out", out_path);
  auto model = recur::io::load_model(model_path);
  auto dg = recur::build_diagram(model, N, budget_or(100000));
  std::ostringstream out;
  out << recur::io::kDiagramSchema << "\n";
  out << "built_to " << dg.built_to << "\n";
  out << "stabilized " << (dg.stabilized ? 1 : 0) << "\n";
  out << "frontier_open " << (dg.frontier_open ? 1 : 0) << "\n";
  out << "# vertex <id> <level> <symbol> <representation>\n";
  for (const auto& v : dg.vertices)
    out << "vertex " << v.id << " " << v.level << " " << v.symbol << " "
        << v.repr() << "\n";
  out << "# edge <src> <symbol> <dst>\n";
  for (std::size_t src = 0; src < dg.out.size(); ++src)
    for (const auto& [sym, dst] : dg.out[src])
      out << "edge " << src << " " << sym << " " << dst << "\n";
  finish_artifacts(ctx, {{out_path, recur::io::kDiagramSchema, out.str()}},
                   out_path + ".manifest");
  std::cout << "wrote " << out_path << " (" << dg.vertices.size() << " vertices)\n";
  return 0;
}

int run_diagram_gap(const std::string& model_path, int N, bool as_json) {
  auto model = recur::io::load_model(model_path);
  auto dg = recur::build_diagram(model, N, budget_or(100000));
  auto d = recur::make_decomposition(dg, N);
  auto gap = recur::gap_size(dg, d);
  if (as_json) {
    json doc;
    doc["schema"] = "recur-gap/1";
    doc["N"] = N;
    doc["edge_gap"] = gap.edge_gap;
    doc["word_gap"] = gap.word_gap;
    doc["spectral_radius"] = d.spectral_radius;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "edge_gap " << gap.edge_gap << "\n";
    std::cout << "word_gap " << gap.word_gap << "\n";
    std::cout << "spectral_radius " << fd(d.spectral_radius) << "\n";
  }
  return 0;
}

int run_diagram_wprime(const std::string& model_path, int N, int L, bool as_json) {
  auto model = recur::io::load_model(model_path);
  auto dg = recur::build_diagram(model, N, budget_or(100000));
  auto d = recur::make_decomposition(dg, N);
  auto rep = recur::verify_w_prime(dg, d, L, budget_or(recur::kDefaultEnumerationBudget));
  if (as_json) {
    json doc;
    doc["schema"] = "recur-wprime/1";
    doc["passed"] = rep.passed;
    doc["word_gap"] = rep.word_gap;
    doc["pairs_checked"] = rep.pairs_checked;
    if (rep.counterexample) {
      doc["counterexample_u"] = rep.counterexample->first.text();
      doc["counterexample_v"] = rep.counterexample->second.text();
    }
    doc["note"] = rep.note;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "passed " << (rep.passed ? 1 : 0) << "\n";
    std::cout << "word_gap " << rep.word_gap << "\n";
    std::cout << "pairs_checked " << rep.pairs_checked << "\n";
    if (rep.counterexample)
      std::cout << "counterexample " << rep.counterexample->first.text() << " "
                << rep.counterexample->second.text() << "\n";
    if (!rep.note.empty()) std::cout << "note " << rep.note << "\n";
  }
  if (!rep.passed) {
    std::cerr << "gluing check failed: " << rep.note << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// recur
// ---------------------------------------------------------------------------

Word random_admissible_prefix(const recur::SubshiftModel& model, long long length,
                              std::uint64_t seed) {
  if (length < 1) throw DomainError("random prefix: length must be >= 1");
  recur::detail::AdmissTracker trk(model);
  std::mt19937_64 g(seed);
  std::vector<recur::Symbol> out;
  out.reserve(static_cast<std::size_t>(length));
  for (long long i = 0; i < length; ++i) {
    std::vector<recur::Symbol> open;
    for (recur::Symbol s = 0; s < model.m; ++s) {
      recur::detail::AdmissTracker probe = trk;
      if (probe.feed(s)) open.push_back(s);
    }
    if (open.empty())
      throw DomainError("random prefix: the grown word has no admissible continuation");
    recur::Symbol pick = open[g() % open.size()];
    trk.feed(pick);
    out.push_back(pick);
  }
  return Word(model.m, std::move(out));
}

int run_recur_trace(const std::optional<std::string>& input_path,
                    const std::optional<std::string>& model_path,
                    long long length, std::optional<std::uint64_t> seed,
                    long long nmax, const std::optional<std::string>& out,
                    bool as_json) {
  RunContext ctx;
  ctx.command = "recur trace";
  Word x(2);
  if (input_path && model_path)
    throw DomainError("recur trace: give either --input or --model, not both");
  if (input_path) {
    add_param(ctx, "--input", *input_path);
    x = recur::io::load_prefix(*input_path);
  } else if (model_path) {
    if (!seed) throw DomainError("recur trace: --model mode requires --seed");
    add_param(ctx, "--model", *model_path);
    add_param(ctx, "--length", fi(length));
    add_param(ctx, "--seed", fi(static_cast<long long>(*seed)));
    ctx.seed = seed;
    auto model = recur::io::load_model(*model_path);
    x = random_admissible_prefix(model, length, *seed);
  } else {
    throw DomainError("recur trace: one of --input or --model is required");
  }
  add_param(ctx, "--nmax", fi(nmax));
  auto tr = recur::trace(x, nmax);
  Table t;
  t.schema = "recur-trace-csv/1";
  t.columns = {"n(symbols)", "tau(symbols)", "ratio(log_tau_over_n_nats)",
               "determined(0_or_1)"};
  for (const auto& e : tr.entries)
    t.add_row({fi(e.n), fi(e.determined ? e.tau : -1),
               e.determined ? fd(e.ratio) : std::string("nan"),
               fi(e.determined ? 1 : 0)});
  t.trailer.push_back("prefix_length " + fi(tr.prefix_length));
  t.deliver(ctx, out, as_json);
  return 0;
}

int run_recur_ow(const std::string& dist_text, int n, int samples, long long horizon,
                 std::uint64_t seed, const std::optional<std::string>& out,
                 bool as_json) {
  RunContext ctx;
  ctx.command = "recur ow";
  add_param(ctx, "--dist", dist_text);
  add_param(ctx, "--n", fi(n));
  add_param(ctx, "--samples", fi(samples));
  add_param(ctx, "--horizon", fi(horizon));
  add_param(ctx, "--seed", fi(static_cast<long long>(seed)));
  ctx.seed = seed;
  std::vector<double> probs;
  std::size_t pos = 0;
  while (pos <= dist_text.size()) {
    std::size_t comma = dist_text.find(',', pos);
    std::string piece = dist_text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (piece.empty()) throw DomainError("--dist: empty entry");
    probs.push_back(recur::io::parse_double(piece, "--dist"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  auto spec = recur::SamplerSpec::bernoulli(std::move(probs));
  auto summary = recur::ornstein_weiss_experiment(spec, n, samples, horizon, seed);
  Table t;
  t.schema = "recur-ow-csv/1";
  t.columns = {"n(symbols)", "tau(symbols)", "ratio(log_tau_over_n_nats)",
               "determined(0_or_1)"};
  for (const auto& s : summary.samples)
    t.add_row({fi(n), fi(s.censored ? -1 : s.tau),
               s.censored ? std::string("inf") : fd(s.ratio),
               fi(s.censored ? 0 : 1)});
  t.trailer.push_back("median_ratio " + fd(summary.median_ratio));
  t.trailer.push_back("mean_ratio " + fd(summary.mean_ratio));
  t.trailer.push_back("censored " + fi(summary.censored_count) + "/" + fi(samples));
  t.trailer.push_back("reference_entropy_nats " + fd(summary.reference_entropy));
  t.deliver(ctx, out, as_json);
  return 0;
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

int run_schedule_make(const std::string& a_text, const std::string& b_text, int P,
                      long long k, long long t, const std::optional<std::string>& out,
                      bool as_json) {
  RunContext ctx;
  ctx.command = "schedule make";
  add_param(ctx, "--a", a_text);
  add_param(ctx, "--b", b_text);
  add_param(ctx, "--P", fi(P));
  const double a = parse_rate(a_text, "--a");
  const double b = parse_rate(b_text, "--b");
  auto sched = recur::make_schedule(a, b, P);
  if (k > 0) {
    add_param(ctx, "--k", fi(k));
    add_param(ctx, "--t", fi(t));
    sched = recur::shift_for_construction(sched, k, t);
  }
  Table tab;
  tab.schema = "recur-schedule-csv/1";
  tab.columns = {"p", "ell(symbols)", "gamma(nats_per_symbol)", "gamma_ell(nats)",
                 "exp_gamma_ell_log(nats)"};
  for (const auto& term : sched.terms)
    tab.add_row({fi(term.p), fd(term.ell), fd(term.gamma), fd(term.gamma_ell),
                 fd(std::exp(term.log_gamma_ell))});
  if (sched.index_shift != 0)
    tab.trailer.push_back("index_shift " + fi(sched.index_shift));
  tab.deliver(ctx, out, as_json);
  return 0;
}

// ---------------------------------------------------------------------------
// moran
// ---------------------------------------------------------------------------

recur::Schedule rebuild_schedule(double a, double b, int shift, int P = 200) {
  auto s = recur::make_schedule(a, b, P);
  return recur::detail::drop_prefix(s, shift);
}

Table checkpoints_table(const recur::VerifyReport& rep) {
  Table t;
  t.schema = "recur-checkpoints-csv/1";
  t.columns = {"p",
               "n(symbols)",
               "tau(symbols)",
               "predicted(symbols)",
               "exact(0_or_1)",
               "sandwich_lo(nats)",
               "sandwich_hi(nats)",
               "sandwich_ok(0_or_1)",
               "plateau_ok(0_or_1)",
               "s_p(symbols)",
               "ratio_n(nats_per_symbol)",
               "ratio_ell(nats_per_symbol)",
               "gamma(nats_per_symbol)"};
  for (const auto& c : rep.checkpoints)
    t.add_row({fi(c.p), fi(c.n), fi(c.tau), fi(c.predicted), fi(c.exact_match ? 1 : 0),
               fd(c.sandwich_lo), fd(c.sandwich_hi), fi(c.sandwich_ok ? 1 : 0),
               fi(c.plateau_ok ? 1 : 0), fi(c.s_p), fd(c.ratio_n), fd(c.ratio_ell),
               fd(c.gamma)});
  t.trailer.push_back(std::string("verification ") + (rep.passed ? "pass" : "fail"));
  if (!rep.note.empty()) t.trailer.push_back("note " + rep.note);
  return t;
}

int run_moran_build(const std::string& model_path, const std::string& a_text,
                    const std::string& b_text, long long k, long long t,
                    long long target, std::uint64_t seed, int P, int extra_shift,
                    const std::string& out_dir) {
  RunContext ctx;
  ctx.command = "moran build";
  add_param(ctx, "--model", model_path);
  add_param(ctx, "--a", a_text);
  add_param(ctx, "--b", b_text);
  add_param(ctx, "--k", fi(k));
  add_param(ctx, "--t", fi(t));
  add_param(ctx, "--target", fi(target));
  add_param(ctx, "--seed", fi(static_cast<long long>(seed)));
  add_param(ctx, "--P", fi(P));
  add_param(ctx, "--extra-shift", fi(extra_shift));
  add_param(ctx, "--out", out_dir);
  ctx.seed = seed;

  const double a = parse_rate(a_text, "--a");
  const double b = parse_rate(b_text, "--b");
  auto model = recur::io::load_model(model_path);
  auto cfg = recur::build_qk(model, k, t, budget_or(recur::kDefaultEnumerationBudget));
  auto sched = recur::shift_for_construction(recur::make_schedule(a, b, P), k, t);
  if (extra_shift > 0) sched = recur::detail::drop_prefix(sched, extra_shift);
  auto pt = recur::construct_point(cfg, sched, target, seed);
  auto rep = recur::verify_point(pt);

  std::filesystem::create_directories(out_dir);
  auto in_dir = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  std::ostringstream model_out, prefix_out, ledger_out;
  recur::io::write_model(model_out, model);
  recur::io::write_prefix(prefix_out, pt.prefix);
  recur::io::write_ledger(ledger_out, pt);
  Table cp = checkpoints_table(rep);
  finish_artifacts(ctx,
                   {{in_dir("model.txt"), recur::io::kModelSchema, model_out.str()},
                    {in_dir("prefix.txt"), recur::io::kPrefixSchema, prefix_out.str()},
                    {in_dir("ledger.txt"), recur::io::kLedgerSchema, ledger_out.str()},
                    {in_dir("checkpoints.csv"), cp.schema, cp.render_csv()}},
                   in_dir("manifest.txt"));

  std::cout << "constructed " << pt.prefix.size() << " symbols, "
            << pt.insertions.size() << " replay insertions, seed-set size "
            << pt.qk.size() << "\n";
  std::cout << "verification " << (rep.passed ? "pass" : "fail") << "\n";
  if (!rep.passed) {
    std::cerr << "verification failed: " << rep.note << "\n";
    return 1;
  }
  return 0;
}

// Loads a build directory back into a verifiable point.
recur::MoranPoint load_point(const std::string& dir) {
  auto in_dir = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  auto model = recur::io::load_model(in_dir("model.txt"));
  auto ld = recur::io::load_ledger(in_dir("ledger.txt"));
  Word prefix = recur::io::load_prefix(in_dir("prefix.txt"));
  auto cfg = recur::build_qk(model, ld.k, ld.t, budget_or(recur::kDefaultEnumerationBudget));
  return recur::io::assemble_point(ld, std::move(cfg), std::move(prefix));
}

int run_moran_verify(const std::string& dir, bool as_json) {
  auto pt = load_point(dir);
  auto rep = recur::verify_point(pt);
  Table t = checkpoints_table(rep);
  if (as_json)
    std::cout << t.render_json();
  else
    std::cout << t.render_csv();
  if (!rep.passed) {
    std::cerr << "verification failed: " << rep.note << "\n";
    return 1;
  }
  return 0;
}

int run_moran_dim(const std::string& dir, bool interval_mode, double epsilon,
                  long long depth, bool as_json) {
  // Needs only the model and ledger scalars; the realized prefix is not read.
  auto in_dir = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  auto model = recur::io::load_model(in_dir("model.txt"));
  auto ld = recur::io::load_ledger(in_dir("ledger.txt"));
  auto cfg = recur::build_qk(model, ld.k, ld.t, budget_or(recur::kDefaultEnumerationBudget));
  if (cfg.vstar.text() != ld.vstar_text)
    throw recur::DomainError("dim: rebuilt anchor word " + cfg.vstar.text() +
                             " disagrees with ledger anchor " + ld.vstar_text);
  if (static_cast<long long>(cfg.qk.size()) != ld.qk_count)
    throw recur::DomainError("dim: rebuilt seed set has " +
                             std::to_string(cfg.qk.size()) + " words, ledger records " +
                             std::to_string(ld.qk_count));
  auto sched = rebuild_schedule(ld.a, ld.b, ld.schedule_shift);
  auto est = recur::dimension_lower_bound(cfg, sched, interval_mode, epsilon, depth);
  if (as_json) {
    json doc;
    doc["schema"] = "recur-dimension/1";
    doc["epsilon"] = est.epsilon;
    doc["qk_size"] = est.qk_size;
    doc["symbolic_bound_nats"] = est.symbolic_bound;
    doc["ambiguity_log_nats"] = est.ambiguity_log;
    doc["interval_mode"] = est.interval_mode;
    if (est.interval_mode) {
      doc["closed_form"] = est.closed_form;
      doc["box_count_slope"] = est.box_count_slope;
      json pts = json::array();
      for (const auto& bp : est.box_points) pts.push_back({bp[0], bp[1]});
      doc["box_points"] = std::move(pts);
    }
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "qk_size " << est.qk_size << "\n";
    std::cout << "epsilon " << fd(est.epsilon) << "\n";
    std::cout << "symbolic_bound_nats " << fd(est.symbolic_bound) << "\n";
    std::cout << "ambiguity_log_nats " << fd(est.ambiguity_log) << "\n";
    if (est.interval_mode) {
      std::cout << "closed_form " << fd(est.closed_form) << "\n";
      std::cout << "box_count_slope " << fd(est.box_count_slope) << "\n";
      for (const auto& bp : est.box_points)
        std::cout << "box_point " << fd(bp[0]) << " " << fd(bp[1]) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic dynamics toolkit: languages, diagrams, return times,\n"
               "timing schedules, and slow-recurrence point construction"};
  app.require_subcommand(1);
  int exit_code = 0;

  // ---- lang ----
  auto* lang = app.add_subcommand("lang", "language enumeration and entropy");
  lang->require_subcommand(1);
  {
    auto* c = lang->add_subcommand("enum", "enumerate all admissible words of one length");
    auto model = std::make_shared<std::string>();
    auto n = std::make_shared<long long>(0);
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--model", *model, "model file (recur-model/1)")->required();
    c->add_option("--n", *n, "word length")->required();
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_lang_enum(*model, *n,
                                out->empty() ? std::nullopt : std::make_optional(*out),
                                *as_json);
    });
  }
  {
    auto* c = lang->add_subcommand("entropy", "log word-count growth up to a length");
    auto model = std::make_shared<std::string>();
    auto nmax = std::make_shared<int>(0);
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--model", *model, "model file (recur-model/1)")->required();
    c->add_option("--nmax", *nmax, "largest word length")->required();
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_lang_entropy(*model, *nmax,
                                   out->empty() ? std::nullopt : std::make_optional(*out),
                                   *as_json);
    });
  }

  // ---- map ----
  auto* map_cmd = app.add_subcommand("map", "interval map analysis");
  map_cmd->require_subcommand(1);
  {
    auto* c = map_cmd->add_subcommand("digits", "orbit and digit coding of a point");
    auto alpha = std::make_shared<double>(0.0);
    auto beta = std::make_shared<double>(2.0);
    auto x = std::make_shared<double>(0.0);
    auto n = std::make_shared<long long>(0);
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--alpha", *alpha, "rotation part, in [0,1)")->required();
    c->add_option("--beta", *beta, "expansion factor, > 1")->required();
    c->add_option("--x", *x, "starting point in [0,1)")->required();
    c->add_option("--n", *n, "number of digits")->required();
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_map_digits(*alpha, *beta, *x, *n,
                                 out->empty() ? std::nullopt : std::make_optional(*out),
                                 *as_json);
    });
  }
  {
    auto* c = map_cmd->add_subcommand("transitive", "covering certificate for the map");
    auto alpha = std::make_shared<double>(0.0);
    auto beta = std::make_shared<double>(2.0);
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--alpha", *alpha, "rotation part, in [0,1)")->required();
    c->add_option("--beta", *beta, "expansion factor, > 1")->required();
    c->add_flag("--json", *as_json, "emit JSON instead of plain lines");
    c->callback([=, &exit_code] { exit_code = run_map_transitive(*alpha, *beta, *as_json); });
  }
  {
    auto* c = map_cmd->add_subcommand("cylinder", "nested parameter intervals of a digit word");
    auto alpha = std::make_shared<double>(0.0);
    auto beta = std::make_shared<double>(2.0);
    auto word = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--alpha", *alpha, "rotation part, in [0,1)")->required();
    c->add_option("--beta", *beta, "expansion factor, > 1")->required();
    c->add_option("--word", *word, "digit word, e.g. 0110")->required();
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_map_cylinder(*alpha, *beta, *word,
                                   out->empty() ? std::nullopt : std::make_optional(*out),
                                   *as_json);
    });
  }

  // ---- diagram ----
  auto* diagram = app.add_subcommand("diagram", "follower-state diagram analysis");
  diagram->require_subcommand(1);
  {
    auto* c = diagram->add_subcommand("build", "materialize the diagram to a depth");
    auto model = std::make_shared<std::string>();
    auto N = std::make_shared<int>(0);
    auto out = std::make_shared<std::string>();
    c->add_option("--model", *model, "model file (recur-model/1)")->required();
    c->add_option("--N", *N, "depth")->required();
    c->add_option("--out", *out, "output file (recur-diagram/1)")->required();
    c->callback([=, &exit_code] { exit_code = run_diagram_build(*model, *N, *out); });
  }
  {
    auto* c = diagram->add_subcommand("gap", "connector gap of the depth-N good set");
    auto model = std::make_shared<std::string>();
    auto N = std::make_shared<int>(0);
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--model", *model, "model file (recur-model/1)")->required();
    c->add_option("--N", *N, "depth")->required();
    c->add_flag("--json", *as_json, "emit JSON instead of plain lines");
    c->callback([=, &exit_code] { exit_code = run_diagram_gap(*model, *N, *as_json); });
  }
  {
    auto* c = diagram->add_subcommand("wprime", "gluing check over bounded-length pairs");
    auto model = std::make_shared<std::string>();
    auto N = std::make_shared<int>(0);
    auto L = std::make_shared<int>(8);
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--model", *model, "model file (recur-model/1)")->required();
    c->add_option("--N", *N, "depth")->required();
    c->add_option("--L", *L, "max word length per side");
    c->add_flag("--json", *as_json, "emit JSON instead of plain lines");
    c->callback([=, &exit_code] { exit_code = run_diagram_wprime(*model, *N, *L, *as_json); });
  }

  // ---- recur ----
  auto* recur_cmd = app.add_subcommand("recur", "return-time measurements");
  recur_cmd->require_subcommand(1);
  {
    auto* c = recur_cmd->add_subcommand("trace", "first return of every prefix depth");
    auto input = std::make_shared<std::string>();
    auto model = std::make_shared<std::string>();
    auto length = std::make_shared<long long>(0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto has_seed = std::make_shared<bool>(false);
    auto nmax = std::make_shared<long long>(0);
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--input", *input, "prefix file (recur-prefix/1)");
    c->add_option("--model", *model, "model file; draws a random admissible prefix");
    c->add_option("--length", *length, "prefix length for --model mode");
    c->add_option("--seed", *seed, "64-bit seed for --model mode")
        ->each([has_seed](const std::string&) { *has_seed = true; });
    c->add_option("--nmax", *nmax, "largest cylinder depth")->required();
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_recur_trace(
          input->empty() ? std::nullopt : std::make_optional(*input),
          model->empty() ? std::nullopt : std::make_optional(*model), *length,
          *has_seed ? std::make_optional(*seed) : std::nullopt, *nmax,
          out->empty() ? std::nullopt : std::make_optional(*out), *as_json);
    });
  }
  {
    auto* c = recur_cmd->add_subcommand("ow", "seeded return-time sampling experiment");
    auto dist = std::make_shared<std::string>();
    auto n = std::make_shared<int>(0);
    auto samples = std::make_shared<int>(0);
    auto horizon = std::make_shared<long long>(0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--dist", *dist, "symbol law, e.g. 0.5,0.5")->required();
    c->add_option("--n", *n, "cylinder depth")->required();
    c->add_option("--samples", *samples, "number of sampled sequences")->required();
    c->add_option("--horizon", *horizon, "largest return step checked")->required();
    c->add_option("--seed", *seed, "64-bit seed")->required();
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_recur_ow(*dist, *n, *samples, *horizon, *seed,
                               out->empty() ? std::nullopt : std::make_optional(*out),
                               *as_json);
    });
  }

  // ---- schedule ----
  auto* schedule = app.add_subcommand("schedule", "oscillating timing sequences");
  schedule->require_subcommand(1);
  {
    auto* c = schedule->add_subcommand("make", "generate and print a schedule");
    auto a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>();
    auto P = std::make_shared<int>(0);
    auto k = std::make_shared<long long>(0);
    auto t = std::make_shared<long long>(0);
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--a", *a, "lower rate target; accepts inf")->required();
    c->add_option("--b", *b, "upper rate target; accepts inf")->required();
    c->add_option("--P", *P, "number of terms")->required();
    c->add_option("--k", *k, "drop early terms unusable for block length k");
    c->add_option("--t", *t, "connector budget paired with --k");
    c->add_option("--out", *out, "write CSV here instead of stdout");
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] {
      exit_code = run_schedule_make(*a, *b, *P, *k, *t,
                                    out->empty() ? std::nullopt : std::make_optional(*out),
                                    *as_json);
    });
  }

  // ---- moran ----
  auto* moran = app.add_subcommand("moran", "slow-recurrence point construction");
  moran->require_subcommand(1);
  {
    auto* c = moran->add_subcommand("build", "construct a point and write its artifacts");
    auto model = std::make_shared<std::string>();
    auto a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>();
    auto k = std::make_shared<long long>(0);
    auto t = std::make_shared<long long>(0);
    auto target = std::make_shared<long long>(0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto P = std::make_shared<int>(200);
    auto extra = std::make_shared<int>(0);
    auto out = std::make_shared<std::string>();
    c->add_option("--model", *model, "model file (recur-model/1)")->required();
    c->add_option("--a", *a, "lower rate target")->required();
    c->add_option("--b", *b, "upper rate target")->required();
    c->add_option("--k", *k, "seed block length")->required();
    c->add_option("--t", *t, "connector budget");
    c->add_option("--target", *target, "prefix length to construct")->required();
    c->add_option("--seed", *seed, "64-bit seed for the block draw")->required();
    c->add_option("--P", *P, "schedule terms before shifting");
    c->add_option("--extra-shift", *extra, "drop this many further schedule terms");
    c->add_option("--out", *out, "output directory")->required();
    c->callback([=, &exit_code] {
      exit_code = run_moran_build(*model, *a, *b, *k, *t, *target, *seed, *P,
                                  *extra, *out);
    });
  }
  {
    auto* c = moran->add_subcommand("verify", "re-check a build directory from its files");
    auto dir = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--dir", *dir, "directory written by moran build")->required();
    c->add_flag("--json", *as_json, "emit JSON instead of CSV");
    c->callback([=, &exit_code] { exit_code = run_moran_verify(*dir, *as_json); });
  }
  {
    auto* c = moran->add_subcommand("dim", "dimension lower bounds for the build");
    auto dir = std::make_shared<std::string>();
    auto interval = std::make_shared<bool>(false);
    auto eps = std::make_shared<double>(recur::kDimensionEpsilon);
    auto depth = std::make_shared<long long>(3);
    auto as_json = std::make_shared<bool>(false);
    c->add_option("--dir", *dir, "directory written by moran build")->required();
    c->add_flag("--interval", *interval, "also fit a box-count slope in parameter space");
    c->add_option("--eps", *eps, "dimension slack parameter");
    c->add_option("--depth", *depth, "tree depth for the box-count fit");
    c->add_flag("--json", *as_json, "emit JSON instead of plain lines");
    c->callback([=, &exit_code] {
      exit_code = run_moran_dim(*dir, *interval, *eps, *depth, *as_json);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
