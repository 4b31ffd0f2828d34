#pragma once

// File formats for the library's persistent artifacts: subshift model
// configurations, constructed symbol prefixes, construction ledgers, and run
// manifests.  Every format is line-based ASCII and self-identifying: the
// first line of a file is its schema tag (e.g. "recur-model/1"), blank lines
// and lines starting with '#' are ignored everywhere else, and all floating
// point values are written in shortest round-trip form so that re-reading a
// file reproduces the exact binary64 values that were written.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "recur/errors.hpp"
#include "recur/interval_maps.hpp"
#include "recur/moran.hpp"
#include "recur/shift_models.hpp"
#include "recur/word.hpp"

namespace recur::io {

inline constexpr const char* kModelSchema = "recur-model/1";
inline constexpr const char* kPrefixSchema = "recur-prefix/1";
inline constexpr const char* kLedgerSchema = "recur-ledger/1";
inline constexpr const char* kManifestSchema = "recur-manifest/1";
inline constexpr const char* kDiagramSchema = "recur-diagram/1";

// ---------------------------------------------------------------------------
// Hashing and number formatting
// ---------------------------------------------------------------------------

// FNV-1a, 64-bit.  Used for the outcome digest in run manifests; the digest
// of an artifact set is the hash of the concatenated file bytes in the order
// the manifest lists them.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Shortest decimal text that parses back to exactly the same binary64.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw DomainError(what + ": bad number '" + std::string(text) + "'");
  return v;
}

inline long long parse_ll(std::string_view text, const std::string& what) {
  long long v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw DomainError(what + ": bad integer '" + std::string(text) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view text, const std::string& what) {
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw DomainError(what + ": bad unsigned integer '" + std::string(text) + "'");
  return v;
}

namespace detail {

// Reads logical lines: trims trailing CR, skips blanks and '#' comments,
// tracks the physical line number for diagnostics.
class LineReader {
 public:
  LineReader(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  // Next meaningful line, or nullopt at end of stream.
  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      if (line[first] == '#') continue;
      return line;
    }
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DomainError(name_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  const std::string& name() const { return name_; }

 private:
  std::istream& in_;
  std::string name_;
  long long line_no_ = 0;
};

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

inline void expect_schema(LineReader& r, const char* schema) {
  auto first = r.next();
  if (!first || *first != schema)
    r.fail(std::string("expected schema line '") + schema + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model files (recur-model/1)
// ---------------------------------------------------------------------------
//
//   recur-model/1
//   kind sft            # full | sft | sgap | coded | interval
//   m 2
//   forbidden 11        # repeatable; sft only
//   s_set 1,2           # sgap: comma-separated finite run lengths
//   s_min 3             # sgap: all run lengths >= this value (optional)
//   generator 10        # repeatable; coded only
//   alpha 0.0           # interval only
//   beta 2.0            # interval only
//
// Words use the same text form as the library: digit strings for alphabets
// up to 10 symbols, comma-separated numbers beyond that, "eps" for empty.

inline void write_model(std::ostream& out, const SubshiftModel& model) {
  out << kModelSchema << "\n";
  switch (model.kind) {
    case SubshiftModel::Kind::Full:
      out << "kind full\n";
      out << "m " << model.m << "\n";
      break;
    case SubshiftModel::Kind::SFT:
      out << "kind sft\n";
      out << "m " << model.m << "\n";
      for (const Word& f : model.forbidden) out << "forbidden " << f.text() << "\n";
      break;
    case SubshiftModel::Kind::SGap: {
      out << "kind sgap\n";
      if (!model.gaps.finite.empty()) {
        out << "s_set ";
        bool first = true;
        for (long long s : model.gaps.finite) {
          if (!first) out << ",";
          out << s;
          first = false;
        }
        out << "\n";
      }
      if (model.gaps.ray_min) out << "s_min " << *model.gaps.ray_min << "\n";
      break;
    }
    case SubshiftModel::Kind::Coded:
      out << "kind coded\n";
      out << "m " << model.m << "\n";
      for (const Word& g : model.generators) out << "generator " << g.text() << "\n";
      break;
    case SubshiftModel::Kind::IntervalCoding:
      out << "kind interval\n";
      out << "alpha " << fmt_double(model.interval_map->alpha) << "\n";
      out << "beta " << fmt_double(model.interval_map->beta) << "\n";
      break;
  }
}

inline SubshiftModel read_model(std::istream& in,
                                const std::string& name = "model") {
  detail::LineReader r(in, name);
  detail::expect_schema(r, kModelSchema);

  std::string kind;
  std::optional<int> m;
  std::vector<std::string> forbidden_texts, generator_texts;
  GapSet gaps;
  std::optional<double> alpha, beta;

  while (auto line = r.next()) {
    auto space = line->find(' ');
    std::string key = line->substr(0, space);
    std::string val = space == std::string::npos
                          ? std::string()
                          : line->substr(line->find_first_not_of(' ', space));
    if (val.empty()) r.fail("key '" + key + "' has no value");
    if (key == "kind") {
      kind = val;
    } else if (key == "m") {
      m = static_cast<int>(parse_ll(val, "m"));
    } else if (key == "forbidden") {
      forbidden_texts.push_back(val);
    } else if (key == "generator") {
      generator_texts.push_back(val);
    } else if (key == "s_set") {
      std::size_t pos = 0;
      while (pos <= val.size()) {
        std::size_t comma = val.find(',', pos);
        std::string piece = val.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (piece.empty()) r.fail("empty entry in s_set");
        gaps.finite.insert(parse_ll(piece, "s_set"));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else if (key == "s_min") {
      gaps.ray_min = parse_ll(val, "s_min");
    } else if (key == "alpha") {
      alpha = parse_double(val, "alpha");
    } else if (key == "beta") {
      beta = parse_double(val, "beta");
    } else {
      r.fail("unknown key '" + key + "'");
    }
  }

  if (kind.empty()) throw DomainError(name + ": missing 'kind'");
  auto need_m = [&]() -> int {
    if (!m) throw DomainError(name + ": kind '" + kind + "' requires 'm'");
    return *m;
  };
  auto parse_words = [&](const std::vector<std::string>& texts) {
    std::vector<Word> out;
    out.reserve(texts.size());
    for (const std::string& s : texts) out.push_back(Word::from_text(need_m(), s));
    return out;
  };

  if (kind == "full") return full_shift(need_m());
  if (kind == "sft") return sft(need_m(), parse_words(forbidden_texts));
  if (kind == "sgap") {
    if (m) throw DomainError(name + ": sgap models fix m = 2; drop the 'm' line");
    return s_gap(gaps);
  }
  if (kind == "coded") return coded(need_m(), parse_words(generator_texts));
  if (kind == "interval") {
    if (!alpha || !beta)
      throw DomainError(name + ": interval kind requires 'alpha' and 'beta'");
    AlphaBetaParams p = make_alpha_beta(*alpha, *beta);
    if (m && *m != p.m)
      throw DomainError(name + ": 'm' contradicts the branch count of (alpha, beta)");
    return interval_coding(p);
  }
  throw DomainError(name + ": unknown kind '" + kind + "'");
}

inline SubshiftModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open model file '" + path + "'");
  return read_model(in, path);
}

inline void save_model(const std::string& path, const SubshiftModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write model file '" + path + "'");
  write_model(out, model);
}

// ---------------------------------------------------------------------------
// Prefix files (recur-prefix/1)
// ---------------------------------------------------------------------------
//
//   recur-prefix/1
//   m 2
//   symbols 010010...
//
// The symbols line uses Word's text form; it may be long.

inline void write_prefix(std::ostream& out, const Word& w) {
  out << kPrefixSchema << "\n";
  out << "m " << w.alphabet_size() << "\n";
  out << "symbols " << w.text() << "\n";
}

inline Word read_prefix(std::istream& in, const std::string& name = "prefix") {
  detail::LineReader r(in, name);
  detail::expect_schema(r, kPrefixSchema);
  std::optional<int> m;
  std::optional<std::string> symbols;
  while (auto line = r.next()) {
    auto space = line->find(' ');
    std::string key = line->substr(0, space);
    std::string val =
        space == std::string::npos ? std::string() : line->substr(space + 1);
    if (key == "m") {
      m = static_cast<int>(parse_ll(val, "m"));
    } else if (key == "symbols") {
      symbols = val;
    } else {
      r.fail("unknown key '" + key + "'");
    }
  }
  if (!m) throw DomainError(name + ": missing 'm'");
  if (!symbols) throw DomainError(name + ": missing 'symbols'");
  return Word::from_text(*m, *symbols);
}

inline Word load_prefix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open prefix file '" + path + "'");
  return read_prefix(in, path);
}

inline void save_prefix(const std::string& path, const Word& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write prefix file '" + path + "'");
  write_prefix(out, w);
}

// ---------------------------------------------------------------------------
// Construction ledgers (recur-ledger/1)
// ---------------------------------------------------------------------------
//
// Scalar header, then one line per replay insertion, then one line per block.
// The seed-block list and the drawn index sequence are both recoverable from
// the block lines, and the seed word set itself is rebuilt deterministically
// from (model, k, t), so neither is stored.
//
//   recur-ledger/1
//   m 2
//   k 9
//   t 0
//   a 0.6
//   b 1
//   schedule_shift 3
//   seed 42
//   target 200000
//   vstar 000000001
//   qk_count 336
//   insertion <p> <m_index> <y_len_before> <theta_len> <w1> <w2> <w3> \
//             <lambda_index> <predicted_return> <s_p> <ell> <gamma> <gamma_ell>
//   block <kind> <start> <length> <qk_index> <p> <role>
//
// Block kinds: A anchor, S seed, C connector, T replay copy, L closing seed.
// Empty words are written as "eps".

struct LedgerData {
  int m = 0;
  long long k = 0, t = 0;
  double a = 0.0, b = 0.0;
  int schedule_shift = 0;
  std::uint64_t seed = 0;
  long long target_length = 0;
  std::string vstar_text;
  long long qk_count = 0;
  std::vector<BlockRecord> blocks;
  std::vector<InsertionRecord> insertions;
};

namespace detail {

inline char block_kind_code(BlockRecord::Kind k) {
  switch (k) {
    case BlockRecord::Kind::Anchor: return 'A';
    case BlockRecord::Kind::Seed: return 'S';
    case BlockRecord::Kind::Connector: return 'C';
    case BlockRecord::Kind::ThetaCopy: return 'T';
    case BlockRecord::Kind::Lambda: return 'L';
  }
  throw DomainError("block_kind_code: unknown kind");
}

inline BlockRecord::Kind block_kind_from(const std::string& s, LineReader& r) {
  if (s.size() == 1) switch (s[0]) {
      case 'A': return BlockRecord::Kind::Anchor;
      case 'S': return BlockRecord::Kind::Seed;
      case 'C': return BlockRecord::Kind::Connector;
      case 'T': return BlockRecord::Kind::ThetaCopy;
      case 'L': return BlockRecord::Kind::Lambda;
      default: break;
    }
  r.fail("unknown block kind '" + s + "'");
}

inline std::string word_or_eps(const Word& w) {
  return w.empty() ? std::string("eps") : w.text();
}

}  // namespace detail

inline void write_ledger(std::ostream& out, const MoranPoint& pt) {
  out << kLedgerSchema << "\n";
  out << "m " << pt.model.m << "\n";
  out << "k " << pt.k << "\n";
  out << "t " << pt.t << "\n";
  out << "a " << fmt_double(pt.a) << "\n";
  out << "b " << fmt_double(pt.b) << "\n";
  out << "schedule_shift " << pt.schedule_shift << "\n";
  out << "seed " << pt.seed << "\n";
  out << "target " << pt.target_length << "\n";
  out << "vstar " << pt.vstar.text() << "\n";
  out << "qk_count " << pt.qk.size() << "\n";
  for (const InsertionRecord& ins : pt.insertions) {
    out << "insertion " << ins.p << " " << ins.m_index << " "
        << ins.y_len_before << " " << ins.theta_len << " "
        << detail::word_or_eps(ins.w1) << " " << detail::word_or_eps(ins.w2)
        << " " << detail::word_or_eps(ins.w3) << " " << ins.lambda_index << " "
        << ins.predicted_return << " " << ins.s_p << " " << fmt_double(ins.ell)
        << " " << fmt_double(ins.gamma) << " " << fmt_double(ins.gamma_ell)
        << "\n";
  }
  for (const BlockRecord& b : pt.blocks) {
    out << "block " << detail::block_kind_code(b.kind) << " " << b.start << " "
        << b.length << " " << b.qk_index << " " << b.p << " " << b.role
        << "\n";
  }
}

inline LedgerData read_ledger(std::istream& in,
                              const std::string& name = "ledger") {
  detail::LineReader r(in, name);
  detail::expect_schema(r, kLedgerSchema);
  LedgerData ld;
  bool have_m = false, have_k = false, have_t = false, have_a = false,
       have_b = false, have_seed = false, have_target = false,
       have_vstar = false, have_qk = false;

  while (auto line = r.next()) {
    auto toks = detail::split_ws(*line);
    const std::string& key = toks[0];
    auto one = [&](const char* what) -> const std::string& {
      if (toks.size() != 2) r.fail(std::string("'") + what + "' needs one value");
      return toks[1];
    };
    if (key == "m") {
      ld.m = static_cast<int>(parse_ll(one("m"), "m")), have_m = true;
      if (ld.m < 2) r.fail("m must be at least 2");
    } else if (key == "k") {
      ld.k = parse_ll(one("k"), "k"), have_k = true;
    } else if (key == "t") {
      ld.t = parse_ll(one("t"), "t"), have_t = true;
    } else if (key == "a") {
      ld.a = parse_double(one("a"), "a"), have_a = true;
    } else if (key == "b") {
      ld.b = parse_double(one("b"), "b"), have_b = true;
    } else if (key == "schedule_shift") {
      ld.schedule_shift = static_cast<int>(parse_ll(one("schedule_shift"), "schedule_shift"));
    } else if (key == "seed") {
      ld.seed = parse_u64(one("seed"), "seed"), have_seed = true;
    } else if (key == "target") {
      ld.target_length = parse_ll(one("target"), "target"), have_target = true;
    } else if (key == "vstar") {
      ld.vstar_text = one("vstar"), have_vstar = true;
    } else if (key == "qk_count") {
      ld.qk_count = parse_ll(one("qk_count"), "qk_count"), have_qk = true;
    } else if (key == "insertion") {
      if (toks.size() != 14) r.fail("'insertion' needs 13 fields");
      if (!have_m) r.fail("'m' must precede insertion lines");
      InsertionRecord ins;
      ins.p = static_cast<int>(parse_ll(toks[1], "insertion p"));
      ins.m_index = parse_ll(toks[2], "insertion m_index");
      ins.y_len_before = parse_ll(toks[3], "insertion y_len_before");
      ins.theta_len = parse_ll(toks[4], "insertion theta_len");
      ins.w1 = Word::from_text(ld.m, toks[5]);
      ins.w2 = Word::from_text(ld.m, toks[6]);
      ins.w3 = Word::from_text(ld.m, toks[7]);
      ins.lambda_index = parse_ll(toks[8], "insertion lambda_index");
      ins.predicted_return = parse_ll(toks[9], "insertion predicted_return");
      ins.s_p = parse_ll(toks[10], "insertion s_p");
      ins.ell = parse_double(toks[11], "insertion ell");
      ins.gamma = parse_double(toks[12], "insertion gamma");
      ins.gamma_ell = parse_double(toks[13], "insertion gamma_ell");
      ld.insertions.push_back(std::move(ins));
    } else if (key == "block") {
      if (toks.size() != 7) r.fail("'block' needs 6 fields");
      BlockRecord b;
      b.kind = detail::block_kind_from(toks[1], r);
      b.start = parse_ll(toks[2], "block start");
      b.length = parse_ll(toks[3], "block length");
      b.qk_index = parse_ll(toks[4], "block qk_index");
      b.p = static_cast<int>(parse_ll(toks[5], "block p"));
      b.role = static_cast<int>(parse_ll(toks[6], "block role"));
      ld.blocks.push_back(b);
    } else {
      r.fail("unknown key '" + key + "'");
    }
  }

  if (!(have_m && have_k && have_t && have_a && have_b && have_seed &&
        have_target && have_vstar && have_qk))
    throw DomainError(name +
                      ": missing one of m/k/t/a/b/seed/target/vstar/qk_count");
  return ld;
}

inline LedgerData load_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open ledger file '" + path + "'");
  return read_ledger(in, path);
}

inline void save_ledger(const std::string& path, const MoranPoint& pt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write ledger file '" + path + "'");
  write_ledger(out, pt);
}

// Rebuilds a verifiable point from a ledger, a freshly built seed
// configuration for the same (model, k, t), and the stored prefix.  The
// ledger's anchor word and seed count must match what the rebuild produced;
// the drawn-index sequence is recovered from the seed blocks in order.
inline MoranPoint assemble_point(const LedgerData& ld, SeedConfig cfg,
                                 Word prefix) {
  if (cfg.k != ld.k || cfg.t != ld.t)
    throw DomainError("assemble_point: ledger (k, t) does not match the seed set");
  if (cfg.vstar.text() != ld.vstar_text)
    throw DomainError("assemble_point: anchor word mismatch; ledger has '" +
                      ld.vstar_text + "', rebuild produced '" +
                      cfg.vstar.text() + "'");
  if (static_cast<long long>(cfg.qk.size()) != ld.qk_count)
    throw DomainError("assemble_point: seed-set size mismatch");
  const int m = cfg.model().m;
  if (ld.m != m)
    throw DomainError("assemble_point: ledger alphabet does not match the model");
  if (prefix.alphabet_size() != m)
    throw DomainError("assemble_point: prefix alphabet does not match the model");

  MoranPoint pt;
  pt.model = cfg.model();
  pt.k = ld.k;
  pt.t = ld.t;
  pt.a = ld.a;
  pt.b = ld.b;
  pt.schedule_shift = ld.schedule_shift;
  pt.seed = ld.seed;
  pt.target_length = ld.target_length;
  pt.vstar = cfg.vstar;
  pt.qk = cfg.qk;
  pt.prefix = std::move(prefix);
  pt.blocks = ld.blocks;
  pt.insertions = ld.insertions;
  for (const BlockRecord& b : pt.blocks)
    if (b.kind == BlockRecord::Kind::Seed) pt.seed_indices.push_back(b.qk_index);
  return pt;
}

// ---------------------------------------------------------------------------
// Run manifests (recur-manifest/1)
// ---------------------------------------------------------------------------
//
//   recur-manifest/1
//   command moran build
//   param --model model.txt
//   param --k 9
//   seed 42
//   schema recur-prefix/1
//   schema recur-ledger/1
//   tool recur/1.0.0
//   wall_clock_ms 173
//   digest fnv1a64:89abcdef01234567
//
// The digest covers the produced artifact bytes in the order the schema
// lines list them.  Re-running the recorded command with the recorded
// parameters reproduces those artifacts byte for byte; the manifest itself
// is not covered by the digest (its wall_clock_ms varies between runs).

struct Manifest {
  std::string command;                  // subcommand path, e.g. "moran build"
  std::vector<std::string> params;      // flag/value pairs, pre-rendered
  std::optional<std::uint64_t> seed;    // present iff the command draws randomness
  std::vector<std::string> schemas;     // schema tag per produced artifact
  std::string tool_version;
  long long wall_clock_ms = 0;
  std::uint64_t digest = 0;
};

inline void write_manifest(std::ostream& out, const Manifest& man) {
  out << kManifestSchema << "\n";
  out << "command " << man.command << "\n";
  for (const std::string& p : man.params) out << "param " << p << "\n";
  if (man.seed) out << "seed " << *man.seed << "\n";
  for (const std::string& s : man.schemas) out << "schema " << s << "\n";
  out << "tool " << man.tool_version << "\n";
  out << "wall_clock_ms " << man.wall_clock_ms << "\n";
  char hex[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i)
    hex[i] = digits[(man.digest >> (60 - 4 * i)) & 0xF];
  hex[16] = '\0';
  out << "digest fnv1a64:" << hex << "\n";
}

inline Manifest read_manifest(std::istream& in,
                              const std::string& name = "manifest") {
  detail::LineReader r(in, name);
  detail::expect_schema(r, kManifestSchema);
  Manifest man;
  while (auto line = r.next()) {
    auto space = line->find(' ');
    std::string key = line->substr(0, space);
    std::string val =
        space == std::string::npos ? std::string() : line->substr(space + 1);
    if (key == "command") {
      man.command = val;
    } else if (key == "param") {
      man.params.push_back(val);
    } else if (key == "seed") {
      man.seed = parse_u64(val, "seed");
    } else if (key == "schema") {
      man.schemas.push_back(val);
    } else if (key == "tool") {
      man.tool_version = val;
    } else if (key == "wall_clock_ms") {
      man.wall_clock_ms = parse_ll(val, "wall_clock_ms");
    } else if (key == "digest") {
      if (val.rfind("fnv1a64:", 0) != 0 || val.size() != 8 + 16)
        r.fail("digest must look like fnv1a64:<16 hex digits>");
      std::uint64_t d = 0;
      for (std::size_t i = 8; i < val.size(); ++i) {
        char c = val[i];
        int nib = (c >= '0' && c <= '9')   ? c - '0'
                  : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                                           : -1;
        if (nib < 0) r.fail("bad hex digit in digest");
        d = (d << 4) | static_cast<std::uint64_t>(nib);
      }
      man.digest = d;
    } else {
      r.fail("unknown key '" + key + "'");
    }
  }
  if (man.command.empty()) throw DomainError(name + ": missing 'command'");
  return man;
}

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open manifest file '" + path + "'");
  return read_manifest(in, path);
}

inline void save_manifest(const std::string& path, const Manifest& man) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write manifest file '" + path + "'");
  write_manifest(out, man);
}

// Reads a whole file as bytes (for digest computation).
inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace recur::io
