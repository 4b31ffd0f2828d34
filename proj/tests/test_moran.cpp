#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "recur/errors.hpp"
#include "recur/moran.hpp"

using namespace recur;

namespace {

Word bits(const std::string& s) { return Word::from_text(2, s); }

Schedule toy_schedule() {
  // First timing threshold e^{gamma_1 ell_1} = 11.78, between the plain
  // lengths 10 and 15, so the first replay fires while the third block lands.
  return shift_for_construction(make_schedule(0.4, 0.44, 200), 5, 0);
}

Schedule toy_schedule_shifted() {
  // One more dropped term: thresholds 44.9, 163.9, 1313, 7766, ... with
  // comfortably growing replay windows.
  return detail::drop_prefix(toy_schedule(), 1);
}

Schedule main_schedule(long long k, long long t) {
  return shift_for_construction(make_schedule(0.6, 1.0, 200), k, t);
}

}  // namespace

// ---- seed sets -------------------------------------------------------------

TEST_CASE("seed set at block length five is the twelve unclipped words") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  CHECK(cfg.k == 5);
  CHECK(cfg.t == 0);
  CHECK(cfg.pool_size == 32);
  CHECK(cfg.vstar.text() == "00001");
  REQUIRE(cfg.qk.size() == 12);
  CHECK(cfg.qk.front().text() == "10001");
  CHECK(cfg.qk.back().text() == "11111");
  CHECK(std::is_sorted(cfg.qk.begin(), cfg.qk.end()));
  CHECK(cfg.anchor_prefix.size() == 0);
  for (const Word& w : cfg.qk) {
    REQUIRE(w.size() == 5);
    CHECK(w.at(1) == 1);                      // no prefix overlap with 00001
    CHECK(!(w.at(4) == 0 && w.at(5) == 0));   // no suffix overlap with 00001
    CHECK(w.text() != cfg.vstar.text());
  }
  CHECK(cfg.property_c_exhaustive);
}

TEST_CASE("seed set at block length nine matches an independent recount") {
  const auto cfg = build_qk(full_shift(2), 9, 0);
  CHECK(cfg.pool_size == 512);
  CHECK(cfg.vstar.text() == "000000001");
  CHECK(cfg.qk.front().text() == "010000001");

  // Independent filter: survivors start "1" or "01" and do not end "000".
  long long count = 0;
  for (long long code = 0; code < 512; ++code) {
    std::vector<Symbol> w(9);
    for (int i = 0; i < 9; ++i) w[static_cast<std::size_t>(i)] = (code >> (8 - i)) & 1;
    const bool starts_ok = w[0] == 1 || (w[0] == 0 && w[1] == 1);
    const bool ends_ok = !(w[6] == 0 && w[7] == 0 && w[8] == 0);
    if (starts_ok && ends_ok) ++count;
  }
  CHECK(count == 336);
  CHECK(static_cast<long long>(cfg.qk.size()) == count);
}

TEST_CASE("seed set on the golden-mean shift respects the gap budget") {
  const auto cfg = build_qk(sft(2, {bits("11")}), 12, 2);
  CHECK(cfg.pool_size == 377);  // admissible words of length 12
  CHECK(cfg.qk.size() == 246);
  CHECK(cfg.vstar.text() == "000000000001");
  CHECK(cfg.property_c_exhaustive);
  const auto model = sft(2, {bits("11")});
  for (const Word& w : cfg.qk) {
    CHECK(admits(model, w));
    CHECK(w.text().find("11") == std::string::npos);
  }
}

TEST_CASE("seed-set construction rejects bad shapes and scans for a viable k") {
  CHECK_THROWS_AS(build_qk(full_shift(2), 6, 2), DomainError);   // k <= 3t
  CHECK_THROWS_AS(build_qk(sft(2, {bits("11")}), 12, 0), DomainError);  // t < gap
  try {
    build_qk(full_shift(2), 2, 0);
    FAIL("k = 2 must not produce a seed set");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("smallest passing k is 4") != std::string::npos);
  }
}

// ---- construction ----------------------------------------------------------

TEST_CASE("construction is deterministic and lands the pinned first replay") {
  const auto cfg = build_qk(full_shift(2), 9, 0);
  const auto sched = main_schedule(9, 0);
  CHECK(sched.index_shift == 3);

  const auto pt = construct_point(cfg, sched, 200000, 42);
  CHECK(pt.prefix.size() >= 200000);
  CHECK(pt.k == 9);
  CHECK(pt.schedule_shift == 3);
  REQUIRE(pt.insertions.size() == 1);
  const auto& ins = pt.insertions[0];
  CHECK(ins.p == 1);
  CHECK(ins.m_index == 13823);        // least q with 9(q+1) >= e^{11.7314}
  CHECK(ins.y_len_before == 124416);
  CHECK(ins.theta_len == 18);
  CHECK(ins.w1.size() == 0);
  CHECK(ins.predicted_return == 124416);

  const auto again = construct_point(cfg, sched, 200000, 42);
  CHECK(again.prefix == pt.prefix);
  CHECK(again.seed_indices == pt.seed_indices);
  REQUIRE(again.blocks.size() == pt.blocks.size());
  CHECK(again.blocks.back().start == pt.blocks.back().start);

  const auto other = construct_point(cfg, sched, 200000, 43);
  CHECK(other.seed_indices != pt.seed_indices);
}

TEST_CASE("the block ledger re-parses the prefix exactly") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 10000, 7);

  std::vector<Symbol> rebuilt;
  for (const auto& b : pt.blocks) {
    REQUIRE(b.start == static_cast<long long>(rebuilt.size()) + 1);
    switch (b.kind) {
      case BlockRecord::Kind::Anchor: {
        const auto& v = pt.vstar.symbols();
        rebuilt.insert(rebuilt.end(), v.begin(), v.end());
        break;
      }
      case BlockRecord::Kind::Seed:
      case BlockRecord::Kind::Lambda: {
        const auto& v = pt.qk[static_cast<std::size_t>(b.qk_index)].symbols();
        REQUIRE(static_cast<long long>(v.size()) == b.length);
        rebuilt.insert(rebuilt.end(), v.begin(), v.end());
        break;
      }
      case BlockRecord::Kind::ThetaCopy: {
        REQUIRE(b.length < b.start);  // replay of a strictly earlier prefix
        rebuilt.insert(rebuilt.end(), rebuilt.begin(),
                       rebuilt.begin() + b.length);
        break;
      }
      case BlockRecord::Kind::Connector: {
        const auto& y = pt.prefix.symbols();
        rebuilt.insert(rebuilt.end(), y.begin() + (b.start - 1),
                       y.begin() + (b.start - 1 + b.length));
        break;
      }
    }
  }
  CHECK(rebuilt == pt.prefix.symbols());
}

TEST_CASE("the anchor word heads the plain block stream and never recurs in it") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 3000, 11);

  // Rebuild the plain stream (no replays; gap 0 means no connectors either).
  std::vector<Symbol> plain = pt.vstar.symbols();
  for (long long idx : pt.seed_indices) {
    const auto& v = pt.qk[static_cast<std::size_t>(idx)].symbols();
    plain.insert(plain.end(), v.begin(), v.end());
  }
  const auto& vs = pt.vstar.symbols();
  long long occurrences = 0;
  for (std::size_t i = 0; i + vs.size() <= plain.size(); ++i)
    if (std::equal(vs.begin(), vs.end(), plain.begin() + static_cast<long long>(i)))
      ++occurrences;
  CHECK(occurrences == 1);
  CHECK(std::equal(vs.begin(), vs.end(), plain.begin()));
}

TEST_CASE("every replay event satisfies its window and agreement rules") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 10000, 7);
  REQUIRE(pt.insertions.size() == 4);

  std::set<std::vector<Symbol>> qset;
  for (const Word& w : pt.qk) qset.insert(w.symbols());
  const auto& y = pt.prefix.symbols();

  long long prev_m = -1, prev_theta = 0, prev_s = 0;
  for (const auto& ins : pt.insertions) {
    CHECK(ins.m_index > prev_m);
    CHECK(ins.theta_len > prev_theta);
    CHECK(ins.theta_len > prev_s);
    const double off = static_cast<double>(ins.theta_len) - ins.ell;
    CHECK(off >= 0.0);
    CHECK(off < 5.0);
    const std::vector<Symbol> tail(y.begin() + (ins.theta_len - 5),
                                   y.begin() + ins.theta_len);
    CHECK(qset.count(tail) == 1);

    // theta w2 lambda must not be a prefix of the pre-replay stream.
    std::vector<Symbol> probe(y.begin(), y.begin() + ins.theta_len);
    const auto& lam = pt.qk[static_cast<std::size_t>(ins.lambda_index)].symbols();
    probe.insert(probe.end(), ins.w2.symbols().begin(), ins.w2.symbols().end());
    probe.insert(probe.end(), lam.begin(), lam.end());
    CHECK(!(static_cast<long long>(probe.size()) <= ins.y_len_before &&
            std::equal(probe.begin(), probe.end(), y.begin())));

    CHECK(ins.predicted_return ==
          ins.y_len_before + static_cast<long long>(ins.w1.size()));
    prev_m = ins.m_index;
    prev_theta = ins.theta_len;
    prev_s = ins.s_p;
  }
}

// ---- verification ----------------------------------------------------------

TEST_CASE("verification confirms returns, sandwich, and plateaus on a toy point") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 10000, 7);
  const auto rep = verify_point(pt);
  CHECK(rep.passed);
  REQUIRE(rep.checkpoints.size() == 4);
  CHECK(rep.checkpoints[0].tau == 45);
  CHECK(rep.checkpoints[3].tau == 7830);
  for (const auto& cp : rep.checkpoints) {
    CHECK(cp.exact_match);
    CHECK(cp.sandwich_ok);
    CHECK(cp.plateau_ok);
    // The checkpoint ratio log tau / ell_p tracks the scheduled exponent.
    CHECK(std::abs(cp.ratio_ell - cp.gamma) < 0.05);
  }
}

TEST_CASE("verification fails on a flipped symbol or a doctored ledger") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 10000, 7);

  auto syms = pt.prefix.symbols();
  const auto pos = static_cast<std::size_t>(pt.insertions[0].predicted_return + 3);
  syms[pos] = 1 - syms[pos];
  MoranPoint flipped = pt;
  flipped.prefix = Word(2, syms);
  CHECK(!verify_point(flipped).passed);

  MoranPoint doctored = pt;
  doctored.insertions[1].predicted_return += 5;
  const auto rep = verify_point(doctored);
  CHECK(!rep.passed);
  CHECK(rep.note.find("return time differs") != std::string::npos);
}

TEST_CASE("a short target reaches exactly one checkpoint") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 100, 5);
  REQUIRE(pt.insertions.size() == 1);
  const auto rep = verify_point(pt);
  CHECK(rep.passed);
  REQUIRE(rep.checkpoints.size() == 1);
  CHECK(rep.checkpoints[0].exact_match);
}

TEST_CASE("a target below every threshold verifies with no checkpoints") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto pt = construct_point(cfg, toy_schedule_shifted(), 40, 5);
  CHECK(pt.insertions.empty());
  const auto rep = verify_point(pt);
  CHECK(rep.passed);
  CHECK(rep.note.find("no checkpoints") != std::string::npos);
}

TEST_CASE("golden-mean construction with connectors verifies at scale") {
  const auto model = sft(2, {bits("11")});
  const auto cfg = build_qk(model, 12, 2);
  const auto pt = construct_point(cfg, main_schedule(12, 2), 4000000, 9001);
  REQUIRE(pt.insertions.size() == 1);
  CHECK(admits(model, pt.prefix));
  const auto rep = verify_point(pt);
  CHECK(rep.passed);
  REQUIRE(rep.checkpoints.size() == 1);
  CHECK(rep.checkpoints[0].exact_match);
  CHECK(std::abs(rep.checkpoints[0].ratio_ell - 0.6) < 1e-3);
}

TEST_CASE("full-shift construction at four million symbols hits both checkpoints") {
  const auto cfg = build_qk(full_shift(2), 9, 0);
  const auto pt = construct_point(cfg, main_schedule(9, 0), 4000000, 42);
  REQUIRE(pt.insertions.size() == 2);
  const auto rep = verify_point(pt);
  CHECK(rep.passed);
  REQUIRE(rep.checkpoints.size() == 2);
  CHECK(rep.checkpoints[0].tau == 124416);
  CHECK(rep.checkpoints[1].n == 27);
  CHECK(rep.checkpoints[1].tau == 3822750);
  CHECK(std::abs(rep.checkpoints[0].ratio_ell - 1.0) < 1e-4);
  CHECK(std::abs(rep.checkpoints[1].ratio_ell - 0.6) < 1e-4);
  // First-return agreement with the direct single-n scan.
  const auto rt = first_return(pt.prefix, 18);
  REQUIRE(rt.determined);
  CHECK(rt.tau == 124416);
}

TEST_CASE("construction rejects unprepared, exhausted, or oversized requests") {
  const auto cfg = build_qk(full_shift(2), 9, 0);
  CHECK_THROWS_AS(construct_point(cfg, make_schedule(0.6, 1.0, 200), 1000, 1),
                  DomainError);  // no construction shift applied
  CHECK_THROWS_AS(construct_point(cfg, main_schedule(9, 0), 200000001LL, 1),
                  DomainError);  // above the hard cap
  try {
    construct_point(cfg, shift_for_construction(make_schedule(0.6, 1.0, 5), 9, 0),
                    4000000, 1);
    FAIL("exhausted schedule must throw");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("exhausted") != std::string::npos);
  }
}

TEST_CASE("a schedule with cramped windows fails loudly at the second replay") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  try {
    construct_point(cfg, toy_schedule(), 200, 3);
    FAIL("cramped replay window must throw");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("no block-aligned replay prefix") !=
          std::string::npos);
  }
}

// ---- tree statistics -------------------------------------------------------

TEST_CASE("the choice tree branches exactly by the seed count at every node") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto st = delta_stats(cfg, toy_schedule(), 3, 2000);
  CHECK(st.branching == 12);
  CHECK(st.branching_exact);
  CHECK(!st.sampled);
  CHECK(st.words_materialized == 12 + 144 + 1728);
  REQUIRE(st.level_case == std::vector<int>{1, 1, 2});
  REQUIRE(st.level_lengths.size() == 3);
  CHECK(st.level_lengths[0] == std::vector<long long>{10});
  CHECK(st.level_lengths[1] == std::vector<long long>{15});
  CHECK(st.level_lengths[2] == std::vector<long long>{35});
  CHECK(st.case1_ceiling == 64);
  CHECK(st.case2_ceiling == 8192);
  CHECK(st.max_case1_ambiguity <= st.case1_ceiling);
  CHECK(st.max_case2_ambiguity <= st.case2_ceiling);
  CHECK(st.max_case1_ambiguity >= 1);
  CHECK(st.max_case2_ambiguity >= 1);
}

TEST_CASE("with no reachable threshold the tree stays in plain growth") {
  const auto cfg = build_qk(full_shift(2), 5, 0);
  const auto st = delta_stats(cfg, toy_schedule_shifted(), 3, 2000);
  REQUIRE(st.level_case == std::vector<int>{1, 1, 1});
  CHECK(st.level_lengths[2] == std::vector<long long>{20});
  CHECK(st.max_case2_ambiguity == 0);
}

TEST_CASE("tree statistics enforce their work budget") {
  const auto cfg = build_qk(full_shift(2), 9, 0);
  CHECK_THROWS_AS(delta_stats(cfg, main_schedule(9, 0), 0, 10), DomainError);
  CHECK_THROWS_AS(delta_stats(cfg, main_schedule(9, 0), 6, 100000000LL), BudgetError);
}

// ---- dimension -------------------------------------------------------------

TEST_CASE("the symbolic dimension bound lands near the full-shift entropy") {
  const auto cfg = build_qk(full_shift(2), 9, 0);
  const auto est = dimension_lower_bound(cfg, main_schedule(9, 0), false);
  CHECK(est.qk_size == 336);
  CHECK(est.symbolic_bound ==
        Catch::Approx(std::log(336.0) / (1.02 * 9.0)).epsilon(1e-12));
  CHECK(std::abs(est.symbolic_bound / std::log(2.0) - 1.0) < 0.10);
  CHECK(!est.interval_mode);
  // Widening the connector budget can only dilute the bound.
  const auto wide = build_qk(sft(2, {bits("11")}), 12, 2);
  const auto wider = build_qk(sft(2, {bits("11")}), 12, 3);
  const auto e2 = dimension_lower_bound(wide, main_schedule(12, 2), false);
  const auto e3 = dimension_lower_bound(wider, main_schedule(12, 3), false);
  CHECK(e3.symbolic_bound < e2.symbolic_bound);
}

TEST_CASE("interval mode recovers the dimension from box counts") {
  const auto cfg = build_qk(interval_coding(make_alpha_beta(0.0, 2.0)), 9, 0);
  CHECK(cfg.qk.size() == 336);  // same pruning as the full shift
  const auto est = dimension_lower_bound(cfg, main_schedule(9, 0), true);
  CHECK(est.interval_mode);
  REQUIRE(est.box_points.size() == 3);
  CHECK(est.box_count_slope ==
        Catch::Approx(std::log(336.0) / (9.0 * std::log(2.0))).epsilon(1e-6));
  CHECK(std::abs(est.box_count_slope - 1.0) < 0.20);
  CHECK(est.closed_form ==
        Catch::Approx((std::log(336.0) / 9.0 - 0.01) / (std::log(2.0) + 0.02))
            .epsilon(1e-9));

  const auto sym = build_qk(full_shift(2), 9, 0);
  CHECK_THROWS_AS(dimension_lower_bound(sym, main_schedule(9, 0), true), DomainError);
}
