#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "recur/word.hpp"

using namespace recur;

namespace {

Word w2(const std::string& text) { return Word::from_text(2, text); }

Word random_word(std::mt19937_64& rng, int m, std::size_t len) {
  std::vector<Symbol> s(len);
  for (auto& v : s) v = static_cast<Symbol>(rng() % m);
  return Word(m, std::move(s));
}

// Oracle: position-by-position comparison, no early exit tricks.
std::vector<std::size_t> occurrences_oracle(const Word& v, const Word& w) {
  std::vector<std::size_t> out;
  if (v.size() > w.size()) return out;
  for (std::size_t i = 1; i + v.size() - 1 <= w.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 1; j <= v.size(); ++j)
      if (w.at(i + j - 1) != v.at(j)) { hit = false; break; }
    if (hit) out.push_back(i);
  }
  return out;
}

Word word_from_index(int m, std::size_t len, unsigned long long idx) {
  std::vector<Symbol> s(len);
  for (std::size_t i = 0; i < len; ++i) {
    s[len - 1 - i] = static_cast<Symbol>(idx % m);
    idx /= m;
  }
  return Word(m, std::move(s));
}

}  // namespace

TEST_CASE("empty word is a two-sided identity for concatenation") {
  const Word eps(2);
  CHECK(concat(eps, w2("01")) == w2("01"));
  CHECK(concat(w2("01"), eps) == w2("01"));
  CHECK(concat(eps, eps) == eps);
  CHECK(concat(w2("01"), w2("10")) == w2("0110"));
}

TEST_CASE("concatenation is associative and adds lengths") {
  std::mt19937_64 rng(7001);
  for (int trial = 0; trial < 200; ++trial) {
    Word a = random_word(rng, 2, rng() % 8);
    Word b = random_word(rng, 2, rng() % 8);
    Word c = random_word(rng, 2, rng() % 8);
    CHECK(concat(concat(a, b), c) == concat(a, concat(b, c)));
    CHECK(concat(a, b).size() == a.size() + b.size());
  }
}

TEST_CASE("cross-alphabet operations are rejected") {
  CHECK_THROWS_AS(concat(Word::from_text(2, "01"), Word::from_text(3, "01")), DomainError);
  CHECK_THROWS_AS(subword_occurrences(Word::from_text(2, "0"), Word::from_text(3, "0")),
                  DomainError);
  CHECK_THROWS_AS(metric_distance(Word::from_text(2, "0"), Word::from_text(3, "0")),
                  DomainError);
  CHECK_THROWS_AS(Word(2, {0, 2}), DomainError);
  CHECK_THROWS_AS(Word(1), DomainError);
}

TEST_CASE("prefix and suffix select the expected symbols") {
  CHECK(prefix(w2("0110"), 2) == w2("01"));
  CHECK(suffix(w2("0110"), 3) == w2("110"));
  CHECK(prefix(w2("0110"), 4) == w2("0110"));
  CHECK(prefix(w2("0110"), 0) == Word(2));
  CHECK_THROWS_AS(prefix(w2("01"), 3), DomainError);
  CHECK_THROWS_AS(suffix(w2("01"), 3), DomainError);
}

TEST_CASE("prefix plus matching suffix reconstructs the word") {
  std::mt19937_64 rng(7002);
  for (int trial = 0; trial < 100; ++trial) {
    Word w = random_word(rng, 3, 1 + rng() % 12);
    for (std::size_t n = 0; n <= w.size(); ++n)
      CHECK(concat(prefix(w, n), suffix(w, w.size() - n)) == w);
  }
}

TEST_CASE("subword occurrences: pinned examples") {
  CHECK(subword_occurrences(w2("01"), w2("0101")) == std::vector<std::size_t>{1, 3});
  CHECK(subword_occurrences(w2("11"), w2("0101")).empty());
  CHECK(subword_occurrences(w2("010"), w2("01010")) == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(subword_occurrences(Word(2), w2("01")), DomainError);
}

TEST_CASE("subword occurrences agree with the quadratic oracle") {
  // Exhaustive short patterns against exhaustive hosts.
  for (std::size_t lv = 1; lv <= 3; ++lv) {
    for (unsigned long long iv = 0; iv < (1ull << lv); ++iv) {
      Word v = word_from_index(2, lv, iv);
      for (std::size_t lw = 1; lw <= 10; ++lw)
        for (unsigned long long iw = 0; iw < (1ull << lw); ++iw) {
          Word w = word_from_index(2, lw, iw);
          CHECK(subword_occurrences(v, w) == occurrences_oracle(v, w));
        }
    }
  }
  // Random longer pairs up to the length-12 bound.
  std::mt19937_64 rng(7003);
  for (int trial = 0; trial < 2000; ++trial) {
    Word v = random_word(rng, 2, 1 + rng() % 6);
    Word w = random_word(rng, 2, 1 + rng() % 12);
    CHECK(subword_occurrences(v, w) == occurrences_oracle(v, w));
  }
}

TEST_CASE("metric distance: pinned examples") {
  auto d1 = metric_distance(w2("0110"), w2("1110"));
  REQUIRE_FALSE(d1.indistinguishable);
  CHECK(d1.first_diff == 1);
  CHECK(d1.value == Catch::Approx(std::exp(-1.0)));

  auto d3 = metric_distance(w2("011"), w2("010"));
  REQUIRE_FALSE(d3.indistinguishable);
  CHECK(d3.first_diff == 3);
  CHECK(d3.value == Catch::Approx(std::exp(-3.0)));

  CHECK(metric_distance(w2("01"), w2("01")).indistinguishable);
  CHECK(metric_distance(w2("01"), w2("0110")).indistinguishable);
  CHECK(metric_distance(Word(2), w2("0")).indistinguishable);
}

TEST_CASE("metric distance is symmetric and quantized") {
  std::mt19937_64 rng(7004);
  for (int trial = 0; trial < 500; ++trial) {
    Word x = random_word(rng, 2, 1 + rng() % 10);
    Word y = random_word(rng, 2, 1 + rng() % 10);
    auto dxy = metric_distance(x, y);
    auto dyx = metric_distance(y, x);
    CHECK(dxy.indistinguishable == dyx.indistinguishable);
    CHECK(dxy.first_diff == dyx.first_diff);
    if (!dxy.indistinguishable) {
      CHECK(dxy.value == dyx.value);
      // Value is e^{-i} for a positive integer i.
      double i = -std::log(dxy.value);
      CHECK(i == Catch::Approx(std::round(i)));
      CHECK(dxy.first_diff >= 1);
    }
  }
}

TEST_CASE("ball characterization: d <= e^{-n-1} iff first n symbols agree") {
  // Matches the pinned examples (first disagreement at index i gives e^{-i}):
  // landing in the closed e^{-n-1} ball is the same as matching n symbols.
  std::mt19937_64 rng(7005);
  for (int trial = 0; trial < 500; ++trial) {
    Word x = random_word(rng, 2, 12);
    Word y = random_word(rng, 2, 12);
    auto d = metric_distance(x, y);
    for (std::size_t n = 0; n <= 11; ++n) {
      bool agree = prefix(x, n) == prefix(y, n);
      bool close = d.indistinguishable ||
                   d.value <= std::exp(-static_cast<double>(n + 1)) * (1 + 1e-12);
      CHECK(agree == close);
    }
  }
}

TEST_CASE("word text round trip") {
  CHECK(w2("0110").text() == "0110");
  CHECK(Word(2).text() == "");
  CHECK(Word::from_text(2, "eps") == Word(2));
  Word big = Word::from_text(12, "0,11,3");
  CHECK(big.size() == 3);
  CHECK(big.at(2) == 11);
  CHECK(big.text() == "0,11,3");
  CHECK_THROWS_AS(Word::from_text(2, "012"), DomainError);
  CHECK_THROWS_AS(Word::from_text(2, "0a1"), DomainError);
}
