#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "reviewnet/sentiment.hpp"
#include "reviewnet/text.hpp"

using namespace reviewnet;

namespace {

TokenList toks(std::string_view s) { return clean_tokens(s); }

double compound_of(double s) { return s / std::sqrt(s * s + 15.0); }

}  // namespace

TEST_CASE("score_text hand values") {
  const Lexicon lx = Lexicon::builtin();
  const auto empty = score_text(TokenList{}, lx);
  CHECK(empty.compound == 0.0);
  CHECK(empty.label == SentimentLabel::Neutral);

  const auto good = score_text(toks("good"), lx);
  CHECK(std::abs(good.compound - 0.44043) < 1e-5);
  CHECK(good.label == SentimentLabel::Positive);

  const auto not_good = score_text(toks("not good"), lx);
  CHECK(std::abs(not_good.compound - (-0.34124)) < 1e-5);
  CHECK(not_good.label == SentimentLabel::Negative);

  const auto three = score_text(toks("good good good"), lx);
  CHECK(std::abs(three.compound - 0.82713) < 1e-5);
  CHECK(three.label == SentimentLabel::Positive);
}

TEST_CASE("negation window and boosters") {
  const Lexicon lx = Lexicon::builtin();
  // Negator three tokens back still applies; four tokens back does not.
  CHECK(score_text(toks("not a b good"), lx).compound == doctest::Approx(compound_of(1.9 * -0.74)));
  CHECK(score_text(toks("not a b c good"), lx).compound == doctest::Approx(compound_of(1.9)));
  // Boosters push away from zero, dampeners toward it.
  CHECK(score_text(toks("very good"), lx).compound == doctest::Approx(compound_of(1.9 + 0.293)));
  CHECK(score_text(toks("very bad"), lx).compound == doctest::Approx(compound_of(-2.5 - 0.293)));
  CHECK(score_text(toks("slightly good"), lx).compound ==
        doctest::Approx(compound_of(1.9 - 0.293)));
  // Booster adjusts the valence before the negation factor scales it.
  CHECK(score_text(toks("not very good"), lx).compound ==
        doctest::Approx(compound_of((1.9 + 0.293) * -0.74)));
}

TEST_CASE("label thresholds") {
  CHECK(label_from_compound(0.0) == SentimentLabel::Neutral);
  CHECK(label_from_compound(0.05) == SentimentLabel::Positive);
  CHECK(label_from_compound(-0.05) == SentimentLabel::Negative);
  CHECK(label_from_compound(0.0499) == SentimentLabel::Neutral);
  CHECK(label_from_compound(-0.5) == SentimentLabel::Negative);
}

TEST_CASE("compound properties") {
  double prev = -2.0;
  for (double s = -50.0; s <= 50.0; s += 0.25) {
    const double c = normalize_valence_sum(s);
    CHECK(c > -1.0);
    CHECK(c < 1.0);
    CHECK((c > 0) == (s > 0));
    CHECK((c < 0) == (s < 0));
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("non-lexicon tokens never change the score") {
  const Lexicon lx = Lexicon::builtin();
  const TokenList words = {"good", "bad", "love", "zipper", "fabric", "the", "very", "not"};
  SeededRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    TokenList base;
    const auto n = rng.below(8);
    for (std::uint64_t i = 0; i < n; ++i) base.push_back(words[rng.below(words.size())]);
    TokenList extended = base;
    for (int i = 0; i < 4; ++i) extended.push_back("filler" + std::to_string(i));
    CHECK(score_text(extended, lx).compound == score_text(base, lx).compound);
  }
}

TEST_CASE("negating a single positive hit flips the label") {
  const Lexicon lx = Lexicon::builtin();
  for (const auto& [tok, v] : lx.valence) {
    if (v <= 0) continue;
    const TokenList plain = {tok};
    const TokenList negated = {"not", tok};
    if (std::abs(v * 0.74) < 0.07 || std::abs(v) < 0.07) continue;
    CHECK(score_text(plain, lx).label == SentimentLabel::Positive);
    CHECK(score_text(negated, lx).label == SentimentLabel::Negative);
  }
}

TEST_CASE("lexicon validation and loading") {
  const Lexicon lx = Lexicon::builtin();
  CHECK(lx.valence.size() >= 40);
  CHECK(lx.valence.at("good") == 1.9);
  for (const auto& n : lx.negators) CHECK(lx.boosters.count(n) == 0);

  const Lexicon file = Lexicon::load(std::filesystem::path(REVIEWNET_FIXTURES) / "tiny_lexicon.tsv");
  CHECK(file.valence.size() == 4);
  CHECK(file.valence.at("love") == 3.2);
  CHECK(file.valence.at("bad") == -2.5);
  CHECK(file.negators == lx.negators);

  std::istringstream out_of_range("good\t4.5\n");
  CHECK_THROWS_AS(Lexicon::load(out_of_range), ParseError);
  std::istringstream no_tab("good 1.0\n");
  CHECK_THROWS_AS(Lexicon::load(no_tab), ParseError);
  std::istringstream not_number("good\tx\n");
  try {
    Lexicon::load(not_number);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(Lexicon::load(std::filesystem::path("/nonexistent/lexicon.tsv")), IoError);

  Lexicon bad = lx;
  bad.boosters["not"] = 0.3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rating labelling regimes") {
  CHECK(label_by_rating(3) == SentimentLabel::Positive);
  CHECK(label_by_rating(3, 3, false) == SentimentLabel::Negative);
  CHECK(label_by_rating(4, 3, false) == SentimentLabel::Positive);
  CHECK(label_by_rating(2) == SentimentLabel::Negative);
  for (int r = 1; r <= 5; ++r) CHECK(label_by_rating(r) != SentimentLabel::Neutral);
}

TEST_CASE("auto_label_dataset") {
  const Lexicon lx = Lexicon::builtin();
  std::vector<ReviewRecord> recs(4);
  recs[0].review_text = "Good good good";
  recs[0].recommended = true;
  recs[1].review_text = "Terrible, not good";
  recs[2].review_text = std::nullopt;
  recs[3].review_text = "plain words only";
  recs[3].recommended = true;
  const auto counts = auto_label_dataset(recs, lx);
  CHECK(recs[0].sentiment == SentimentLabel::Positive);
  CHECK(recs[1].sentiment == SentimentLabel::Negative);
  CHECK(recs[2].sentiment == SentimentLabel::Neutral);
  CHECK(recs[3].sentiment == SentimentLabel::Neutral);
  CHECK(counts.total() == 4);
  CHECK(counts.counts[1][2] == 1);
  CHECK(counts.counts[1][1] == 1);
  CHECK(counts.counts[0][0] == 1);
  CHECK(counts.counts[0][1] == 1);

  auto again = recs;
  auto_label_dataset(again, lx);
  CHECK(again == recs);

  std::vector<ReviewRecord> empties(3);
  auto_label_dataset(empties, lx);
  for (const auto& r : empties) CHECK(r.sentiment == SentimentLabel::Neutral);

  std::ostringstream out;
  write_sentiment_counts(out, counts);
  CHECK(out.str() == "recommended,negative,neutral,positive\n0,1,1,0\n1,0,1,1\n");
}
