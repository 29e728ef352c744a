#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "reviewnet/analytics.hpp"
#include "reviewnet/text.hpp"

using namespace reviewnet;
using namespace reviewnet::analytics;

namespace {

ReviewRecord rec(long id, int rating, bool recommended, std::string text = "",
                 std::string division = "General", int age = 30, long feedback = 0) {
  ReviewRecord r;
  r.clothing_id = id;
  r.rating = rating;
  r.recommended = recommended;
  r.age = age;
  r.positive_feedback_count = feedback;
  if (!text.empty()) r.review_text = text;
  r.division = division;
  return r;
}

std::vector<ReviewRecord> fixture() {
  return parse_csv(std::filesystem::path(REVIEWNET_FIXTURES) / "toy_reviews.csv").records;
}

double two_pass_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("describe") {
  std::vector<ReviewRecord> rs;
  for (int r = 1; r <= 5; ++r) rs.push_back(rec(1, r, true));
  const auto s = describe(rs, "Rating");
  CHECK(s.count == 5);
  CHECK(s.mean == 3.0);
  CHECK(std::abs(s.std - 1.581139) < 1e-6);
  CHECK(s.min == 1.0);
  CHECK(s.max == 5.0);
  const auto c = describe(std::vector<ReviewRecord>(4, rec(7, 4, true)), "Rating");
  CHECK(c.std == 0.0);
  CHECK(describe(std::vector<ReviewRecord>{rec(7, 4, true)}, "Rating").std == 0.0);
  CHECK_THROWS(describe(std::vector<ReviewRecord>{}, "Rating"));
  CHECK_THROWS(describe(rs, "Nonsense"));
}

TEST_CASE("unique_counts") {
  const std::vector<ReviewRecord> rs = {rec(5, 4, true, "a"), rec(5, 5, false, "b"),
                                        rec(9, 4, true)};
  const auto u = unique_counts(rs);
  std::map<std::string, std::size_t> m(u.begin(), u.end());
  CHECK(m["Clothing ID"] == 2);
  CHECK(m["Rating"] == 2);
  CHECK(m["Recommended IND"] == 2);
  CHECK(m["Review Text"] == 2);
  CHECK(m["Title"] == 0);
  CHECK(u.front().first == "Clothing ID");

  const auto f = unique_counts(fixture());
  std::map<std::string, std::size_t> fm(f.begin(), f.end());
  CHECK(fm["Clothing ID"] == 6);
  CHECK(fm["Rating"] == 5);
  CHECK(fm["Review Text"] == 9);
  CHECK(fm["Division Name"] == 3);
}

TEST_CASE("freq_dist") {
  std::vector<ReviewRecord> rs = {rec(1, 1, true, "", "a"), rec(1, 1, true, "", "a"),
                                  rec(1, 1, true, "", "b")};
  CHECK(freq_dist(rs, "Division Name") == Ranking{{"a", 2}, {"b", 1}});
  CHECK(freq_dist(rs, "Division Name", 1) == Ranking{{"a", 2}});
  rs.push_back(rec(1, 1, true, "", "c"));
  rs.push_back(rec(1, 1, true, "", "c"));
  CHECK(freq_dist(rs, "Division Name") == Ranking{{"a", 2}, {"c", 2}, {"b", 1}});
}

TEST_CASE("crosstab") {
  std::vector<ReviewRecord> rs = {rec(1, 5, true), rec(1, 5, true), rec(1, 1, false),
                                  rec(1, 5, false), rec(1, 1, false)};
  rs.push_back(rec(1, 5, true));
  rs.back().division.reset();
  const auto t = crosstab(rs, "Rating", "Recommended IND", false);
  CHECK(t.row_labels == std::vector<std::string>{"1", "5"});
  CHECK(t.col_labels == std::vector<std::string>{"0", "1"});
  CHECK(t.counts == std::vector<std::vector<std::size_t>>{{2, 0}, {1, 3}});
  CHECK(t.excluded == 0);

  const auto d = crosstab(rs, "Division Name", "Rating", true);
  CHECK(d.excluded == 1);
  REQUIRE(d.normalized);
  for (const auto& row : *d.normalized) {
    double s = 0;
    for (double v : row) s += v;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }

  // Marginals agree with freq_dist on the same rows.
  const auto all = fixture();
  const auto ct = crosstab(all, "Department Name", "Rating", false);
  std::size_t total = 0;
  for (std::size_t i = 0; i < ct.row_labels.size(); ++i) {
    std::size_t row = 0;
    for (auto c : ct.counts[i]) row += c;
    total += row;
    const auto fd = freq_dist(all, "Department Name");
    const auto it = std::find_if(fd.begin(), fd.end(),
                                 [&](const auto& p) { return p.first == ct.row_labels[i]; });
    REQUIRE(it != fd.end());
    CHECK(it->second == row);
  }
  CHECK(total + ct.excluded == all.size());
}

TEST_CASE("pearson against a two-pass oracle") {
  SeededRng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(999);
    std::vector<double> x(n), y(n);
    const double shift = rng.uniform(-1e3, 1e3);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = shift + rng.uniform(-5, 5);
      y[i] = 0.3 * x[i] + rng.uniform(-5, 5);
    }
    const auto r = pearson(x, y);
    REQUIRE(r);
    CHECK(std::abs(*r - two_pass_pearson(x, y)) < 1e-12);
  }
  const std::vector<double> constant(10, 2.0), ramp = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_FALSE(pearson(constant, ramp).has_value());
  CHECK(*pearson(ramp, ramp) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grouped_rating_corr") {
  const std::vector<ReviewRecord> aligned = {rec(1, 5, true), rec(1, 5, true), rec(2, 1, false),
                                             rec(3, 3, true), rec(3, 3, false)};
  const auto m = grouped_rating_corr(aligned);
  CHECK(m.groups == 3);
  REQUIRE(m.values[0][2]);
  CHECK(std::abs(*m.values[0][2] - 1.0) < 1e-9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(m.values[i][j].has_value() == m.values[j][i].has_value());
      if (m.values[i][j]) {
        CHECK(*m.values[i][j] == *m.values[j][i]);
        CHECK(std::abs(*m.values[i][j]) <= 1.0);
      }
    }
  CHECK(*m.values[0][0] == 1.0);

  // Every group has one review, so the count column is constant.
  const std::vector<ReviewRecord> single = {rec(1, 5, true), rec(2, 1, false)};
  const auto s = grouped_rating_corr(single);
  CHECK_FALSE(s.values[1][0].has_value());
  CHECK_FALSE(s.values[1][1].has_value());
  CHECK_THROWS_AS(grouped_rating_corr(std::vector<ReviewRecord>{rec(1, 5, true)}),
                  std::invalid_argument);
}

TEST_CASE("stop words") {
  CHECK(std::is_sorted(stop_words().begin(), stop_words().end()));
  CHECK(stop_words().size() >= 100);
  CHECK(is_stop_word("the"));
  CHECK_FALSE(is_stop_word("dress"));
}

TEST_CASE("word_freq_by_segment") {
  const std::vector<ReviewRecord> one = {rec(1, 5, true, "love love dress")};
  CHECK(word_freq_by_segment(one, "reviews") == Ranking{{"love", 2}, {"dress", 1}});
  CHECK_THROWS_AS(word_freq_by_segment(one, "colour"), std::invalid_argument);

  const auto all = fixture();
  for (const auto& [w, n] : word_freq_by_segment(all, "reviews")) CHECK_FALSE(is_stop_word(w));

  // Disjoint segments add up to the whole corpus.
  auto as_map = [](const Ranking& r) { return std::map<std::string, std::size_t>(r.begin(), r.end()); };
  auto high = as_map(word_freq_by_segment(all, "rating_high"));
  const auto low = as_map(word_freq_by_segment(all, "rating_low"));
  for (const auto& [w, n] : low) high[w] += n;
  CHECK(high == as_map(word_freq_by_segment(all, "reviews")));

  std::map<std::string, std::size_t> by_division;
  for (const auto& [division, n] : freq_dist(all, "Division Name"))
    for (const auto& [w, c] : word_freq_by_segment(all, "division=" + division)) by_division[w] += c;
  CHECK(by_division == as_map(word_freq_by_segment(all, "reviews")));

  // Oracle: count cleaned non-stop tokens directly.
  std::map<std::string, std::size_t> oracle;
  for (const auto& r : all)
    if (r.title)
      for (const auto& t : clean_tokens(*r.title))
        if (!is_stop_word(t)) ++oracle[t];
  CHECK(as_map(word_freq_by_segment(all, "title")) == oracle);
  CHECK(word_freq_by_segment(all, "reviews", 3).size() == 3);
}

TEST_CASE("age bins") {
  const std::vector<ReviewRecord> rs = {rec(1, 5, true, "", "g", 35, 2),
                                        rec(1, 5, true, "", "g", 44, 3),
                                        rec(1, 5, true, "", "g", 40, 1)};
  const auto bins = age_bin_positive_feedback(rs);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].lower == 30);
  CHECK(bins[0].upper == 40);
  CHECK(bins[0].reviews == 1);
  CHECK(bins[1].lower == 40);
  CHECK(bins[1].reviews == 2);
  CHECK(bins[1].positive_feedback == 4);
  CHECK(age_bin_positive_feedback(std::vector<ReviewRecord>{}).empty());

  const auto all = fixture();
  std::size_t reviews = 0;
  long feedback = 0, expected = 0;
  for (const auto& b : age_bin_positive_feedback(all)) {
    reviews += b.reviews;
    feedback += b.positive_feedback;
  }
  for (const auto& r : all) expected += r.positive_feedback_count;
  CHECK(reviews == all.size());
  CHECK(feedback == expected);
}

TEST_CASE("csv renderings") {
  std::ostringstream out;
  write_ranking_csv(out, Ranking{{"a,b", 2}}, "word", "count");
  CHECK(out.str() == "word,count\n\"a,b\",2\n");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  std::ostringstream ct;
  write_crosstab_csv(ct, crosstab(std::vector<ReviewRecord>{rec(1, 5, true)}, "Rating",
                                  "Recommended IND", false));
  CHECK(ct.str() == "Rating \\ Recommended IND,1\n5,1\n");
}
