#include "reviewnet/analytics.hpp"

#include <algorithm>
#include <functional>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "reviewnet/text.hpp"

namespace reviewnet::analytics {

std::optional<double> numeric_value(const ReviewRecord& r, std::string_view feature) {
  if (feature == "Clothing ID") return static_cast<double>(r.clothing_id);
  if (feature == "Age") return static_cast<double>(r.age);
  if (feature == "Rating") return static_cast<double>(r.rating);
  if (feature == "Recommended IND") return r.recommended ? 1.0 : 0.0;
  if (feature == "Positive Feedback Count") return static_cast<double>(r.positive_feedback_count);
  throw std::invalid_argument("'" + std::string(feature) + "' is not a numeric feature");
}

std::optional<std::string> categorical_value(const ReviewRecord& r, std::string_view feature) {
  if (feature == "Clothing ID") return std::to_string(r.clothing_id);
  if (feature == "Age") return std::to_string(r.age);
  if (feature == "Title") return r.title;
  if (feature == "Review Text") return r.review_text;
  if (feature == "Rating") return std::to_string(r.rating);
  if (feature == "Recommended IND") return std::string(r.recommended ? "1" : "0");
  if (feature == "Positive Feedback Count") return std::to_string(r.positive_feedback_count);
  if (feature == "Division Name") return r.division;
  if (feature == "Department Name") return r.department;
  if (feature == "Class Name") return r.class_name;
  if (feature == "Sentiment")
    return r.sentiment ? std::optional<std::string>(std::string(to_string(*r.sentiment)))
                       : std::nullopt;
  throw std::invalid_argument("unknown feature '" + std::string(feature) + "'");
}

DescriptiveStats describe(std::span<const ReviewRecord> records, std::string_view feature) {
  std::vector<double> xs;
  for (const auto& r : records)
    if (auto v = numeric_value(r, feature)) xs.push_back(*v);
  if (xs.empty())
    throw std::invalid_argument("describe: no values for '" + std::string(feature) + "'");
  DescriptiveStats s;
  s.feature = std::string(feature);
  s.count = xs.size();
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.std = xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

Ranking unique_counts(std::span<const ReviewRecord> records) {
  Ranking out;
  for (const char* feature : kCsvColumns) {
    std::set<std::string> seen;
    for (const auto& r : records)
      if (auto v = categorical_value(r, feature)) seen.insert(std::move(*v));
    out.emplace_back(feature, seen.size());
  }
  return out;
}

namespace {

Ranking rank_counts(const std::map<std::string, std::size_t>& counts, std::size_t top_n) {
  Ranking ranked(counts.begin(), counts.end());  // already in lexicographic order
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (top_n > 0 && ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

}  // namespace

Ranking freq_dist(std::span<const ReviewRecord> records, std::string_view feature,
                  std::size_t top_n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records)
    if (auto v = categorical_value(r, feature)) ++counts[*v];
  return rank_counts(counts, top_n);
}

CrossTab crosstab(std::span<const ReviewRecord> records, std::string_view row_feature,
                  std::string_view col_feature, bool normalize) {
  CrossTab t;
  t.row_feature = std::string(row_feature);
  t.col_feature = std::string(col_feature);
  std::map<std::pair<std::string, std::string>, std::size_t> cells;
  std::set<std::string> rows, cols;
  for (const auto& r : records) {
    auto a = categorical_value(r, row_feature);
    auto b = categorical_value(r, col_feature);
    if (!a || !b) {
      ++t.excluded;
      continue;
    }
    rows.insert(*a);
    cols.insert(*b);
    ++cells[{*a, *b}];
  }
  t.row_labels.assign(rows.begin(), rows.end());
  t.col_labels.assign(cols.begin(), cols.end());
  t.counts.assign(t.row_labels.size(), std::vector<std::size_t>(t.col_labels.size(), 0));
  for (std::size_t i = 0; i < t.row_labels.size(); ++i)
    for (std::size_t j = 0; j < t.col_labels.size(); ++j)
      if (auto it = cells.find({t.row_labels[i], t.col_labels[j]}); it != cells.end())
        t.counts[i][j] = it->second;
  if (normalize) {
    std::vector<std::vector<double>> norm(t.counts.size());
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
      std::size_t total = 0;
      for (auto c : t.counts[i]) total += c;
      for (auto c : t.counts[i])
        norm[i].push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    t.normalized = std::move(norm);
  }
  return t;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  // Single-pass running co-moments.
  double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    mx += dx / n;
    my += dy / n;
    sxx += dx * (x[i] - mx);
    syy += dy * (y[i] - my);
    sxy += dx * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix grouped_rating_corr(std::span<const ReviewRecord> records) {
  struct Acc {
    double rating = 0;
    double recommended = 0;
    std::size_t n = 0;
  };
  std::map<long, Acc> groups;
  for (const auto& r : records) {
    auto& g = groups[r.clothing_id];
    g.rating += r.rating;
    g.recommended += r.recommended ? 1.0 : 0.0;
    ++g.n;
  }
  if (groups.size() < 2)
    throw std::invalid_argument("grouped_rating_corr: need at least 2 clothing ids, got " +
                                std::to_string(groups.size()));
  std::vector<std::vector<double>> cols(3);
  for (const auto& [id, g] : groups) {
    const double n = static_cast<double>(g.n);
    cols[0].push_back(g.rating / n);
    cols[1].push_back(n);
    cols[2].push_back(g.recommended / n);
  }
  CorrelationMatrix m;
  m.names = {"mean_rating", "review_count", "mean_recommended"};
  m.groups = groups.size();
  m.values.assign(3, std::vector<std::optional<double>>(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) {
        if (pearson(cols[i], cols[j])) m.values[i][j] = 1.0;
      } else {
        m.values[i][j] = pearson(cols[i], cols[j]);
      }
    }
  return m;
}

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
      "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
      "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during",
      "each", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
      "here", "hers", "herself", "him", "himself", "his", "how", "i", "i'm", "i've", "if",
      "in", "into", "is", "it", "it's", "its", "itself", "just", "me", "more", "most", "my",
      "myself", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
      "out", "over", "own", "same", "she", "should", "some", "such", "than", "that", "the",
      "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
      "those", "through", "to", "too", "under", "until", "up", "was", "we", "were", "what",
      "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you",
      "your", "yours", "yourself", "yourselves"};
  return words;
}

bool is_stop_word(std::string_view token) {
  const auto& w = stop_words();
  return std::binary_search(w.begin(), w.end(), token);
}

Ranking word_freq_by_segment(std::span<const ReviewRecord> records, std::string_view segment,
                             std::size_t top_n, int high_rating_threshold) {
  static constexpr std::string_view kDivisionPrefix = "division=";
  std::function<const std::optional<std::string>*(const ReviewRecord&)> pick;
  if (segment == "title") {
    pick = [](const ReviewRecord& r) { return &r.title; };
  } else if (segment == "reviews") {
    pick = [](const ReviewRecord& r) { return &r.review_text; };
  } else if (segment == "rating_high") {
    pick = [=](const ReviewRecord& r) {
      return r.rating > high_rating_threshold ? &r.review_text : nullptr;
    };
  } else if (segment == "rating_low") {
    pick = [=](const ReviewRecord& r) {
      return r.rating <= high_rating_threshold ? &r.review_text : nullptr;
    };
  } else if (segment.substr(0, kDivisionPrefix.size()) == kDivisionPrefix) {
    const std::string division(segment.substr(kDivisionPrefix.size()));
    pick = [division](const ReviewRecord& r) {
      return r.division && *r.division == division ? &r.review_text : nullptr;
    };
  } else {
    throw std::invalid_argument("unknown word-frequency segment '" + std::string(segment) + "'");
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    const auto* text = pick(r);
    if (!text || !*text) continue;
    for (auto& tok : clean_tokens(**text))
      if (!is_stop_word(tok)) ++counts[tok];
  }
  return rank_counts(counts, top_n);
}

std::vector<AgeBin> age_bin_positive_feedback(std::span<const ReviewRecord> records,
                                              int bin_width) {
  if (bin_width < 1) throw std::invalid_argument("age bins: width must be >= 1");
  std::map<int, AgeBin> bins;
  for (const auto& r : records) {
    if (r.age < 0) throw std::invalid_argument("age bins: negative age");
    const int lower = (r.age / bin_width) * bin_width;
    auto& b = bins[lower];
    b.lower = lower;
    b.upper = lower + bin_width;
    ++b.reviews;
    b.positive_feedback += r.positive_feedback_count;
  }
  std::vector<AgeBin> out;
  for (auto& [k, b] : bins) out.push_back(b);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void write_describe_csv(std::ostream& out, std::span<const DescriptiveStats> stats) {
  out << "feature,count,mean,std,min,max\n";
  for (const auto& s : stats)
    out << csv_escape(s.feature) << ',' << s.count << ',' << format_number(s.mean) << ','
        << format_number(s.std) << ',' << format_number(s.min) << ',' << format_number(s.max)
        << '\n';
}

void write_ranking_csv(std::ostream& out, const Ranking& ranking, std::string_view key_header,
                       std::string_view value_header) {
  out << key_header << ',' << value_header << '\n';
  for (const auto& [k, v] : ranking) out << csv_escape(k) << ',' << v << '\n';
}

void write_crosstab_csv(std::ostream& out, const CrossTab& t) {
  out << csv_escape(t.row_feature + " \\ " + t.col_feature);
  for (const auto& c : t.col_labels) out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t i = 0; i < t.row_labels.size(); ++i) {
    out << csv_escape(t.row_labels[i]);
    for (std::size_t j = 0; j < t.col_labels.size(); ++j) {
      out << ',';
      if (t.normalized) out << format_number((*t.normalized)[i][j]);
      else out << t.counts[i][j];
    }
    out << '\n';
  }
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
  out << "variable";
  for (const auto& n : m.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << m.names[i];
    for (const auto& v : m.values[i]) out << ',' << (v ? format_number(*v) : "");
    out << '\n';
  }
}

void write_age_bins_csv(std::ostream& out, std::span<const AgeBin> bins) {
  out << "age_from,age_to,reviews,positive_feedback\n";
  for (const auto& b : bins)
    out << b.lower << ',' << b.upper << ',' << b.reviews << ',' << b.positive_feedback << '\n';
}

}  // namespace reviewnet::analytics
