#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reviewnet/dataset.hpp"

namespace reviewnet::analytics {

// Features are addressed by their CSV column names.
inline constexpr const char* kNumericFeatures[] = {"Clothing ID", "Age", "Rating",
                                                   "Recommended IND", "Positive Feedback Count"};

std::optional<double> numeric_value(const ReviewRecord& r, std::string_view feature);
std::optional<std::string> categorical_value(const ReviewRecord& r, std::string_view feature);

struct DescriptiveStats {
  std::string feature;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, n - 1 divisor; 0 when count == 1
  double min = 0.0;
  double max = 0.0;
};

DescriptiveStats describe(std::span<const ReviewRecord> records, std::string_view feature);

using Ranking = std::vector<std::pair<std::string, std::size_t>>;

/// Distinct non-missing values per dataset column, in schema order.
Ranking unique_counts(std::span<const ReviewRecord> records);

/// Descending counts with a lexicographic tiebreak, truncated to top_n
/// (0 keeps everything).
Ranking freq_dist(std::span<const ReviewRecord> records, std::string_view feature,
                  std::size_t top_n = 0);

struct CrossTab {
  std::string row_feature;
  std::string col_feature;
  std::vector<std::string> row_labels;  // sorted
  std::vector<std::string> col_labels;  // sorted
  std::vector<std::vector<std::size_t>> counts;
  std::optional<std::vector<std::vector<double>>> normalized;  // each row sums to 1
  std::size_t excluded = 0;  // rows missing either feature
};

CrossTab crosstab(std::span<const ReviewRecord> records, std::string_view row_feature,
                  std::string_view col_feature, bool normalize);

/// Pearson coefficient, or nullopt when either input is constant (or n < 2).
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> values;
  std::size_t groups = 0;
};

/// Groups by clothing id and correlates per-group mean rating, review count
/// and mean recommendation.
CorrelationMatrix grouped_rating_corr(std::span<const ReviewRecord> records);

/// Fixed English function-word list removed from word-frequency tables.
bool is_stop_word(std::string_view token);
const std::vector<std::string>& stop_words();

/// Segments: "title", "reviews", "rating_high" (rating > threshold),
/// "rating_low" (rating <= threshold) and "division=<Division Name>".
/// Unknown names throw std::invalid_argument.
Ranking word_freq_by_segment(std::span<const ReviewRecord> records, std::string_view segment,
                             std::size_t top_n = 0, int high_rating_threshold = 3);

struct AgeBin {
  int lower = 0;  // inclusive
  int upper = 0;  // exclusive
  std::size_t reviews = 0;
  long positive_feedback = 0;
};

/// Non-empty bins [k*w, (k+1)*w) in ascending order.
std::vector<AgeBin> age_bin_positive_feedback(std::span<const ReviewRecord> records,
                                              int bin_width = 10);

// CSV renderings, one table each.
void write_describe_csv(std::ostream& out, std::span<const DescriptiveStats> stats);
void write_ranking_csv(std::ostream& out, const Ranking& ranking, std::string_view key_header,
                       std::string_view value_header);
void write_crosstab_csv(std::ostream& out, const CrossTab& table);
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);
void write_age_bins_csv(std::ostream& out, std::span<const AgeBin> bins);

/// Formats a double with the shortest round-trip representation.
std::string format_number(double v);

}  // namespace reviewnet::analytics
