#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reviewnet/errors.hpp"
#include "reviewnet/sentiment_label.hpp"

namespace reviewnet {

/// One row of the women's clothing reviews CSV.
struct ReviewRecord {
  std::size_t row_id = 0;
  long clothing_id = 0;
  int age = 0;
  std::optional<std::string> title;
  std::optional<std::string> review_text;
  int rating = 0;
  bool recommended = false;
  long positive_feedback_count = 0;
  std::optional<std::string> division;
  std::optional<std::string> department;
  std::optional<std::string> class_name;

  // Present once the lexicon labeller has run (or was read back from its output).
  std::optional<double> sentiment_compound;
  std::optional<SentimentLabel> sentiment;

  friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

/// A data row that was rejected. `line` is the 1-based physical line where the
/// record starts; `row` is the 0-based data-row ordinal.
struct RowIssue {
  std::size_t line = 0;
  std::size_t row = 0;
  std::string message;
};

struct ParsedDataset {
  std::vector<ReviewRecord> records;
  std::vector<RowIssue> issues;
  bool has_index_column = false;
  bool has_sentiment_columns = false;
};

inline constexpr const char* kCsvColumns[] = {
    "Clothing ID",  "Age",     "Title",          "Review Text",     "Rating",
    "Recommended IND", "Positive Feedback Count", "Division Name", "Department Name",
    "Class Name"};
inline constexpr const char* kCompoundColumn = "Sentiment Compound";
inline constexpr const char* kSentimentColumn = "Sentiment";

/// Splits RFC-4180 CSV text into records of fields. Quoted fields may contain
/// commas, doubled quotes and line breaks. `start_lines` receives the 1-based
/// line on which each record begins.
std::vector<std::vector<std::string>> read_csv_rows(std::istream& in,
                                                    std::vector<std::size_t>* start_lines = nullptr);

std::string csv_escape(const std::string& field);

/// Throws SchemaError naming every missing column; rows with unusable
/// mandatory fields become issues.
ParsedDataset parse_csv(std::istream& in);
ParsedDataset parse_csv(const std::filesystem::path& path);

/// Writes the dataset schema (leading index column included). Sentiment
/// columns are appended when `with_sentiment` is set.
void write_csv(std::ostream& out, std::span<const ReviewRecord> records, bool with_sentiment);
void write_csv(const std::filesystem::path& path, std::span<const ReviewRecord> records,
               bool with_sentiment);

/// `line <n> (row <r>): <message>` per issue.
void write_issues(std::ostream& out, std::span<const RowIssue> issues);

struct FilterResult {
  std::vector<ReviewRecord> records;
  std::size_t dropped = 0;
};

/// Drops records without review text.
FilterResult filter_for_classification(std::span<const ReviewRecord> records);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then contiguous slices: floor(0.6n) train, floor(0.2n)
/// validation, the remainder test. Requires n >= 5.
DatasetSplit split_60_20_20(std::size_t n, std::uint64_t seed);

}  // namespace reviewnet
