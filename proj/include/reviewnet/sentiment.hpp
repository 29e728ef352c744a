#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reviewnet/dataset.hpp"
#include "reviewnet/sentiment_label.hpp"

namespace reviewnet {

/// Valence lexicon plus the negation and intensifier word lists used by the
/// compound scorer. Valences lie in [-4, 4].
struct Lexicon {
  std::map<std::string, double, std::less<>> valence;
  std::set<std::string, std::less<>> negators;
  std::map<std::string, double, std::less<>> boosters;  // signed increment

  /// Throws std::invalid_argument if a valence is out of range or a word is
  /// both a negator and a booster.
  void validate() const;

  /// ~40 review-domain entries, enough for tests and demos without downloads.
  static Lexicon builtin();

  /// Two-column `token<TAB>valence` file; extra tab-separated columns are
  /// ignored and `#` starts a comment line. Negators and boosters come from
  /// the built-in lists.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon load(std::istream& in);
};

/// Reproduction constants for the compound scorer.
struct ScorerConfig {
  double normalization_alpha = 15.0;
  double negation_factor = -0.74;
  std::size_t negation_window = 3;
  double threshold = 0.05;
};

struct SentimentScore {
  double compound = 0.0;  // in (-1, 1)
  SentimentLabel label = SentimentLabel::Neutral;
};

/// positive iff c >= threshold, negative iff c <= -threshold, else neutral.
SentimentLabel label_from_compound(double compound, double threshold = 0.05);

/// s / sqrt(s^2 + alpha).
double normalize_valence_sum(double s, double alpha = 15.0);

/// For each lexicon hit: boost by the preceding intensifier (away from zero
/// for positive increments), flip by the negation factor if a negator occurs
/// within the preceding window, then sum and normalize.
SentimentScore score_text(std::span<const std::string> tokens, const Lexicon& lexicon,
                          const ScorerConfig& config = {});

/// The rating-threshold labelling: positive when rating >= threshold
/// (inclusive) or rating > threshold (exclusive), negative otherwise. It
/// never yields neutral.
SentimentLabel label_by_rating(int rating, int threshold = 3, bool inclusive = true);

/// counts[recommended][label]
struct SentimentCounts {
  std::array<std::array<std::size_t, 3>, 2> counts{};
  std::size_t total() const;
};

/// Scores every record's review text (absent text scores as empty) and
/// stores the compound and label on the record.
SentimentCounts auto_label_dataset(std::vector<ReviewRecord>& records, const Lexicon& lexicon,
                                   const ScorerConfig& config = {});

SentimentCounts count_sentiment_by_recommendation(std::span<const ReviewRecord> records);

/// `recommended,negative,neutral,positive` with one row per recommendation state.
void write_sentiment_counts(std::ostream& out, const SentimentCounts& counts);

}  // namespace reviewnet
