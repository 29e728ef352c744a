#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace reviewnet {

/// Class indices used by the sentiment task: negative 0, neutral 1, positive 2.
enum class SentimentLabel { Negative = 0, Neutral = 1, Positive = 2 };

inline std::string_view to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::Negative: return "negative";
    case SentimentLabel::Neutral: return "neutral";
    case SentimentLabel::Positive: return "positive";
  }
  return "neutral";
}

inline std::optional<SentimentLabel> parse_sentiment_label(std::string_view s) {
  if (s == "negative") return SentimentLabel::Negative;
  if (s == "neutral") return SentimentLabel::Neutral;
  if (s == "positive") return SentimentLabel::Positive;
  return std::nullopt;
}

}  // namespace reviewnet
