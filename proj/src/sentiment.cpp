#include "reviewnet/sentiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "reviewnet/text.hpp"

namespace reviewnet {

namespace {

constexpr double kBoost = 0.293;

}  // namespace

void Lexicon::validate() const {
  for (const auto& [tok, v] : valence)
    if (!(v >= -4.0 && v <= 4.0))
      throw std::invalid_argument("lexicon valence for '" + tok + "' outside [-4, 4]");
  for (const auto& n : negators)
    if (boosters.count(n)) throw std::invalid_argument("'" + n + "' is both negator and booster");
}

Lexicon Lexicon::builtin() {
  Lexicon lx;
  lx.valence = {
      {"amazing", 2.8},      {"awful", -2.0},      {"bad", -2.5},         {"beautiful", 2.9},
      {"best", 3.2},         {"boring", -1.3},     {"comfortable", 1.5},  {"comfy", 1.5},
      {"cute", 2.0},         {"disappointed", -1.9}, {"disappointing", -2.2}, {"excellent", 2.7},
      {"fantastic", 2.6},    {"favorite", 2.0},    {"fine", 0.8},         {"flattering", 1.9},
      {"good", 1.9},         {"gorgeous", 3.0},    {"great", 3.1},        {"happy", 2.7},
      {"hate", -2.7},        {"horrible", -2.5},   {"itchy", -1.0},       {"love", 3.2},
      {"loved", 2.9},        {"lovely", 2.8},      {"nice", 1.8},         {"ok", 0.9},
      {"okay", 0.9},         {"perfect", 2.7},     {"poor", -2.1},        {"pretty", 2.2},
      {"problem", -1.7},     {"recommend", 1.5},   {"sad", -2.1},         {"scratchy", -1.0},
      {"terrible", -2.1},    {"ugly", -2.3},       {"uncomfortable", -1.6}, {"unfortunately", -1.5},
      {"wonderful", 2.7},    {"worst", -3.1},      {"wrong", -2.1},
  };
  lx.negators = {"aren't", "can't", "cannot", "couldn't", "didn't", "doesn't", "don't",
                 "hadn't", "hasn't", "haven't", "isn't",  "neither", "never",   "no",
                 "nobody", "none",   "nor",    "not",    "nothing", "nowhere", "shouldn't",
                 "wasn't", "weren't", "without", "won't", "wouldn't"};
  lx.boosters = {{"absolutely", kBoost}, {"completely", kBoost}, {"extremely", kBoost},
                 {"incredibly", kBoost}, {"really", kBoost},     {"so", kBoost},
                 {"super", kBoost},      {"totally", kBoost},    {"very", kBoost},
                 {"barely", -kBoost},    {"marginally", -kBoost}, {"slightly", -kBoost},
                 {"somewhat", -kBoost}};
  lx.validate();
  return lx;
}

Lexicon Lexicon::load(std::istream& in) {
  Lexicon lx = builtin();
  lx.valence.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ParseError("lexicon line must be token<TAB>valence", lineno);
    const std::string token = line.substr(0, tab);
    const auto end = line.find('\t', tab + 1);
    const std::string field = line.substr(tab + 1, end == std::string::npos ? end : end - tab - 1);
    double v = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
      throw ParseError("lexicon valence '" + field + "' is not a number", lineno);
    if (!(v >= -4.0 && v <= 4.0))
      throw ParseError("lexicon valence " + field + " outside [-4, 4]", lineno);
    lx.valence[token] = v;
  }
  if (in.bad()) throw IoError("failed reading lexicon");
  return lx;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read lexicon " + path.string());
  return load(in);
}

SentimentLabel label_from_compound(double compound, double threshold) {
  if (compound >= threshold) return SentimentLabel::Positive;
  if (compound <= -threshold) return SentimentLabel::Negative;
  return SentimentLabel::Neutral;
}

double normalize_valence_sum(double s, double alpha) { return s / std::sqrt(s * s + alpha); }

SentimentScore score_text(std::span<const std::string> tokens, const Lexicon& lexicon,
                          const ScorerConfig& config) {
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto hit = lexicon.valence.find(tokens[i]);
    if (hit == lexicon.valence.end()) continue;
    double v = hit->second;
    if (i > 0) {
      if (auto b = lexicon.boosters.find(tokens[i - 1]); b != lexicon.boosters.end() && v != 0.0)
        v += v > 0 ? b->second : -b->second;
    }
    const std::size_t from = i >= config.negation_window ? i - config.negation_window : 0;
    for (std::size_t j = from; j < i; ++j) {
      if (lexicon.negators.count(tokens[j])) {
        v *= config.negation_factor;
        break;
      }
    }
    sum += v;
  }
  SentimentScore s;
  s.compound = normalize_valence_sum(sum, config.normalization_alpha);
  s.label = label_from_compound(s.compound, config.threshold);
  return s;
}

SentimentLabel label_by_rating(int rating, int threshold, bool inclusive) {
  const bool positive = inclusive ? rating >= threshold : rating > threshold;
  return positive ? SentimentLabel::Positive : SentimentLabel::Negative;
}

std::size_t SentimentCounts::total() const {
  std::size_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

SentimentCounts auto_label_dataset(std::vector<ReviewRecord>& records, const Lexicon& lexicon,
                                   const ScorerConfig& config) {
  for (auto& r : records) {
    const auto tokens = r.review_text ? clean_tokens(*r.review_text) : TokenList{};
    const auto score = score_text(tokens, lexicon, config);
    r.sentiment_compound = score.compound;
    r.sentiment = score.label;
  }
  return count_sentiment_by_recommendation(records);
}

SentimentCounts count_sentiment_by_recommendation(std::span<const ReviewRecord> records) {
  SentimentCounts out;
  for (const auto& r : records)
    if (r.sentiment) ++out.counts[r.recommended ? 1 : 0][static_cast<int>(*r.sentiment)];
  return out;
}

void write_sentiment_counts(std::ostream& out, const SentimentCounts& counts) {
  out << "recommended,negative,neutral,positive\n";
  for (int rec = 0; rec < 2; ++rec)
    out << rec << ',' << counts.counts[rec][0] << ',' << counts.counts[rec][1] << ','
        << counts.counts[rec][2] << '\n';
}

}  // namespace reviewnet
