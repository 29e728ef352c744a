#include "reviewnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "reviewnet/rng.hpp"

namespace reviewnet {

std::vector<std::vector<std::string>> read_csv_rows(std::istream& in,
                                                    std::vector<std::size_t>* start_lines) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes a trailing empty field from no field
  std::size_t line = 1;
  std::size_t row_start = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // A blank line is not a record.
    if (!(row.size() == 1 && row[0].empty())) {
      rows.push_back(std::move(row));
      if (start_lines) start_lines->push_back(row_start);
    }
    row.clear();
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        row_start = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  if (in_quotes) throw ParseError("unterminated quoted field", row_start);
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
std::optional<Int> parse_int(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> optional_text(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

ParsedDataset parse_csv(std::istream& in) {
  std::vector<std::size_t> lines;
  auto rows = read_csv_rows(in, &lines);
  if (rows.empty()) throw SchemaError("dataset is empty: no header row");

  ParsedDataset out;
  const auto& header = rows.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = trim(header[i]);
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
    if (i == 0 && name.empty()) {
      out.has_index_column = true;
      continue;
    }
    col.emplace(name, i);
  }
  std::vector<std::string> missing;
  for (const char* name : kCsvColumns)
    if (!col.count(name)) missing.emplace_back(name);
  if (!missing.empty()) {
    std::string msg = "dataset header is missing columns:";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : " ") + missing[i];
    throw SchemaError(msg);
  }
  out.has_sentiment_columns = col.count(kSentimentColumn) && col.count(kCompoundColumn);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    const std::size_t row_no = r - 1;
    auto issue = [&](std::string msg) { out.issues.push_back({lines[r], row_no, std::move(msg)}); };
    if (f.size() != header.size()) {
      issue("expected " + std::to_string(header.size()) + " fields, found " +
            std::to_string(f.size()));
      continue;
    }
    auto get = [&](const char* name) -> const std::string& { return f[col.at(name)]; };

    ReviewRecord rec;
    rec.row_id = row_no;
    if (out.has_index_column) {
      auto idx = parse_int<std::size_t>(f[0]);
      if (!idx) {
        issue("unparseable row index '" + f[0] + "'");
        continue;
      }
      rec.row_id = *idx;
    }

    std::vector<std::string> problems;
    if (auto v = parse_int<long>(get("Clothing ID")); v && *v >= 0) rec.clothing_id = *v;
    else problems.push_back("invalid Clothing ID '" + get("Clothing ID") + "'");
    if (auto v = parse_int<int>(get("Age")); v && *v >= 0) rec.age = *v;
    else problems.push_back("invalid Age '" + get("Age") + "'");
    if (auto v = parse_int<int>(get("Rating")); !v) {
      problems.push_back("invalid Rating '" + get("Rating") + "'");
    } else if (*v < 1 || *v > 5) {
      problems.push_back("rating out of range");
    } else {
      rec.rating = *v;
    }
    if (auto v = parse_int<int>(get("Recommended IND")); v && (*v == 0 || *v == 1))
      rec.recommended = *v == 1;
    else
      problems.push_back("invalid Recommended IND '" + get("Recommended IND") + "'");
    if (auto v = parse_int<long>(get("Positive Feedback Count")); v && *v >= 0)
      rec.positive_feedback_count = *v;
    else
      problems.push_back("invalid Positive Feedback Count '" + get("Positive Feedback Count") + "'");

    rec.title = optional_text(get("Title"));
    rec.review_text = optional_text(get("Review Text"));
    rec.division = optional_text(get("Division Name"));
    rec.department = optional_text(get("Department Name"));
    rec.class_name = optional_text(get("Class Name"));

    if (out.has_sentiment_columns) {
      const auto& c = get(kCompoundColumn);
      const auto& l = get(kSentimentColumn);
      if (!c.empty() || !l.empty()) {
        auto compound = parse_double(c);
        auto label = parse_sentiment_label(trim(l));
        if (!compound || !label) problems.push_back("invalid sentiment columns");
        rec.sentiment_compound = compound;
        rec.sentiment = label;
      }
    }

    if (!problems.empty()) {
      std::string msg;
      for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
      issue(msg);
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

ParsedDataset parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, std::span<const ReviewRecord> records, bool with_sentiment) {
  for (const char* name : kCsvColumns) out << ',' << csv_escape(name);
  if (with_sentiment) out << ',' << kCompoundColumn << ',' << kSentimentColumn;
  out << '\n';
  auto opt = [](const std::optional<std::string>& s) { return s ? csv_escape(*s) : std::string(); };
  for (const auto& r : records) {
    out << r.row_id << ',' << r.clothing_id << ',' << r.age << ',' << opt(r.title) << ','
        << opt(r.review_text) << ',' << r.rating << ',' << (r.recommended ? 1 : 0) << ','
        << r.positive_feedback_count << ',' << opt(r.division) << ',' << opt(r.department) << ','
        << opt(r.class_name);
    if (with_sentiment) {
      out << ',' << (r.sentiment_compound ? format_double(*r.sentiment_compound) : "") << ','
          << (r.sentiment ? std::string(to_string(*r.sentiment)) : "");
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, std::span<const ReviewRecord> records,
               bool with_sentiment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out, records, with_sentiment);
  if (!out) throw IoError("failed writing " + path.string());
}

void write_issues(std::ostream& out, std::span<const RowIssue> issues) {
  for (const auto& i : issues) out << "line " << i.line << " (row " << i.row << "): " << i.message << '\n';
}

FilterResult filter_for_classification(std::span<const ReviewRecord> records) {
  FilterResult out;
  for (const auto& r : records) {
    if (r.review_text) out.records.push_back(r);
    else ++out.dropped;
  }
  return out;
}

DatasetSplit split_60_20_20(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw std::invalid_argument("split_60_20_20: need at least 5 records, got " +
                                         std::to_string(n));
  SeededRng rng(seed);
  const auto order = shuffled_indices(n, rng);
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  DatasetSplit s;
  s.seed = seed;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

}  // namespace reviewnet
