#include "reviewnet/commands.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "reviewnet/analytics.hpp"
#include "reviewnet/checkpoint.hpp"
#include "reviewnet/sentiment.hpp"

namespace reviewnet {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Embedding initialization gets its own stream so it does not shift the
// network's initial weights.
constexpr std::uint64_t kEmbeddingStream = 3;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = open_out(path);
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

fs::path start_run(const RunConfig& config, const std::string& command) {
  const fs::path dir = next_run_dir(config.out, command);
  write_file(dir / "config.txt", [&](std::ostream& o) { write_config(o, config); });
  return dir;
}

ParsedDataset load_dataset(const RunConfig& config) {
  if (config.data.empty()) throw UsageError("no dataset given (--data)");
  if (!fs::is_regular_file(config.data)) throw IoError("dataset not found: " + config.data);
  return parse_csv(fs::path(config.data));
}

Lexicon load_lexicon(const RunConfig& config) {
  return config.lexicon.empty() ? Lexicon::builtin() : Lexicon::load(fs::path(config.lexicon));
}

// Scores records that do not already carry a sentiment label.
void fill_sentiment(std::vector<ReviewRecord>& records, const RunConfig& config) {
  bool missing = false;
  for (const auto& r : records) missing = missing || !r.sentiment;
  if (!missing) return;
  const Lexicon lexicon = load_lexicon(config);
  for (auto& r : records) {
    if (r.sentiment) continue;
    const auto tokens = r.review_text ? clean_tokens(*r.review_text) : TokenList{};
    const auto s = score_text(tokens, lexicon);
    r.sentiment_compound = s.compound;
    r.sentiment = s.label;
  }
}

struct PreparedData {
  std::vector<ReviewRecord> records;
  std::size_t parsed = 0;
  std::size_t dropped = 0;
  std::size_t issues = 0;
  DatasetSplit split;
};

PreparedData prepare(const RunConfig& config, Task task, std::uint64_t split_seed) {
  ParsedDataset parsed = load_dataset(config);
  PreparedData p;
  p.parsed = parsed.records.size();
  p.issues = parsed.issues.size();
  auto filtered = filter_for_classification(parsed.records);
  p.records = std::move(filtered.records);
  p.dropped = filtered.dropped;
  if (task == Task::Sentiment) fill_sentiment(p.records, config);
  if (p.records.size() < 5)
    throw UsageError("need at least 5 reviews with text to split, found " +
                     std::to_string(p.records.size()));
  p.split = split_60_20_20(p.records.size(), split_seed);
  return p;
}

std::vector<LabeledExample> examples_for(const PreparedData& data,
                                         const std::vector<std::size_t>& idx, const Vocab& vocab,
                                         std::size_t seq_len, Task task) {
  std::vector<LabeledExample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(make_example(data.records[i], vocab, seq_len, task));
  return out;
}

std::vector<int> labels_of(std::span<const LabeledExample> xs) {
  std::vector<int> out;
  for (const auto& x : xs) out.push_back(x.label);
  return out;
}

std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out += static_cast<char>(std::tolower(u));
    else if (out.empty() || out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

CommandOutput cmd_analyze(const RunConfig& config) {
  namespace an = analytics;
  const ParsedDataset parsed = load_dataset(config);
  const fs::path dir = start_run(config, "analyze");
  const auto& recs = parsed.records;
  fs::create_directories(dir / "analytics");
  ordered_json tables = ordered_json::object();
  ordered_json skipped = ordered_json::object();

  // Writes one CSV table and mirrors it into the JSON report.
  auto emit = [&](const std::string& name, auto&& fn) {
    std::ostringstream csv;
    fn(csv);
    write_file(dir / "analytics" / (name + ".csv"), [&](std::ostream& o) { o << csv.str(); });
    std::istringstream in(csv.str());
    auto rows = read_csv_rows(in);
    ordered_json t;
    t["header"] = rows.empty() ? std::vector<std::string>{} : rows.front();
    t["rows"] = rows.empty() ? decltype(rows){} : decltype(rows)(rows.begin() + 1, rows.end());
    tables[name] = t;
  };

  emit("unique_counts", [&](std::ostream& o) {
    an::write_ranking_csv(o, an::unique_counts(recs), "feature", "unique");
  });

  if (recs.empty()) {
    skipped["describe"] = "no records";
  } else {
    std::vector<an::DescriptiveStats> stats;
    for (const char* f : an::kNumericFeatures) stats.push_back(an::describe(recs, f));
    emit("describe", [&](std::ostream& o) { an::write_describe_csv(o, stats); });
  }

  for (const char* f : {"Rating", "Recommended IND", "Division Name", "Department Name",
                        "Class Name", "Age", "Clothing ID"})
    emit("freq_dist__" + slug(f), [&](std::ostream& o) {
      an::write_ranking_csv(o, an::freq_dist(recs, f), f, "count");
    });

  const std::pair<const char*, const char*> tabs[] = {{"Rating", "Recommended IND"},
                                                      {"Division Name", "Department Name"},
                                                      {"Department Name", "Class Name"},
                                                      {"Department Name", "Rating"},
                                                      {"Division Name", "Rating"},
                                                      {"Class Name", "Recommended IND"},
                                                      {"Department Name", "Recommended IND"}};
  for (const auto& [a, b] : tabs)
    for (bool normalize : {false, true})
      emit("crosstab__" + slug(a) + "__" + slug(b) + (normalize ? "__normalized" : ""),
           [&](std::ostream& o) { an::write_crosstab_csv(o, an::crosstab(recs, a, b, normalize)); });

  try {
    const auto m = an::grouped_rating_corr(recs);
    emit("grouped_rating_corr", [&](std::ostream& o) { an::write_correlation_csv(o, m); });
  } catch (const std::invalid_argument& e) {
    skipped["grouped_rating_corr"] = e.what();
  }

  std::vector<std::string> segments = {"title", "reviews", "rating_high", "rating_low"};
  for (const auto& [division, n] : an::freq_dist(recs, "Division Name"))
    segments.push_back("division=" + division);
  for (const auto& seg : segments)
    emit("word_freq_by_segment__" + slug(seg), [&](std::ostream& o) {
      an::write_ranking_csv(o, an::word_freq_by_segment(recs, seg, 50), "word", "count");
    });

  emit("age_bin_positive_feedback__10", [&](std::ostream& o) {
    an::write_age_bins_csv(o, an::age_bin_positive_feedback(recs, 10));
  });

  if (parsed.has_sentiment_columns)
    emit("sentiment_by_recommendation", [&](std::ostream& o) {
      write_sentiment_counts(o, count_sentiment_by_recommendation(recs));
    });

  write_file(dir / "issues.txt", [&](std::ostream& o) { write_issues(o, parsed.issues); });

  ordered_json report;
  report["rows"] = recs.size();
  report["issues"] = parsed.issues.size();
  report["skipped"] = skipped;
  report["tables"] = tables;
  write_json(dir / "report.json", report);
  return {dir, "wrote " + std::to_string(tables.size()) + " tables to " + dir.string()};
}

CommandOutput cmd_label(const RunConfig& config) {
  ParsedDataset parsed = load_dataset(config);
  const Lexicon lexicon = load_lexicon(config);
  const fs::path dir = start_run(config, "label");
  const SentimentCounts counts = auto_label_dataset(parsed.records, lexicon);
  write_csv(dir / "labeled.csv", parsed.records, true);
  write_file(dir / "sentiment_by_recommendation.csv",
             [&](std::ostream& o) { write_sentiment_counts(o, counts); });
  write_file(dir / "issues.txt", [&](std::ostream& o) { write_issues(o, parsed.issues); });
  return {dir, "labeled " + std::to_string(parsed.records.size()) + " rows into " +
                   (dir / "labeled.csv").string()};
}

CommandOutput cmd_train(const RunConfig& config) {
  const TrainConfig& tc = config.train;
  const PreparedData data = prepare(config, tc.task, tc.seed);

  std::vector<TokenList> corpus;
  for (auto i : data.split.train)
    corpus.push_back(clean_tokens(data.records[i].review_text.value_or("")));
  Vocab vocab = build_vocab(corpus, tc.min_freq, tc.vocab_max);

  SeededRng emb_rng = SeededRng(tc.seed).fork(kEmbeddingStream);
  EmbeddingMatrix emb;
  if (config.embeddings.empty()) {
    emb = random_embeddings(vocab, static_cast<Eigen::Index>(tc.embedding_dim), emb_rng);
  } else {
    emb = load_glove(config.embeddings, vocab, emb_rng);
    if (emb.dim() != static_cast<Eigen::Index>(tc.embedding_dim))
      throw UsageError("embedding file has dimension " + std::to_string(emb.dim()) +
                       " but embedding_dim is " + std::to_string(tc.embedding_dim));
  }

  const auto train_set = examples_for(data, data.split.train, vocab, tc.seq_len, tc.task);
  const auto val_set = examples_for(data, data.split.validation, vocab, tc.seq_len, tc.task);

  const fs::path dir = start_run(config, "train");
  TrainResult result = train(tc, initial_model(tc, std::move(vocab), std::move(emb)), train_set,
                             val_set);

  save_model_dir(dir, Checkpoint{result.model, tc.seed});
  write_file(dir / "history.csv",
             [&](std::ostream& o) { write_history_csv(o, result.history); });
  write_file(dir / "split.csv", [&](std::ostream& o) {
    o << "row_id,split\n";
    const std::pair<const char*, const std::vector<std::size_t>*> parts[] = {
        {"train", &data.split.train}, {"validation", &data.split.validation},
        {"test", &data.split.test}};
    for (const auto& [name, idx] : parts)
      for (auto i : *idx) o << data.records[i].row_id << ',' << name << '\n';
  });

  const auto train_report = evaluate(result.model, train_set);
  ordered_json s;
  s["task"] = std::string(to_string(tc.task));
  s["parsed_rows"] = data.parsed;
  s["rejected_rows"] = data.issues;
  s["dropped_without_text"] = data.dropped;
  s["train"] = data.split.train.size();
  s["validation"] = data.split.validation.size();
  s["test"] = data.split.test.size();
  s["vocab_size"] = result.model.vocab.size();
  s["embedding_dim"] = result.model.embeddings.dim();
  s["epochs"] = result.history.size();
  s["final_train_loss"] =
      result.history.empty() ? ordered_json(nullptr) : ordered_json(result.history.back().train_loss);
  s["train_accuracy"] = train_report.accuracy;
  write_json(dir / "summary.json", s);

  std::ostringstream msg;
  msg << "trained " << tc.epochs << " epochs on " << train_set.size() << " reviews; train accuracy "
      << analytics::format_number(train_report.accuracy) << "; model in " << dir.string();
  return {dir, msg.str()};
}

namespace {

fs::path model_dir(const RunConfig& config) {
  if (!config.model.empty()) return config.model;
  const auto latest = latest_run_dir(config.out, "train");
  if (!latest) throw IoError("no trained model under " + config.out + " (run train or pass --model)");
  return *latest;
}

}  // namespace

CommandOutput cmd_evaluate(const RunConfig& config) {
  const Checkpoint ck = load_model_dir(model_dir(config));
  const TextModel& model = ck.model;
  RunConfig resolved = config;
  resolved.train.task = model.task;
  resolved.train.seed = ck.split_seed;

  const PreparedData data = prepare(resolved, model.task, ck.split_seed);
  const auto train_set = examples_for(data, data.split.train, model.vocab, model.seq_len, model.task);
  const auto test_set = examples_for(data, data.split.test, model.vocab, model.seq_len, model.task);

  const fs::path dir = start_run(resolved, "evaluate");
  const MetricsReport report = evaluate(model, test_set);
  const MetricsReport baseline =
      majority_baseline(labels_of(train_set), labels_of(test_set), class_names(model.task));

  ordered_json j = to_json(report);
  j["task"] = std::string(to_string(model.task));
  j["split"] = "test";
  write_json(dir / "metrics.json", j);
  ordered_json b = to_json(baseline);
  b["task"] = std::string(to_string(model.task));
  b["split"] = "test";
  write_json(dir / "baseline.json", b);
  write_file(dir / "confusion.csv", [&](std::ostream& o) { write_confusion_csv(o, report); });
  if (report.roc) write_file(dir / "roc.csv", [&](std::ostream& o) { write_roc_csv(o, *report.roc); });

  std::ostringstream msg;
  msg << "test accuracy " << analytics::format_number(report.accuracy) << " (baseline "
      << analytics::format_number(baseline.accuracy) << ") on " << report.total
      << " reviews; report in " << dir.string();
  return {dir, msg.str()};
}

CommandOutput cmd_predict(const RunConfig& config) {
  const Checkpoint ck = load_model_dir(model_dir(config));
  RunConfig resolved = config;
  resolved.train.task = ck.model.task;
  const Prediction p = predict(ck.model, config.text);

  ordered_json j;
  j["task"] = std::string(to_string(ck.model.task));
  j["label"] = p.label_name;
  j["label_index"] = p.label;
  ordered_json probs = ordered_json::object();
  const auto names = class_names(ck.model.task);
  for (std::size_t c = 0; c < names.size(); ++c) probs[names[c]] = p.probabilities[c];
  j["probabilities"] = probs;
  j["empty_input"] = p.empty_input;

  const fs::path dir = start_run(resolved, "predict");
  const std::string line = j.dump();
  write_file(dir / "prediction.json", [&](std::ostream& o) { o << line << '\n'; });
  return {dir, line};
}

}  // namespace reviewnet
