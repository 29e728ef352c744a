#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reviewnet/dataset.hpp"
#include "reviewnet/metrics.hpp"
#include "reviewnet/nn.hpp"
#include "reviewnet/text.hpp"

namespace reviewnet {

enum class Task { Recommendation, Sentiment };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view s);
int class_count(Task task);
std::vector<std::string> class_names(Task task);

/// Model and optimization settings. Defaults for the first five fields are the
/// published hyper-parameters; the rest fill in what the model still needs.
struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t cell_size = 256;
  double dropout_rate = 0.50;
  std::size_t epochs = 32;
  double learning_rate = 1e-3;

  std::size_t seq_len = 120;
  std::size_t vocab_max = 20000;
  std::size_t min_freq = 2;
  std::size_t embedding_dim = 50;  // used when no pretrained vectors are given
  double clip_norm = 5.0;
  std::uint64_t seed = 42;
  Task task = Task::Recommendation;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LabeledExample {
  EncodedReview encoded;
  int label = 0;
};

/// Label for a record under `task`; nullopt when a sentiment label is absent.
std::optional<int> task_label(const ReviewRecord& record, Task task);

/// Everything needed to go from raw text to class probabilities.
struct TextModel {
  Task task = Task::Recommendation;
  std::size_t seq_len = 0;
  Vocab vocab;
  EmbeddingMatrix embeddings;
  BiLstmClassifier<double> network;

  /// Hash of the shape-defining settings and the vocabulary.
  std::uint64_t config_fingerprint() const;
};

/// Fresh network weights drawn from the config seed.
TextModel initial_model(const TrainConfig& config, Vocab vocab, EmbeddingMatrix embeddings);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_acc;
};

struct TrainResult {
  TextModel model;
  std::vector<EpochStats> history;
};

/// Mini-batch Adam with per-epoch seeded shuffling, dropout on the encoder
/// output, global-norm gradient clipping and a frozen PAD embedding row.
/// Returns the final-epoch model. Throws if the train split is empty, the
/// embedding width disagrees with the network, or a loss turns non-finite.
TrainResult train(const TrainConfig& config, TextModel model,
                  std::span<const LabeledExample> train_set,
                  std::span<const LabeledExample> validation_set);

/// Class probabilities, one column per example, inference mode.
Tensor predict_proba(const TextModel& model, std::span<const EncodedReview* const> inputs,
                     std::size_t batch_size = 256);

/// Argmax report with mean loss; recommendation reports also carry the ROC of
/// the "recommended" probability when both classes are present.
MetricsReport evaluate(const TextModel& model, std::span<const LabeledExample> examples);

struct Prediction {
  int label = 0;
  std::string label_name;
  std::vector<double> probabilities;
  bool empty_input = false;
};

Prediction predict(const TextModel& model, std::string_view raw_text);

/// Encodes cleaned/tokenized review text for the model.
LabeledExample make_example(const ReviewRecord& record, const Vocab& vocab, std::size_t seq_len,
                            Task task);

void write_history_csv(std::ostream& out, std::span<const EpochStats> history);

}  // namespace reviewnet
