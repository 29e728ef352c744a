#include "reviewnet/train.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "reviewnet/analytics.hpp"
#include "reviewnet/hash.hpp"

namespace reviewnet {

namespace {

// Independent RNG streams derived from the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 1000;
constexpr std::uint64_t kDropoutStream = 2000;

}  // namespace

std::string_view to_string(Task task) {
  return task == Task::Recommendation ? "recommendation" : "sentiment";
}

std::optional<Task> parse_task(std::string_view s) {
  if (s == "recommendation") return Task::Recommendation;
  if (s == "sentiment") return Task::Sentiment;
  return std::nullopt;
}

int class_count(Task task) { return task == Task::Recommendation ? 2 : 3; }

std::vector<std::string> class_names(Task task) {
  if (task == Task::Recommendation) return {"not_recommended", "recommended"};
  return {"negative", "neutral", "positive"};
}

void TrainConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string("config: ") + name + " must be positive");
  };
  positive(batch_size, "batch_size");
  positive(cell_size, "cell_size");
  positive(seq_len, "seq_len");
  positive(vocab_max, "vocab_max");
  positive(min_freq, "min_freq");
  positive(embedding_dim, "embedding_dim");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw std::invalid_argument("config: dropout_rate must be in [0, 1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("config: clip_norm must be positive");
}

std::optional<int> task_label(const ReviewRecord& record, Task task) {
  if (task == Task::Recommendation) return record.recommended ? 1 : 0;
  if (!record.sentiment) return std::nullopt;
  return static_cast<int>(*record.sentiment);
}

std::uint64_t TextModel::config_fingerprint() const {
  std::ostringstream s;
  s << "task=" << to_string(task) << ";seq_len=" << seq_len << ";cell_size=" << network.cell_size()
    << ";embedding_dim=" << embeddings.dim() << ";classes=" << network.classes()
    << ";vocab=" << vocab.fingerprint();
  return fnv1a(s.str());
}

TextModel initial_model(const TrainConfig& config, Vocab vocab, EmbeddingMatrix embeddings) {
  config.validate();
  if (embeddings.vocab_size() != static_cast<Eigen::Index>(vocab.size()))
    throw DimensionError("embedding table has " + std::to_string(embeddings.vocab_size()) +
                         " rows for a vocabulary of " + std::to_string(vocab.size()));
  SeededRng rng = SeededRng(config.seed).fork(kInitStream);
  TextModel m;
  m.task = config.task;
  m.seq_len = config.seq_len;
  m.vocab = std::move(vocab);
  m.embeddings = std::move(embeddings);
  m.network = BiLstmClassifier<double>::random(m.embeddings.dim(),
                                               static_cast<Eigen::Index>(config.cell_size),
                                               class_count(config.task), rng);
  return m;
}

LabeledExample make_example(const ReviewRecord& record, const Vocab& vocab, std::size_t seq_len,
                            Task task) {
  const auto label = task_label(record, task);
  if (!label)
    throw std::invalid_argument("record " + std::to_string(record.row_id) +
                                " has no sentiment label");
  const auto tokens = record.review_text ? clean_tokens(*record.review_text) : TokenList{};
  return {encode_pad(tokens, vocab, seq_len), *label};
}

namespace {

std::vector<const EncodedReview*> encoded_ptrs(std::span<const LabeledExample> examples,
                                               std::span<const std::size_t> idx) {
  std::vector<const EncodedReview*> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(&examples[i].encoded);
  return out;
}

void check_model(const TextModel& model) {
  model.network.encoder.validate();
  if (model.network.input_size() != model.embeddings.dim())
    throw DimensionError("embedding width " + std::to_string(model.embeddings.dim()) +
                         " does not match network input size " +
                         std::to_string(model.network.input_size()));
  if (model.embeddings.vocab_size() != static_cast<Eigen::Index>(model.vocab.size()))
    throw DimensionError("embedding rows do not match the vocabulary");
}

// Mean loss and accuracy in inference mode.
std::pair<double, double> loss_and_accuracy(const TextModel& model,
                                            std::span<const LabeledExample> examples) {
  std::vector<const EncodedReview*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e.encoded);
  const Tensor probs = predict_proba(model, ptrs);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    Eigen::Index arg = 0;
    probs.col(c).maxCoeff(&arg);
    if (arg == examples[i].label) ++correct;
    loss -= std::log(std::max(probs(examples[i].label, c), kProbabilityFloor));
  }
  const double n = static_cast<double>(examples.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

TrainResult train(const TrainConfig& config, TextModel model,
                  std::span<const LabeledExample> train_set,
                  std::span<const LabeledExample> validation_set) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  check_model(model);
  if (model.network.classes() != class_count(config.task))
    throw DimensionError("train: network has " + std::to_string(model.network.classes()) +
                         " classes, task needs " + std::to_string(class_count(config.task)));
  for (const auto& e : train_set)
    if (e.encoded.ids.size() != model.seq_len)
      throw DimensionError("train: example length differs from the model's sequence length");

  TrainResult result;
  AdamState<double> adam;
  const SeededRng root(config.seed);
  SeededRng dropout_rng = root.fork(kDropoutStream);
  Tensor embedding_grad = Tensor::Zero(model.embeddings.table.rows(), model.embeddings.table.cols());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    SeededRng shuffle_rng = root.fork(kShuffleStream + epoch);
    const auto order = shuffled_indices(train_set.size(), shuffle_rng);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const auto inputs = encoded_ptrs(train_set, idx);
      std::vector<int> targets;
      for (auto i : idx) targets.push_back(train_set[i].label);

      const auto xs = embed_batch(inputs, model.embeddings);
      const auto pass = classifier_forward<double>(model.network, xs, config.dropout_rate,
                                                   &dropout_rng, true);
      const auto loss = cross_entropy<double>(pass.probs, targets);
      if (!std::isfinite(loss.loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss.loss * static_cast<double>(idx.size());
      auto grads = backward(model.network, pass, loss.logit_grad);

      // Scatter per-step input gradients onto embedding rows.
      embedding_grad.setZero();
      for (std::size_t t = 0; t < grads.inputs.size(); ++t)
        for (std::size_t b = 0; b < inputs.size(); ++b) {
          const int id = inputs[b]->ids[t];
          if (id != Vocab::kPad)
            embedding_grad.row(id) += grads.inputs[t].col(static_cast<Eigen::Index>(b)).transpose();
        }

      std::vector<Tensor*> params;
      std::vector<Tensor*> grad_blocks;
      for_each_block(model.network, [&](const std::string&, Tensor& t) { params.push_back(&t); });
      for_each_block(grads.params, [&](const std::string&, Tensor& t) { grad_blocks.push_back(&t); });
      if (model.embeddings.trainable) {
        params.push_back(&model.embeddings.table);
        grad_blocks.push_back(&embedding_grad);
      }
      clip_global_norm<double>(grad_blocks, config.clip_norm);
      const std::vector<const Tensor*> const_grads(grad_blocks.begin(), grad_blocks.end());
      adam_step<double>(params, const_grads, adam, config.learning_rate);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
    if (!validation_set.empty()) {
      const auto [vl, va] = loss_and_accuracy(model, validation_set);
      stats.val_loss = vl;
      stats.val_acc = va;
    }
    result.history.push_back(stats);
  }
  result.model = std::move(model);
  return result;
}

Tensor predict_proba(const TextModel& model, std::span<const EncodedReview* const> inputs,
                     std::size_t batch_size) {
  check_model(model);
  if (batch_size == 0) batch_size = 1;
  Tensor out(model.network.classes(), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
    const std::size_t stop = std::min(inputs.size(), start + batch_size);
    const auto xs = embed_batch(inputs.subspan(start, stop - start), model.embeddings);
    const auto pass = classifier_forward<double>(model.network, xs);
    out.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(stop - start)) =
        pass.probs;
  }
  return out;
}

MetricsReport evaluate(const TextModel& model, std::span<const LabeledExample> examples) {
  if (examples.empty()) throw std::invalid_argument("evaluate: empty split");
  std::vector<const EncodedReview*> ptrs;
  std::vector<int> truth;
  for (const auto& e : examples) {
    ptrs.push_back(&e.encoded);
    truth.push_back(e.label);
  }
  const Tensor probs = predict_proba(model, ptrs);
  std::vector<int> predicted;
  double loss = 0.0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    Eigen::Index arg = 0;
    probs.col(c).maxCoeff(&arg);
    predicted.push_back(static_cast<int>(arg));
    loss -= std::log(std::max(probs(truth[static_cast<std::size_t>(c)], c), kProbabilityFloor));
  }
  auto report = make_report(truth, predicted, class_names(model.task));
  report.mean_loss = loss / static_cast<double>(examples.size());
  if (model.task == Task::Recommendation) {
    const auto& cm = report.classes.per_class;
    if (cm[0].support > 0 && cm[1].support > 0) {
      std::vector<double> scores(probs.row(1).data(), probs.row(1).data() + probs.cols());
      report.roc = roc_auc(truth, scores);
    }
  }
  return report;
}

Prediction predict(const TextModel& model, std::string_view raw_text) {
  const auto tokens = clean_tokens(raw_text);
  const auto encoded = encode_pad(tokens, model.vocab, model.seq_len);
  const EncodedReview* one = &encoded;
  const Tensor probs = predict_proba(model, std::span<const EncodedReview* const>(&one, 1));
  Prediction p;
  p.empty_input = tokens.empty();
  Eigen::Index arg = 0;
  probs.col(0).maxCoeff(&arg);
  p.label = static_cast<int>(arg);
  p.label_name = class_names(model.task)[static_cast<std::size_t>(arg)];
  p.probabilities.assign(probs.data(), probs.data() + probs.size());
  return p;
}

void write_history_csv(std::ostream& out, std::span<const EpochStats> history) {
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << analytics::format_number(h.train_loss) << ','
        << (h.val_loss ? analytics::format_number(*h.val_loss) : "") << ','
        << (h.val_acc ? analytics::format_number(*h.val_acc) : "") << '\n';
  }
}

}  // namespace reviewnet
