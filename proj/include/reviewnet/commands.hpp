#pragma once

#include <filesystem>
#include <string>

#include "reviewnet/run_config.hpp"

namespace reviewnet {

/// Each command creates a fresh run directory under `config.out`, writes the
/// resolved config there as `config.txt`, and returns what it would print.
struct CommandOutput {
  std::filesystem::path run_dir;
  std::string message;
};

/// Every analytics table as CSV plus `report.json`.
CommandOutput cmd_analyze(const RunConfig& config);

/// `labeled.csv` (input rows with sentiment columns) and
/// `sentiment_by_recommendation.csv`.
CommandOutput cmd_label(const RunConfig& config);

/// Filter, split, vocabulary, training. Writes the checkpoint, `vocab.tsv`,
/// `history.csv`, `split.csv` and `summary.json`.
CommandOutput cmd_train(const RunConfig& config);

/// Test-split report of a trained model: `metrics.json`, `baseline.json`,
/// `confusion.csv` and, for the recommendation task, `roc.csv`. The task and
/// split seed come from the checkpoint.
CommandOutput cmd_evaluate(const RunConfig& config);

/// Single-line JSON prediction for `config.text`, also saved as
/// `prediction.json`.
CommandOutput cmd_predict(const RunConfig& config);

}  // namespace reviewnet
