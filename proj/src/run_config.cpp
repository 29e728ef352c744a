#include "reviewnet/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "reviewnet/analytics.hpp"

namespace reviewnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size() || value.empty())
    throw UsageError("config: bad value '" + value + "' for " + key);
  return v;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "data",          "out",        "task",          "seed",          "lexicon",
      "embeddings",    "model",      "text",          "batch_size",    "cell_size",
      "dropout_rate",  "epochs",     "learning_rate", "seq_len",       "vocab_max",
      "min_freq",      "embedding_dim", "clip_norm"};
  return keys;
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("config line lacks '='", lineno);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
      throw ParseError("unknown config key '" + key + "'", lineno);
    if (!kv.emplace(key, value).second) throw ParseError("repeated config key '" + key + "'", lineno);
  }
  return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  return parse_key_values(in);
}

void apply_overrides(RunConfig& c, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    TrainConfig& t = c.train;
    if (key == "data") c.data = value;
    else if (key == "out") c.out = value;
    else if (key == "lexicon") c.lexicon = value;
    else if (key == "embeddings") c.embeddings = value;
    else if (key == "model") c.model = value;
    else if (key == "text") c.text = value;
    else if (key == "task") {
      const auto task = parse_task(value);
      if (!task) throw UsageError("config: task must be recommendation or sentiment, got '" + value + "'");
      t.task = *task;
    } else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "batch_size") t.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "cell_size") t.cell_size = parse_number<std::size_t>(key, value);
    else if (key == "dropout_rate") t.dropout_rate = parse_number<double>(key, value);
    else if (key == "epochs") t.epochs = parse_number<std::size_t>(key, value);
    else if (key == "learning_rate") t.learning_rate = parse_number<double>(key, value);
    else if (key == "seq_len") t.seq_len = parse_number<std::size_t>(key, value);
    else if (key == "vocab_max") t.vocab_max = parse_number<std::size_t>(key, value);
    else if (key == "min_freq") t.min_freq = parse_number<std::size_t>(key, value);
    else if (key == "embedding_dim") t.embedding_dim = parse_number<std::size_t>(key, value);
    else if (key == "clip_norm") t.clip_norm = parse_number<double>(key, value);
    else throw UsageError("config: unknown key '" + key + "'");
  }
  try {
    c.train.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

KeyValues to_key_values(const RunConfig& c) {
  using analytics::format_number;
  const TrainConfig& t = c.train;
  return {{"data", c.data},
          {"out", c.out},
          {"task", std::string(to_string(t.task))},
          {"seed", std::to_string(t.seed)},
          {"lexicon", c.lexicon},
          {"embeddings", c.embeddings},
          {"model", c.model},
          {"text", c.text},
          {"batch_size", std::to_string(t.batch_size)},
          {"cell_size", std::to_string(t.cell_size)},
          {"dropout_rate", format_number(t.dropout_rate)},
          {"epochs", std::to_string(t.epochs)},
          {"learning_rate", format_number(t.learning_rate)},
          {"seq_len", std::to_string(t.seq_len)},
          {"vocab_max", std::to_string(t.vocab_max)},
          {"min_freq", std::to_string(t.min_freq)},
          {"embedding_dim", std::to_string(t.embedding_dim)},
          {"clip_norm", format_number(t.clip_norm)}};
}

void write_config(std::ostream& out, const RunConfig& c) {
  const auto kv = to_key_values(c);
  for (const auto& key : config_keys()) {
    const std::string& v = kv.at(key);
    if (v.find_first_of("\r\n") != std::string::npos)
      throw UsageError("config: value for " + key + " spans lines");
    out << key << " = " << v << '\n';
  }
}

namespace {

std::optional<std::size_t> run_suffix(const std::string& name, const std::string& command) {
  if (name == command) return 0;
  if (name.size() <= command.size() + 1 || name.compare(0, command.size(), command) != 0 ||
      name[command.size()] != '.')
    return std::nullopt;
  const std::string digits = name.substr(command.size() + 1);
  std::size_t n = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc() || p != digits.data() + digits.size() || n == 0) return std::nullopt;
  return n;
}

}  // namespace

std::filesystem::path next_run_dir(const std::filesystem::path& out, const std::string& command) {
  std::filesystem::create_directories(out);
  for (std::size_t n = 0;; ++n) {
    const auto dir = out / (n == 0 ? command : command + "." + std::to_string(n));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

std::optional<std::filesystem::path> latest_run_dir(const std::filesystem::path& out,
                                                    const std::string& command) {
  if (!std::filesystem::is_directory(out)) return std::nullopt;
  std::optional<std::pair<std::size_t, std::filesystem::path>> best;
  for (const auto& entry : std::filesystem::directory_iterator(out)) {
    if (!entry.is_directory()) continue;
    const auto n = run_suffix(entry.path().filename().string(), command);
    if (n && (!best || *n > best->first)) best = {*n, entry.path()};
  }
  if (!best) return std::nullopt;
  return best->second;
}

}  // namespace reviewnet
