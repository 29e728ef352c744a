#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reviewnet/train.hpp"

namespace reviewnet {

/// Everything a CLI command needs, fully resolved.
struct RunConfig {
  std::string data;
  std::string out = "runs";
  std::string lexicon;     // empty: built-in lexicon
  std::string embeddings;  // empty: random embeddings
  std::string model;       // empty: latest `train` run under `out`
  std::string text;        // predict input
  TrainConfig train;
};

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; blank lines and `#` comments are skipped. Throws
/// ParseError with the line number on malformed lines, unknown keys and
/// repeated keys.
KeyValues parse_key_values(std::istream& in);
KeyValues read_config_file(const std::filesystem::path& path);

/// Overwrites the fields named in `kv`. Throws UsageError on unknown keys or
/// unparsable values.
void apply_overrides(RunConfig& config, const KeyValues& kv);

/// Every key in a fixed order, defaults included.
KeyValues to_key_values(const RunConfig& config);
void write_config(std::ostream& out, const RunConfig& config);

/// All recognised keys in the order they are written.
const std::vector<std::string>& config_keys();

/// Creates `<out>/<command>`, or `<out>/<command>.N` with the smallest free N,
/// so earlier runs are never overwritten.
std::filesystem::path next_run_dir(const std::filesystem::path& out, const std::string& command);

/// The highest-numbered existing `<out>/<command>[.N]` directory.
std::optional<std::filesystem::path> latest_run_dir(const std::filesystem::path& out,
                                                    const std::string& command);

}  // namespace reviewnet
