#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "reviewnet/train.hpp"

namespace reviewnet {

/// Text container, one header line per field followed by parameter blocks:
///
///   reviewnet-checkpoint 1
///   task <name>
///   seq_len <n>
///   split_seed <n>
///   vocab_size <n>
///   vocab_fingerprint <hex>
///   config_fingerprint <hex>
///   embeddings_trainable <0|1>
///   blocks <n>
///   block <name> <rows> <cols>
///   <one line per row, hexfloat values separated by spaces>
///   ...
///   end
///
/// Values are written as C99 hexfloats so a write/read round trip is exact.
/// The vocabulary itself lives next to the checkpoint as `vocab.tsv`.
struct Checkpoint {
  TextModel model;
  std::uint64_t split_seed = 0;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);

/// Parses a checkpoint and attaches `vocab`. Throws ParseError on malformed
/// input and FingerprintMismatch when the vocabulary or the recomputed config
/// fingerprint disagrees with the stored one.
Checkpoint read_checkpoint(std::istream& in, Vocab vocab);

inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kVocabFile = "vocab.tsv";

/// Writes `model.ckpt` and `vocab.tsv` into `dir`.
void save_model_dir(const std::filesystem::path& dir, const Checkpoint& ckpt);

/// Throws IoError when either file is missing.
Checkpoint load_model_dir(const std::filesystem::path& dir);

}  // namespace reviewnet
