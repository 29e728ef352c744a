#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reviewnet/errors.hpp"
#include "reviewnet/tensor.hpp"

namespace reviewnet {

using TokenList = std::vector<std::string>;

/// CR/LF become spaces, ASCII is lowercased, anything outside [a-z0-9' ]
/// becomes a space, runs of spaces collapse and the ends are trimmed.
std::string clean_text(std::string_view raw);

/// Whitespace split of a cleaned string.
TokenList tokenize(std::string_view clean);

/// clean_text followed by tokenize.
TokenList clean_tokens(std::string_view raw);

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kOov = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kOovToken = "<oov>";

  Vocab();

  /// Returns the token's index, inserting it if new. Throws on a frozen vocab.
  int add(const std::string& token);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  /// Index of `token`, or kOov.
  int index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token_at(int index) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// FNV-1a over the exported `token\tindex\n` lines.
  std::uint64_t fingerprint() const;

  /// Two-column `token<TAB>index` file, one line per index in order.
  void save_tsv(const std::filesystem::path& path) const;
  static Vocab load_tsv(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.frozen_ == b.frozen_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  bool frozen_ = false;
};

/// Tokens with frequency >= min_freq ranked by (count desc, token asc), keeping
/// at most max_size - 2 of them after PAD and OOV. The result is frozen.
Vocab build_vocab(std::span<const TokenList> corpus, std::size_t min_freq, std::size_t max_size);

struct EncodedReview {
  std::vector<int> ids;             // exactly seq_len entries
  std::size_t original_length = 0;  // token count before pad/truncate
};

/// Keeps the first `seq_len` tokens, maps unknown ones to OOV and post-pads
/// with PAD.
EncodedReview encode_pad(std::span<const std::string> tokens, const Vocab& vocab,
                         std::size_t seq_len);

struct EmbeddingMatrix {
  Tensor table;  // (vocab_size, dim); row 0 stays zero
  bool trainable = true;

  Eigen::Index dim() const { return table.cols(); }
  Eigen::Index vocab_size() const { return table.rows(); }
};

inline constexpr double kEmbeddingInitScale = 0.25;

/// Every row uniform on [-0.25, 0.25] except the zero PAD row.
EmbeddingMatrix random_embeddings(const Vocab& vocab, Eigen::Index dim, SeededRng& rng);

/// Reads GloVe text vectors (`token v1 ... vd`, space separated). Rows for
/// vocabulary tokens are copied from the file; tokens missing from it, and the
/// OOV row, keep a uniform(+-0.25) draw from `rng`; PAD is zero. The dimension
/// comes from the first line and every later line must agree.
EmbeddingMatrix load_glove(const std::filesystem::path& path, const Vocab& vocab, SeededRng& rng);

/// One (dim, 1) column per position; PAD positions are zero vectors.
std::vector<Tensor> embed(const EncodedReview& encoded, const EmbeddingMatrix& emb);

/// Time-major batch: element t is (dim, batch) with column b taken from
/// batch[b].ids[t]. All reviews must share a length.
std::vector<Tensor> embed_batch(std::span<const EncodedReview* const> batch,
                                const EmbeddingMatrix& emb);

}  // namespace reviewnet
