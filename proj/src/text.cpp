#include "reviewnet/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "reviewnet/hash.hpp"

namespace reviewnet {

std::string clean_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    char c = ch;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
    if (!keep) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

TokenList tokenize(std::string_view clean) {
  TokenList tokens;
  std::size_t i = 0;
  while (i < clean.size()) {
    while (i < clean.size() && std::isspace(static_cast<unsigned char>(clean[i]))) ++i;
    const std::size_t start = i;
    while (i < clean.size() && !std::isspace(static_cast<unsigned char>(clean[i]))) ++i;
    if (i > start) tokens.emplace_back(clean.substr(start, i - start));
  }
  return tokens;
}

TokenList clean_tokens(std::string_view raw) { return tokenize(clean_text(raw)); }

Vocab::Vocab() {
  tokens_ = {std::string(kPadToken), std::string(kOovToken)};
  index_[tokens_[0]] = kPad;
  index_[tokens_[1]] = kOov;
}

int Vocab::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  if (frozen_) throw std::logic_error("Vocab: cannot add '" + token + "' to a frozen vocabulary");
  const int idx = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, idx);
  return idx;
}

int Vocab::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOov : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

const std::string& Vocab::token_at(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size())
    throw std::out_of_range("Vocab: index " + std::to_string(index) + " out of range");
  return tokens_[static_cast<std::size_t>(index)];
}

std::uint64_t Vocab::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    h = fnv1a(tokens_[i] + "\t" + std::to_string(i) + "\n", h);
  return h;
}

void Vocab::save_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
  if (!out) throw IoError("failed writing vocabulary " + path.string());
}

Vocab Vocab::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary " + path.string());
  Vocab v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("vocabulary line lacks a tab", lineno);
    const std::string token = line.substr(0, tab);
    std::size_t idx = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec != std::errc() || ptr != last) throw ParseError("bad vocabulary index", lineno);
    if (idx != lineno - 1) throw ParseError("vocabulary indices must be dense and ordered", lineno);
    if (idx < 2) {
      if (token != v.tokens_[idx]) throw ParseError("reserved index holds '" + token + "'", lineno);
      continue;
    }
    if (v.add(token) != static_cast<int>(idx))
      throw ParseError("duplicate vocabulary token '" + token + "'", lineno);
  }
  v.freeze();
  return v;
}

Vocab build_vocab(std::span<const TokenList> corpus, std::size_t min_freq, std::size_t max_size) {
  if (min_freq < 1) throw std::invalid_argument("build_vocab: min_freq must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& tok : doc) ++counts[tok];

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (n >= min_freq && tok != Vocab::kPadToken && tok != Vocab::kOovToken)
      ranked.emplace_back(tok, n);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab v;
  const std::size_t room = max_size > 2 ? max_size - 2 : 0;
  for (std::size_t i = 0; i < ranked.size() && i < room; ++i) v.add(ranked[i].first);
  v.freeze();
  return v;
}

EncodedReview encode_pad(std::span<const std::string> tokens, const Vocab& vocab,
                         std::size_t seq_len) {
  if (seq_len < 1) throw std::invalid_argument("encode_pad: length must be >= 1");
  EncodedReview e;
  e.original_length = tokens.size();
  e.ids.assign(seq_len, Vocab::kPad);
  const std::size_t n = std::min(seq_len, tokens.size());
  for (std::size_t i = 0; i < n; ++i) e.ids[i] = vocab.index_of(tokens[i]);
  return e;
}

EmbeddingMatrix random_embeddings(const Vocab& vocab, Eigen::Index dim, SeededRng& rng) {
  if (dim < 1) throw std::invalid_argument("embeddings: dimension must be >= 1");
  EmbeddingMatrix emb;
  emb.table = init_uniform(static_cast<Eigen::Index>(vocab.size()), dim, rng, kEmbeddingInitScale);
  emb.table.row(Vocab::kPad).setZero();
  return emb;
}

EmbeddingMatrix load_glove(const std::filesystem::path& path, const Vocab& vocab, SeededRng& rng) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read embeddings " + path.string());

  EmbeddingMatrix emb;
  std::vector<bool> filled(vocab.size(), false);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0)
      throw ParseError("embedding line has no vector", lineno);
    const std::string_view token(line.data(), space);

    values.clear();
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' '))
        throw ParseError("malformed number in embedding vector", lineno);
      values.push_back(v);
      p = next;
    }
    const auto width = static_cast<Eigen::Index>(values.size());
    if (dim == 0) {
      if (width == 0) throw ParseError("embedding line has no vector", lineno);
      dim = width;
      emb.table = init_uniform(static_cast<Eigen::Index>(vocab.size()), dim, rng,
                               kEmbeddingInitScale);
    } else if (width != dim) {
      throw ParseError("embedding has " + std::to_string(width) + " values, expected " +
                           std::to_string(dim),
                       lineno);
    }
    if (!vocab.contains(token)) continue;
    const int idx = vocab.index_of(token);
    if (idx == Vocab::kPad || filled[static_cast<std::size_t>(idx)]) continue;
    filled[static_cast<std::size_t>(idx)] = true;
    for (Eigen::Index k = 0; k < dim; ++k) emb.table(idx, k) = values[static_cast<std::size_t>(k)];
  }
  if (in.bad()) throw IoError("failed reading embeddings " + path.string());
  if (dim == 0) throw ParseError("embedding file " + path.string() + " is empty");
  emb.table.row(Vocab::kPad).setZero();
  return emb;
}

std::vector<Tensor> embed(const EncodedReview& encoded, const EmbeddingMatrix& emb) {
  const EncodedReview* one = &encoded;
  return embed_batch(std::span<const EncodedReview* const>(&one, 1), emb);
}

std::vector<Tensor> embed_batch(std::span<const EncodedReview* const> batch,
                                const EmbeddingMatrix& emb) {
  if (batch.empty()) return {};
  const std::size_t len = batch.front()->ids.size();
  const auto cols = static_cast<Eigen::Index>(batch.size());
  std::vector<Tensor> steps(len, Tensor::Zero(emb.dim(), cols));
  for (Eigen::Index b = 0; b < cols; ++b) {
    const auto& ids = batch[static_cast<std::size_t>(b)]->ids;
    if (ids.size() != len) throw DimensionError("embed_batch: reviews differ in length");
    for (std::size_t t = 0; t < len; ++t) {
      const int id = ids[t];
      if (id < 0 || id >= emb.vocab_size())
        throw std::out_of_range("embed: index " + std::to_string(id) + " >= vocabulary size " +
                                std::to_string(emb.vocab_size()));
      if (id != Vocab::kPad) steps[t].col(b) = emb.table.row(id).transpose();
    }
  }
  return steps;
}

}  // namespace reviewnet
