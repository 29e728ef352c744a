#include "reviewnet/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace reviewnet {

namespace {

constexpr const char* kMagic = "reviewnet-checkpoint";
constexpr int kVersion = 1;

std::string hex_u64(std::uint64_t v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  return std::string(buf, p);
}

std::string hexfloat(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, p);
}

// Collects every parameter block of a model in a fixed order.
template <class Model, class Fn>
void for_each_model_block(Model& m, Fn&& fn) {
  fn(std::string("embeddings"), m.embeddings.table);
  for_each_block(m.network, fn);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::vector<std::string> fields() {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("checkpoint ends early", line_ + 1);
    ++line_;
    std::istringstream s(line);
    std::vector<std::string> out;
    for (std::string w; s >> w;) out.push_back(w);
    return out;
  }

  std::vector<std::string> expect(std::string_view key, std::size_t count) {
    auto f = fields();
    if (f.empty() || f[0] != key || f.size() != count + 1)
      throw ParseError("expected '" + std::string(key) + "' with " + std::to_string(count) +
                           " value(s)",
                       line_);
    return f;
  }

  template <class Int>
  Int integer(const std::string& s, int base = 10) const {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError("bad integer '" + s + "'", line_);
    return v;
  }

  double real(const std::string& s) const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError("bad value '" + s + "'", line_);
    return v;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const TextModel& m = ckpt.model;
  std::size_t blocks = 0;
  for_each_model_block(m, [&](const std::string&, const Tensor&) { ++blocks; });

  out << kMagic << ' ' << kVersion << '\n'
      << "task " << to_string(m.task) << '\n'
      << "seq_len " << m.seq_len << '\n'
      << "split_seed " << ckpt.split_seed << '\n'
      << "vocab_size " << m.vocab.size() << '\n'
      << "vocab_fingerprint " << hex_u64(m.vocab.fingerprint()) << '\n'
      << "config_fingerprint " << hex_u64(m.config_fingerprint()) << '\n'
      << "embeddings_trainable " << (m.embeddings.trainable ? 1 : 0) << '\n'
      << "blocks " << blocks << '\n';
  for_each_model_block(m, [&](const std::string& name, const Tensor& t) {
    out << "block " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) out << (c ? " " : "") << hexfloat(t(r, c));
      out << '\n';
    }
  });
  out << "end\n";
  if (!out) throw IoError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in, Vocab vocab) {
  Reader rd(in);
  const auto magic = rd.expect(kMagic, 1);
  if (rd.integer<int>(magic[1]) != kVersion)
    throw ParseError("unsupported checkpoint version " + magic[1], rd.line());

  Checkpoint ck;
  TextModel& m = ck.model;
  const auto task = parse_task(rd.expect("task", 1)[1]);
  if (!task) throw ParseError("unknown task", rd.line());
  m.task = *task;
  m.seq_len = rd.integer<std::size_t>(rd.expect("seq_len", 1)[1]);
  ck.split_seed = rd.integer<std::uint64_t>(rd.expect("split_seed", 1)[1]);
  const auto vocab_size = rd.integer<std::size_t>(rd.expect("vocab_size", 1)[1]);
  const auto vocab_fp = rd.integer<std::uint64_t>(rd.expect("vocab_fingerprint", 1)[1], 16);
  const auto config_fp = rd.integer<std::uint64_t>(rd.expect("config_fingerprint", 1)[1], 16);
  m.embeddings.trainable = rd.integer<int>(rd.expect("embeddings_trainable", 1)[1]) != 0;
  const auto blocks = rd.integer<std::size_t>(rd.expect("blocks", 1)[1]);

  if (vocab.size() != vocab_size || vocab.fingerprint() != vocab_fp)
    throw FingerprintMismatch("vocabulary does not match the checkpoint (expected fingerprint " +
                              hex_u64(vocab_fp) + ", got " + hex_u64(vocab.fingerprint()) + ")");

  std::vector<std::pair<std::string, Tensor>> read;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto h = rd.expect("block", 3);
    const auto rows = rd.integer<Eigen::Index>(h[2]);
    const auto cols = rd.integer<Eigen::Index>(h[3]);
    Tensor t(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto vals = rd.fields();
      if (static_cast<Eigen::Index>(vals.size()) != cols)
        throw ParseError("block " + h[1] + " row has " + std::to_string(vals.size()) +
                             " values, expected " + std::to_string(cols),
                         rd.line());
      for (Eigen::Index c = 0; c < cols; ++c) t(r, c) = rd.real(vals[static_cast<std::size_t>(c)]);
    }
    read.emplace_back(h[1], std::move(t));
  }
  rd.expect("end", 0);

  // Size the network from the stored shapes, then copy block by block.
  if (read.size() < 2) throw ParseError("checkpoint holds too few blocks");
  const Tensor& emb = read[0].second;
  const Tensor& forget = read[1].second;
  const Tensor& head = read.back().second;
  m.embeddings.table = Tensor::Zero(emb.rows(), emb.cols());
  m.network = BiLstmClassifier<double>::zeros(emb.cols(), forget.rows(), head.rows());
  std::size_t i = 0;
  auto assign = [&](const std::string& name, Tensor& dst) {
    if (i >= read.size()) throw ParseError("checkpoint is missing block " + name);
    const auto& [stored_name, src] = read[i++];
    if (stored_name != name)
      throw ParseError("expected block " + name + ", found " + stored_name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols())
      throw ParseError("block " + name + " has shape " + shape_string(src.rows(), src.cols()) +
                       ", expected " + shape_string(dst.rows(), dst.cols()));
    dst = src;
  };
  for_each_model_block(m, assign);
  if (i != read.size()) throw ParseError("checkpoint has unexpected extra blocks");

  m.vocab = std::move(vocab);
  if (m.config_fingerprint() != config_fp)
    throw FingerprintMismatch("config fingerprint mismatch (stored " + hex_u64(config_fp) +
                              ", recomputed " + hex_u64(m.config_fingerprint()) + ")");
  return ck;
}

void save_model_dir(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::filesystem::create_directories(dir);
  ckpt.model.vocab.save_tsv(dir / kVocabFile);
  std::ofstream out(dir / kCheckpointFile, std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / kCheckpointFile).string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_model_dir(const std::filesystem::path& dir) {
  const auto ckpt_path = dir / kCheckpointFile;
  if (!std::filesystem::is_regular_file(ckpt_path))
    throw IoError("no checkpoint at " + ckpt_path.string());
  Vocab vocab = Vocab::load_tsv(dir / kVocabFile);
  std::ifstream in(ckpt_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + ckpt_path.string());
  return read_checkpoint(in, std::move(vocab));
}

}  // namespace reviewnet
