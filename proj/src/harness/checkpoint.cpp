#include "marl/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace marl::harness {

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path);
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out_.put(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.put(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  void real(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("checkpoint write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot read " + path);
  }
  std::uint64_t u64() { return unsigned_le(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
  double real() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::uint64_t n) {
    if (n > (1ULL << 32)) throw std::runtime_error("checkpoint: implausible length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("checkpoint: truncated");
    return s;
  }

 private:
  std::uint64_t unsigned_le(int width) {
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) {
      const int c = in_.get();
      if (c == EOF) throw std::runtime_error("checkpoint: truncated");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
    }
    return v;
  }
  std::ifstream in_;
};

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  if (c.params.names.size() != c.params.values.size()) throw std::invalid_argument("checkpoint: names/values differ");
  Writer w(path);
  w.bytes("MARL");
  w.u32(kCheckpointVersion);
  w.u32(sizeof(double));
  w.u64(c.params.values.size());
  for (std::size_t k = 0; k < c.params.values.size(); ++k) {
    const auto& name = c.params.names[k];
    const auto& m = c.params.values[k];
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) w.real(m.data()[i]);
  }
  const std::string cfg = agents::to_json(c.cfg).dump();
  w.u64(cfg.size());
  w.bytes(cfg);
  w.u64(c.rng_state.size());
  w.bytes(c.rng_state);
  w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(c.episode)));
  w.close();
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  if (r.bytes(4) != "MARL") throw std::runtime_error(path + ": not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw std::runtime_error(path + ": unsupported version " + std::to_string(version));
  if (r.u32() != sizeof(double)) throw std::runtime_error(path + ": unsupported real width");
  Checkpoint c;
  const std::uint64_t count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    c.params.names.push_back(r.bytes(r.u32()));
    const auto rows = static_cast<Eigen::Index>(r.u64());
    const auto cols = static_cast<Eigen::Index>(r.u64());
    agents::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.real();
    c.params.values.push_back(std::move(m));
  }
  c.cfg = agents::config_from_json(nlohmann::json::parse(r.bytes(r.u64())));
  c.rng_state = r.bytes(r.u64());
  c.episode = static_cast<int>(static_cast<std::int64_t>(r.u64()));
  return c;
}

Checkpoint checkpoint_from_run(const agents::RunLog& log) {
  Checkpoint c;
  c.cfg = log.cfg;
  c.params = log.best_params;
  c.rng_state = log.best_rng_state;
  c.episode = log.rows.at(log.best_row).episode;
  return c;
}

void restore(agents::Learner& learner, const Checkpoint& c) { agents::load_param_values(learner.all_params(), c.params); }

}  // namespace marl::harness
