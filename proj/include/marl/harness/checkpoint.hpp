#pragma once

#include <cstdint>
#include <string>

#include "marl/agents/train.hpp"

namespace marl::harness {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  agents::TrainConfig cfg;
  agents::NamedValues params;
  std::string rng_state;  // env stream at the snapshot
  int episode = 0;
};

// Binary layout, little-endian: "MARL", u32 version, u32 real width in bytes, u64 record
// count, then per record u32 name length, name, u64 rows, u64 cols, row-major reals;
// then u64-length-prefixed config JSON and rng state, and an i64 episode counter.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint checkpoint_from_run(const agents::RunLog& log);
// Copies the checkpoint weights into a learner built from the same config.
void restore(agents::Learner& learner, const Checkpoint& c);

}  // namespace marl::harness
