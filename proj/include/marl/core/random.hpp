#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace marl {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0);
// Uniform on the open interval (0, 1); never returns 0.
double uniform_open(Rng& rng);
double standard_normal(Rng& rng);
// Inclusive on both ends.
int uniform_int(Rng& rng, int lo, int hi);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for an independent, named random stream of a run. Every stream of a
// run (env, init, noise, buffer, gumbel, eval, ...) is derived from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
Rng make_rng(std::uint64_t master, std::string_view label);

}  // namespace marl
