#pragma once

#include <cstdint>
#include <random>

#include "oam/model.hpp"

namespace oam {

std::uint64_t splitmix64(std::uint64_t x);

// Independent generator for (master seed, trial index, stream tag).
std::mt19937_64 trial_stream(std::uint64_t master_seed, std::uint64_t trial,
                             std::uint64_t stream = 0);

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
cplx complex_gaussian(std::mt19937_64& gen, double variance);

}  // namespace oam
