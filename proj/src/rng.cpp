#include "oam/rng.hpp"

#include <cmath>

namespace oam {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 trial_stream(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = splitmix64(b ^ splitmix64(stream + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

cplx complex_gaussian(std::mt19937_64& gen, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(gen);
  const double im = n(gen);
  return {re, im};
}

}  // namespace oam
