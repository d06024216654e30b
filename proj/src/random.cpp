#include "chaosqfc/random.hpp"

#include <cmath>

namespace chaosqfc {

Rng::Rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  engine_.seed(seq);
}

std::complex<double> Rng::circular_normal() {
  const double re = normal();
  const double im = normal();
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

}  // namespace chaosqfc
