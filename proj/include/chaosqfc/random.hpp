#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace chaosqfc {

// Each consumer of randomness draws from its own tagged stream so adding
// draws in one place never shifts another.
enum class Stream : std::uint32_t {
  source = 1,
  noise = 2,
  vibration = 3,
  shot_noise = 4,
  chaotic_mode = 5,
  electrical = 6,
  lo_phase = 7,
};

// Ensemble member k always uses seed ^ k.
constexpr std::uint64_t member_seed(std::uint64_t seed, std::uint64_t k) noexcept { return seed ^ k; }

class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  // E|z|^2 = 1
  std::complex<double> circular_normal();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace chaosqfc
