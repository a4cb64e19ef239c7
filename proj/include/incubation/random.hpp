#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace incubation {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

//! 64-bit Mersenne twister with platform-independent conversions to
//! uniforms and indices (the std distributions are implementation-defined).
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {
  }

  //! Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  //! Uniform on [0, n), n > 0, without modulo bias.
  std::size_t index(std::size_t n)
  {
    const std::uint64_t range = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
  }

  std::uint64_t bits() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

//! Independent stream for replicate `r` of a run seeded with `master`.
inline Rng replicate_stream(std::uint64_t master, std::uint64_t r)
{
  return Rng(splitmix64(master ^ splitmix64(r ^ 0xD1B54A32D192ED03ULL)));
}

} // namespace incubation
