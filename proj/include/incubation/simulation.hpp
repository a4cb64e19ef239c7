#pragma once

#include "error.hpp"
#include "observation.hpp"
#include "random.hpp"
#include "sampling.hpp"
#include "weibull.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace incubation {

enum class Rounding
{
  round_to_day,
  continuous
};

//! Exit times uniform on [0, M], infection uniform on [0, E], incubation
//! Weibull truncated to [0, M1].
struct SimulationConfig
{
  std::size_t n = 1000;
  double M = 30.0;
  double M1 = 20.0;
  WeibullParams weibull{ 3.03514, 0.002619 };
  Rounding rounding = Rounding::continuous;
  std::uint64_t seed = 1;

  void validate() const
  {
    if (n < 1)
      throw ValidationError("simulation needs n >= 1");
    if (!(M1 > 0.0) || !(M1 <= M))
      throw ValidationError("simulation needs 0 < M1 <= M");
    weibull.validate();
  }
};

struct SimulatedSample
{
  ObservationSet sample;
  std::vector<double> infection;
  std::vector<double> incubation;
};

//! Simulated sample together with the latent infection and incubation times.
//! With day rounding, E and S are rounded to the nearest integer, delta is
//! taken from the unrounded times, and draws that round to an empty
//! interval are repeated.
inline SimulatedSample simulate_with_latent(const SimulationConfig& config)
{
  config.validate();
  Rng rng(config.seed);
  std::vector<Observation> records;
  std::vector<double> infection;
  std::vector<double> incubation;
  records.reserve(config.n);
  while (records.size() < config.n) {
    const double e = config.M * rng.uniform();
    const double v = e * rng.uniform();
    const double w = truncated_weibull_sample(config.weibull, config.M1, rng);
    const double s = v + w;
    const bool delta = s <= e;
    if (config.rounding == Rounding::continuous) {
      records.emplace_back(e, s, delta);
    } else {
      const double er = std::round(e);
      const double sr = std::round(s);
      if (!(sr > 0.0) || (!delta && !(er > 0.0)))
        continue;
      records.emplace_back(er, sr, delta);
    }
    infection.push_back(v);
    incubation.push_back(w);
  }
  const auto scale = config.rounding == Rounding::continuous ? TimeScale::continuous : TimeScale::discrete_days;
  return { ObservationSet(std::move(records), scale), std::move(infection), std::move(incubation) };
}

inline ObservationSet simulate_continuous(const SimulationConfig& config)
{
  return simulate_with_latent(config).sample;
}

} // namespace incubation
