#pragma once

#include <incubation/observation.hpp>
#include <incubation/random.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace incubation::test {

inline std::string read_fixture(const std::string& name)
{
  std::ifstream in(std::string(INCUBATION_DATA_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ObservationSet wuhan()
{
  return parse_observations(read_fixture("wuhan.txt"));
}

//! Day-scale sample with exits in 1..max_exit and onsets in 1..max_onset.
inline ObservationSet random_day_sample(Rng& rng, std::size_t n, std::size_t max_exit = 20, std::size_t max_onset = 25)
{
  std::vector<Observation> recs;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = static_cast<double>(1 + rng.index(max_exit));
    const double s = static_cast<double>(1 + rng.index(max_onset));
    recs.push_back(Observation::from_times(e, s));
  }
  return ObservationSet(std::move(recs), TimeScale::discrete_days);
}

//! Reference point masses on days 3..9.
inline const std::vector<double> reference_masses = { 0.0463850922, 0.2466837048, 0.0024858945, 0.1126655228,
                                            0.1347501680, 0.2058210187, 0.2512085991 };

} // namespace incubation::test
