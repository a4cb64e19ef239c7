#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace incubation {

//! Finitely supported distribution on strictly increasing points.
class DiscreteDistribution
{
public:
  DiscreteDistribution(std::vector<double> support, std::vector<double> masses)
    : support_(std::move(support))
    , masses_(std::move(masses))
  {
    if (support_.size() != masses_.size() || support_.empty())
      throw ValidationError("support and masses must be nonempty and of equal length");
    for (std::size_t k = 1; k < support_.size(); ++k) {
      if (!(support_[k - 1] < support_[k]))
        throw ValidationError("support must be strictly increasing");
    }
    for (double p : masses_) {
      if (!(p >= 0.0))
        throw ValidationError("masses must be nonnegative");
    }
    const double total = std::accumulate(masses_.begin(), masses_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError("masses must sum to 1");
  }

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  std::size_t size() const noexcept { return support_.size(); }

  //! Right-continuous distribution function.
  double cdf(double x) const
  {
    const auto end = std::upper_bound(support_.begin(), support_.end(), x);
    const auto n = static_cast<std::size_t>(end - support_.begin());
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += masses_[k];
    return std::min(acc, 1.0);
  }

  double mass_at(double x) const
  {
    const auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it == support_.end() || *it != x)
      return 0.0;
    return masses_[static_cast<std::size_t>(it - support_.begin())];
  }

private:
  std::vector<double> support_;
  std::vector<double> masses_;
};

} // namespace incubation
