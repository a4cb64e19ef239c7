#pragma once

#include "distribution.hpp"
#include "error.hpp"
#include "random.hpp"
#include "smooth.hpp"
#include "weibull.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

namespace incubation {

//! Draws from a density on [lo, hi] under a constant envelope `bound`.
//! The expected number of proposals per draw is bound * (hi - lo) divided
//! by the integral of the density over [lo, hi].
class RejectionSampler
{
public:
  RejectionSampler(std::function<double(double)> density,
                   double lo,
                   double hi,
                   double bound,
                   std::size_t max_proposals = 10'000'000)
    : density_(std::move(density))
    , lo_(lo)
    , hi_(hi)
    , bound_(bound)
    , max_proposals_(max_proposals)
  {
    if (!(hi_ > lo_))
      throw ValidationError("rejection sampler needs hi > lo");
    if (!(bound_ > 0.0) || !std::isfinite(bound_))
      throw ValidationError("rejection envelope must be positive and finite");
  }

  double operator()(Rng& rng, std::size_t* proposals = nullptr) const
  {
    for (std::size_t k = 1; k <= max_proposals_; ++k) {
      const double x = lo_ + (hi_ - lo_) * rng.uniform();
      const double fx = density_(x);
      if (fx > bound_)
        throw NumericError("rejection envelope violated: density exceeds the bound");
      if (rng.uniform() * bound_ <= fx) {
        if (proposals != nullptr)
          *proposals += k;
        return x;
      }
    }
    throw NumericError("rejection sampler exceeded its proposal budget");
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double bound() const noexcept { return bound_; }

private:
  std::function<double(double)> density_;
  double lo_;
  double hi_;
  double bound_;
  std::size_t max_proposals_;
};

inline double rejection_sample_density(std::function<double(double)> density,
                                       double lo,
                                       double hi,
                                       double bound,
                                       Rng& rng)
{
  return RejectionSampler(std::move(density), lo, hi, bound)(rng);
}

//! Sampler for the kernel density estimate built on `dist` with bandwidth
//! h0, restricted to nonnegative values. The envelope is 1.05 times the
//! largest density value on a step-0.01 grid.
inline RejectionSampler density_sampler(const DiscreteDistribution& dist, double h0)
{
  KernelSpec{ KernelFamily::triweight, h0 }.validate();
  const double lo = std::max(0.0, dist.support().front() - h0);
  const double hi = dist.support().back() + h0;
  double peak = 0.0;
  for (double t : uniform_grid(lo, hi, 0.01))
    peak = std::max(peak, density_at(dist, h0, t));
  if (!(peak > 0.0))
    throw NumericError("reference density vanishes on its support");
  return RejectionSampler([dist, h0](double t) { return density_at(dist, h0, t); }, lo, hi, 1.05 * peak);
}

inline double truncated_weibull_cdf(const WeibullParams& params, double m1, double x)
{
  if (x >= m1)
    return 1.0;
  return weibull_cdf(params, x) / weibull_cdf(params, m1);
}

inline double truncated_weibull_density(const WeibullParams& params, double m1, double x)
{
  if (x > m1)
    return 0.0;
  return weibull_density(params, x) / weibull_cdf(params, m1);
}

//! Inverse of x -> G(x)/G(m1) on [0, m1].
inline double truncated_weibull_quantile(const WeibullParams& params, double m1, double u)
{
  params.validate();
  const double top = weibull_cdf(params, m1);
  if (!(top > 0.0))
    throw ValidationError("truncation interval carries no Weibull mass");
  if (u <= 0.0)
    return 0.0;
  if (u >= 1.0)
    return m1;
  const double x = std::pow(-std::log1p(-u * top) / params.rate, 1.0 / params.shape);
  return std::min(x, m1);
}

inline double truncated_weibull_sample(const WeibullParams& params, double m1, Rng& rng)
{
  return truncated_weibull_quantile(params, m1, rng.uniform());
}

} // namespace incubation
