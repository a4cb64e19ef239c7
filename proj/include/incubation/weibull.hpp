#pragma once

#include "error.hpp"
#include "observation.hpp"
#include "pattern_search.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

namespace incubation {

//! G(x) = 1 - exp(-rate * x^shape) for x > 0.
struct WeibullParams
{
  double shape = 1.0;
  double rate = 1.0;

  void validate() const
  {
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
      throw ValidationError("Weibull shape and rate must be positive and finite");
  }
};

inline double weibull_cdf(const WeibullParams& params, double x)
{
  if (!(x > 0.0))
    return 0.0;
  return -std::expm1(-params.rate * std::pow(x, params.shape));
}

inline double weibull_density(const WeibullParams& params, double x)
{
  if (!(x > 0.0))
    return 0.0;
  const double xa = std::pow(x, params.shape);
  return params.shape * params.rate * xa / x * std::exp(-params.rate * xa);
}

//! Censored log-likelihood: log G(S) for delta = 1 and
//! log(G(S) - G(S - E)) otherwise; -inf when a term is not positive.
inline double weibull_loglik(const WeibullParams& params, const ObservationSet& sample)
{
  if (!(params.shape > 0.0) || !(params.rate > 0.0))
    return -std::numeric_limits<double>::infinity();
  double f = 0.0;
  for (const auto& r : sample) {
    const double d = weibull_cdf(params, r.interval_right()) - weibull_cdf(params, r.interval_left());
    if (!(d > 0.0))
      return -std::numeric_limits<double>::infinity();
    f += std::log(d);
  }
  return f;
}

struct WeibullFit
{
  WeibullParams params;
  double loglik = 0.0;
  std::size_t evals = 0;
  bool converged = false;
};

struct WeibullFitOptions
{
  WeibullParams init{ 2.0, 0.01 };
  //! Steps are taken in (log shape, log rate).
  double initial_step = 0.5;
  double shrink_factor = 0.5;
  double min_step = 1e-8;
  std::size_t max_evals = 100000;
};

//! Weibull MLE by pattern search over log-parameters, which keeps both
//! parameters positive without explicit constraints.
inline WeibullFit fit_weibull(const ObservationSet& sample, const WeibullFitOptions& options = {})
{
  options.init.validate();
  PatternSearchConfig config;
  config.init = { std::log(options.init.shape), std::log(options.init.rate) };
  config.initial_step = { options.initial_step, options.initial_step };
  config.shrink_factor = options.shrink_factor;
  config.min_step = options.min_step;
  config.max_evals = options.max_evals;

  const auto result = hooke_jeeves(
    [&](const std::vector<double>& v) {
      return weibull_loglik({ std::exp(v[0]), std::exp(v[1]) }, sample);
    },
    config);
  return WeibullFit{ { std::exp(result.argmax[0]), std::exp(result.argmax[1]) },
                     result.value,
                     result.evals,
                     result.converged };
}

} // namespace incubation
