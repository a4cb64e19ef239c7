#pragma once

#include "error.hpp"
#include "npmle.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "score.hpp"
#include "simulation.hpp"
#include "smooth.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace incubation {

struct VarianceReport
{
  std::vector<double> t_values;
  //! n^{-3/7} E theta^2 per t
  std::vector<double> asymptotic;
  //! n^{4/7} times the sample variance of the density estimate per t
  std::vector<double> empirical;
  std::size_t n = 0;
  double h = 0.0;
  std::size_t n_sims = 0;
  std::size_t used = 0;
  std::size_t dropped = 0;
};

struct VarianceOptions
{
  std::size_t n_sims = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  PhiOptions phi{};
  IcmOptions fit{};
};

//! Asymptotic variances n^{-3/7} E theta^2 for each t under the
//! simulation model's truncated Weibull law.
inline std::vector<double> asymptotic_variances(const SimulationConfig& config,
                                                const std::vector<double>& t_values,
                                                double h,
                                                const PhiOptions& phi = {},
                                                unsigned threads = 1)
{
  config.validate();
  const auto model = truncated_weibull_model(config.weibull, config.M, config.M1);
  std::vector<double> out(t_values.size());
  parallel_for(t_values.size(), threads, [&](std::size_t k) {
    out[k] = asymptotic_variance(solve_phi(model, t_values[k], h, phi), static_cast<double>(config.n));
  });
  return out;
}

//! Simulation variance of the density estimate at each t, scaled by
//! n^{4/7}, from n_sims independent samples of the continuous model.
//! Replicate r simulates with the seed of stream (seed, r).
inline VarianceReport empirical_variance(const SimulationConfig& config,
                                         const std::vector<double>& t_values,
                                         double h,
                                         const VarianceOptions& options = {})
{
  config.validate();
  KernelSpec{ KernelFamily::triweight, h }.validate();
  if (options.n_sims < 2)
    throw ValidationError("empirical variance needs at least two simulations");
  if (t_values.empty())
    throw ValidationError("no target points given");

  std::vector<std::optional<std::vector<double>>> results(options.n_sims);
  parallel_for(options.n_sims, options.threads, [&](std::size_t r) {
    SimulationConfig local = config;
    local.rounding = Rounding::continuous;
    local.seed = replicate_stream(options.seed, r).bits();
    const auto fit = fit_npmle(simulate_continuous(local), options.fit);
    if (!fit.converged)
      return;
    std::vector<double> vals;
    vals.reserve(t_values.size());
    for (double t : t_values)
      vals.push_back(density_at(fit.distribution, h, t));
    results[r] = std::move(vals);
  });

  VarianceReport report;
  report.t_values = t_values;
  report.n = config.n;
  report.h = h;
  report.n_sims = options.n_sims;
  std::vector<double> sum(t_values.size(), 0.0);
  for (const auto& res : results) {
    if (!res) {
      ++report.dropped;
      continue;
    }
    ++report.used;
    for (std::size_t k = 0; k < sum.size(); ++k)
      sum[k] += (*res)[k];
  }
  if (report.used < 2)
    throw NumericError("fewer than two simulations produced a converged fit");
  const double used = static_cast<double>(report.used);
  const double scale = std::pow(static_cast<double>(config.n), 4.0 / 7.0);
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double mean = sum[k] / used;
    double ss = 0.0;
    for (const auto& res : results)
      if (res)
        ss += ((*res)[k] - mean) * ((*res)[k] - mean);
    report.empirical.push_back(scale * ss / (used - 1.0));
  }
  report.asymptotic = asymptotic_variances(config, t_values, h, options.phi, options.threads);
  return report;
}

} // namespace incubation
