#pragma once

#include "error.hpp"
#include "npmle.hpp"
#include "observation.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sampling.hpp"
#include "simulation.hpp"
#include "smooth.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace incubation {

//! Left-endpoint Riemann rule on [lo, hi) with a fixed step.
struct RiemannGrid
{
  double lo = 0.0;
  double hi = 14.0;
  double step = 0.1;

  std::vector<double> points() const
  {
    if (!(step > 0.0) || !(hi > lo))
      throw ValidationError("integration grid needs step > 0 and hi > lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5));
    std::vector<double> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
      pts.push_back(lo + static_cast<double>(k) * step);
    return pts;
  }
};

//! One smoothed-bootstrap sample: exits are kept, S* = V* + W* with
//! V* ~ Uniform(0, E) and W* from `reference`; delta* is computed from the
//! unrounded sum. Draws whose rounded S* is 0 are repeated.
inline ObservationSet bootstrap_resample(std::span<const double> exits,
                                         const RejectionSampler& reference,
                                         Rounding rounding,
                                         Rng& rng)
{
  if (exits.empty())
    throw ValidationError("no exit times to resample");
  const bool round = rounding == Rounding::round_to_day;
  std::vector<Observation> records;
  records.reserve(exits.size());
  for (double e : exits) {
    if (!(e > 0.0))
      throw ValidationError("exit times must be positive");
    if (round && std::floor(e) != e)
      throw ValidationError("day rounding requires integer exit times");
    while (true) {
      const double v = e * rng.uniform();
      const double w = reference(rng);
      const double sum = v + w;
      const double s = round ? std::round(sum) : sum;
      if (!(s > 0.0))
        continue;
      records.emplace_back(e, s, sum <= e);
      break;
    }
  }
  return ObservationSet(std::move(records), round ? TimeScale::discrete_days : TimeScale::continuous);
}

enum class BandwidthTarget
{
  density,
  cdf
};

inline std::vector<double> default_bandwidth_grid()
{
  return uniform_grid(2.0, 7.0, 0.2);
}

struct BandwidthOptions
{
  BandwidthTarget target = BandwidthTarget::density;
  std::vector<double> h_grid = default_bandwidth_grid();
  double h0 = 4.0;
  std::size_t B = 1000;
  std::uint64_t seed = 1;
  Rounding rounding = Rounding::round_to_day;
  RiemannGrid integration{};
  unsigned threads = 1;
  IcmOptions fit{};
};

struct BandwidthCurve
{
  std::vector<double> h_values;
  std::vector<double> mse;
  BandwidthTarget target = BandwidthTarget::density;
  std::size_t B = 0;
  std::size_t used = 0;
  std::size_t dropped = 0;
  double h0 = 0.0;
  double minimizer = 0.0;
};

namespace detail {

inline std::vector<double> estimate_on(const DiscreteDistribution& dist,
                                       BandwidthTarget target,
                                       double h,
                                       std::span<const double> pts)
{
  std::vector<double> out;
  out.reserve(pts.size());
  for (double t : pts)
    out.push_back(target == BandwidthTarget::density ? density_at(dist, h, t) : smle_at(dist, h, t));
  return out;
}

inline double integrated_squared_difference(std::span<const double> a, std::span<const double> b, double step)
{
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc * step;
}

inline std::size_t argmin(std::span<const double> v)
{
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

} // namespace detail

//! Smoothed bootstrap for the bandwidth of the density estimate or the
//! SMLE. Replicate r draws from its own RNG stream, so replicates can be
//! evaluated in any order or in parallel.
class SmoothedBootstrap
{
public:
  SmoothedBootstrap(const ObservationSet& sample, BandwidthOptions options)
    : options_(std::move(options))
    , exits_(sample.exit_times())
    , points_(options_.integration.points())
    , original_(fit_npmle(sample, options_.fit))
    , sampler_(density_sampler(original_.distribution, options_.h0))
  {
    if (options_.h_grid.empty())
      throw ValidationError("bandwidth grid is empty");
    for (double h : options_.h_grid)
      KernelSpec{ KernelFamily::triweight, h }.validate();
    if (options_.B < 1)
      throw ValidationError("need at least one bootstrap replicate");
    if (!original_.converged)
      throw NumericError("NPMLE of the original sample did not converge: " + original_.message);
    reference_ = detail::estimate_on(original_.distribution, options_.target, options_.h0, points_);
  }

  const FitResult& original_fit() const noexcept { return original_; }
  const RejectionSampler& sampler() const noexcept { return sampler_; }
  const std::vector<double>& exits() const noexcept { return exits_; }

  ObservationSet resample(std::size_t r) const
  {
    Rng rng = replicate_stream(options_.seed, r);
    return bootstrap_resample(exits_, sampler_, options_.rounding, rng);
  }

  //! Integrated squared error per bandwidth for replicate r, or nothing when
  //! the replicate's NPMLE fails to converge.
  std::optional<std::vector<double>> replicate(std::size_t r) const
  {
    const auto fit = fit_npmle(resample(r), options_.fit);
    if (!fit.converged)
      return std::nullopt;
    std::vector<double> ise;
    ise.reserve(options_.h_grid.size());
    for (double h : options_.h_grid) {
      const auto est = detail::estimate_on(fit.distribution, options_.target, h, points_);
      ise.push_back(detail::integrated_squared_difference(est, reference_, options_.integration.step));
    }
    return ise;
  }

  BandwidthCurve run() const
  {
    std::vector<std::optional<std::vector<double>>> results(options_.B);
    parallel_for(options_.B, options_.threads, [&](std::size_t r) { results[r] = replicate(r); });

    BandwidthCurve curve;
    curve.h_values = options_.h_grid;
    curve.mse.assign(options_.h_grid.size(), 0.0);
    curve.target = options_.target;
    curve.B = options_.B;
    curve.h0 = options_.h0;
    for (const auto& res : results) {
      if (!res) {
        ++curve.dropped;
        continue;
      }
      ++curve.used;
      for (std::size_t k = 0; k < res->size(); ++k)
        curve.mse[k] += (*res)[k];
    }
    if (curve.used == 0)
      throw NumericError("every bootstrap replicate failed to converge");
    for (auto& v : curve.mse)
      v /= static_cast<double>(curve.used);
    curve.minimizer = curve.h_values[detail::argmin(curve.mse)];
    return curve;
  }

private:
  BandwidthOptions options_;
  std::vector<double> exits_;
  std::vector<double> points_;
  FitResult original_;
  RejectionSampler sampler_;
  std::vector<double> reference_;
};

//! Bandwidth minimizing the bootstrap MSE of the density estimate or the
//! SMLE against the reference estimate with bandwidth h0.
inline BandwidthCurve select_bandwidth(const ObservationSet& sample, const BandwidthOptions& options)
{
  return SmoothedBootstrap(sample, options).run();
}

namespace detail {

inline ObservationSet resample_with_replacement(const ObservationSet& sample, std::size_t size, Rng& rng)
{
  std::vector<Observation> records;
  records.reserve(size);
  for (std::size_t k = 0; k < size; ++k)
    records.push_back(sample[rng.index(sample.size())]);
  return ObservationSet(std::move(records), sample.scale());
}

} // namespace detail

struct SubsampleOptions
{
  std::size_t m = 50;
  std::vector<double> c_grid = uniform_grid(1.0, 20.0, 0.1);
  double h_ref = 3.0;
  std::size_t B = 1000;
  std::uint64_t seed = 1;
  //! Defaults to [0, last support point + largest bandwidth) with step 0.1.
  std::optional<RiemannGrid> integration;
  unsigned threads = 1;
  IcmOptions fit{};
};

struct SubsampleResult
{
  std::vector<double> c_values;
  std::vector<double> mse;
  double c_hat = 0.0;
  //! c_hat * n^{-1/7}
  double bandwidth = 0.0;
  std::size_t used = 0;
  std::size_t dropped = 0;
};

//! m-out-of-n bootstrap for the constant c in h = c n^{-1/7}: subsamples of
//! size m are smoothed with c m^{-1/7} and compared with the full-sample
//! density estimate at bandwidth h_ref.
inline SubsampleResult subsample_bandwidth(const ObservationSet& sample, const SubsampleOptions& options)
{
  if (options.m < 1 || options.m > sample.size())
    throw ValidationError("subsample size must satisfy 1 <= m <= n");
  if (options.c_grid.empty())
    throw ValidationError("constant grid is empty");
  if (options.B < 1)
    throw ValidationError("need at least one bootstrap replicate");
  const double m_scale = std::pow(static_cast<double>(options.m), -1.0 / 7.0);
  const double n_scale = std::pow(static_cast<double>(sample.size()), -1.0 / 7.0);

  SubsampleResult out;
  out.c_values = options.c_grid;
  if (options.c_grid.size() == 1) {
    out.mse = { 0.0 };
    out.c_hat = options.c_grid.front();
    out.bandwidth = out.c_hat * n_scale;
    return out;
  }

  const auto full = fit_npmle(sample, options.fit);
  if (!full.converged)
    throw NumericError("NPMLE of the original sample did not converge: " + full.message);
  const double c_max = *std::max_element(options.c_grid.begin(), options.c_grid.end());
  const RiemannGrid grid = options.integration.value_or(
    RiemannGrid{ 0.0, full.distribution.support().back() + std::max(c_max * m_scale, options.h_ref), 0.1 });
  const auto pts = grid.points();
  const auto reference = detail::estimate_on(full.distribution, BandwidthTarget::density, options.h_ref, pts);

  std::vector<std::optional<std::vector<double>>> results(options.B);
  parallel_for(options.B, options.threads, [&](std::size_t r) {
    Rng rng = replicate_stream(options.seed, r);
    const auto fit = fit_npmle(detail::resample_with_replacement(sample, options.m, rng), options.fit);
    if (!fit.converged)
      return;
    std::vector<double> ise;
    ise.reserve(options.c_grid.size());
    for (double c : options.c_grid) {
      const auto est = detail::estimate_on(fit.distribution, BandwidthTarget::density, c * m_scale, pts);
      ise.push_back(detail::integrated_squared_difference(est, reference, grid.step));
    }
    results[r] = std::move(ise);
  });

  out.mse.assign(options.c_grid.size(), 0.0);
  for (const auto& res : results) {
    if (!res) {
      ++out.dropped;
      continue;
    }
    ++out.used;
    for (std::size_t k = 0; k < res->size(); ++k)
      out.mse[k] += (*res)[k];
  }
  if (out.used == 0)
    throw NumericError("every bootstrap replicate failed to converge");
  for (auto& v : out.mse)
    v /= static_cast<double>(out.used);
  out.c_hat = out.c_values[detail::argmin(out.mse)];
  out.bandwidth = out.c_hat * n_scale;
  return out;
}

struct ConfidenceBand
{
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> estimate;
  std::vector<double> upper;
  double level = 0.95;
  std::size_t B = 0;
  std::size_t used = 0;
  std::size_t dropped = 0;
};

//! Order-statistic indices (0-based) of the percentile band from `count`
//! sorted replicate values.
inline std::pair<std::size_t, std::size_t> percentile_indices(std::size_t count, double level)
{
  const double alpha = 1.0 - level;
  const double n = static_cast<double>(count);
  auto lo = static_cast<std::size_t>(std::floor(alpha / 2.0 * n + 1e-9));
  auto hi_rank = static_cast<std::size_t>(std::ceil((1.0 - alpha / 2.0) * n - 1e-9));
  lo = std::min(lo, count - 1);
  const std::size_t hi = std::clamp<std::size_t>(hi_rank, 1, count) - 1;
  return { lo, hi };
}

//! Pointwise percentile intervals for the density from resampling the
//! observed triples with replacement.
inline ConfidenceBand bootstrap_ci_density(const ObservationSet& sample,
                                           double h,
                                           std::span<const double> grid,
                                           std::size_t B,
                                           double level,
                                           std::uint64_t seed,
                                           unsigned threads = 1,
                                           const IcmOptions& fit_options = {})
{
  KernelSpec{ KernelFamily::triweight, h }.validate();
  if (B < 2)
    throw ValidationError("confidence band needs at least two replicates");
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("level must lie in (0, 1)");
  if (grid.empty())
    throw ValidationError("evaluation grid is empty");

  const auto original = fit_npmle(sample, fit_options);
  if (!original.converged)
    throw NumericError("NPMLE of the original sample did not converge: " + original.message);

  std::vector<std::optional<std::vector<double>>> results(B);
  parallel_for(B, threads, [&](std::size_t r) {
    Rng rng = replicate_stream(seed, r);
    const auto fit = fit_npmle(detail::resample_with_replacement(sample, sample.size(), rng), fit_options);
    if (fit.converged)
      results[r] = detail::estimate_on(fit.distribution, BandwidthTarget::density, h, grid);
  });

  ConfidenceBand band;
  band.grid.assign(grid.begin(), grid.end());
  band.estimate = detail::estimate_on(original.distribution, BandwidthTarget::density, h, grid);
  band.level = level;
  band.B = B;
  std::vector<const std::vector<double>*> kept;
  for (const auto& res : results) {
    if (res)
      kept.push_back(&*res);
    else
      ++band.dropped;
  }
  band.used = kept.size();
  if (band.used < 2)
    throw NumericError("fewer than two bootstrap replicates converged");

  const auto [lo, hi] = percentile_indices(band.used, level);
  std::vector<double> column(band.used);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t r = 0; r < band.used; ++r)
      column[r] = (*kept[r])[k];
    std::sort(column.begin(), column.end());
    band.lower.push_back(column[lo]);
    band.upper.push_back(column[hi]);
  }
  return band;
}

} // namespace incubation
