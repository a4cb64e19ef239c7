#pragma once

#include "distribution.hpp"
#include "error.hpp"
#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace incubation {

enum class EstimateKind
{
  cdf,
  density
};

struct SmoothEstimate
{
  std::vector<double> eval_grid;
  std::vector<double> values;
  EstimateKind kind = EstimateKind::cdf;
  double bandwidth = 0.0;
  //! FNV-1a digest of the source distribution's support and masses.
  std::uint64_t source = 0;
};

inline std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 1469598103934665603ULL)
{
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t digest(const DiscreteDistribution& dist)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    h = fnv1a(&dist.support()[k], sizeof(double), h);
    h = fnv1a(&dist.masses()[k], sizeof(double), h);
  }
  return h;
}

//! Points lo, lo+step, ..., up to hi inclusive (within half a step).
inline std::vector<double> uniform_grid(double lo, double hi, double step)
{
  if (!(step > 0.0) || !(hi >= lo))
    throw ValidationError("grid needs step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5));
  std::vector<double> g;
  g.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    g.push_back(lo + static_cast<double>(k) * step);
  return g;
}

//! Smoothed MLE of the distribution function at t.
inline double smle_at(const DiscreteDistribution& dist, double h, double t)
{
  double acc = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k)
    acc += dist.masses()[k] * kernel_integral((t - dist.support()[k]) / h);
  return acc;
}

//! Kernel density estimate at t built on a discrete distribution.
inline double density_at(const DiscreteDistribution& dist, double h, double t)
{
  double acc = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k)
    acc += dist.masses()[k] * kernel((t - dist.support()[k]) / h);
  return acc / h;
}

inline SmoothEstimate smle(const DiscreteDistribution& dist, double h, std::span<const double> grid)
{
  KernelSpec{ KernelFamily::triweight, h }.validate();
  SmoothEstimate out{ { grid.begin(), grid.end() }, {}, EstimateKind::cdf, h, digest(dist) };
  out.values.reserve(grid.size());
  for (double t : grid)
    out.values.push_back(std::min(smle_at(dist, h, t), 1.0));
  return out;
}

inline SmoothEstimate density(const DiscreteDistribution& dist, double h, std::span<const double> grid)
{
  KernelSpec{ KernelFamily::triweight, h }.validate();
  SmoothEstimate out{ { grid.begin(), grid.end() }, {}, EstimateKind::density, h, digest(dist) };
  out.values.reserve(grid.size());
  for (double t : grid)
    out.values.push_back(density_at(dist, h, t));
  return out;
}

} // namespace incubation
