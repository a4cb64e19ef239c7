#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace incubation {

struct PatternSearchConfig
{
  std::vector<double> init;
  //! One step per coordinate.
  std::vector<double> initial_step;
  double shrink_factor = 0.5;
  double min_step = 1e-8;
  std::size_t max_evals = 100000;

  void validate() const
  {
    if (init.empty())
      throw ValidationError("pattern search needs a starting point");
    if (initial_step.size() != init.size())
      throw ValidationError("one initial step per coordinate is required");
    for (double s : initial_step) {
      if (!(s > 0.0))
        throw ValidationError("initial steps must be positive");
    }
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
      throw ValidationError("shrink factor must lie in (0, 1)");
    if (!(min_step > 0.0))
      throw ValidationError("minimum step must be positive");
  }
};

struct PatternSearchResult
{
  std::vector<double> argmax;
  double value = 0.0;
  std::size_t evals = 0;
  //! False when the evaluation budget ran out before the steps shrank
  //! below `min_step`.
  bool converged = false;
};

//! Hooke-Jeeves pattern search, maximizing `objective`. Points where the
//! objective is not finite (e.g. outside a feasible region) are treated as
//! -inf and never accepted.
template <class Objective>
PatternSearchResult hooke_jeeves(Objective&& objective, const PatternSearchConfig& config)
{
  config.validate();
  const std::size_t dim = config.init.size();
  std::size_t evals = 0;
  bool budget_hit = false;

  auto eval = [&](const std::vector<double>& x) {
    if (evals >= config.max_evals) {
      budget_hit = true;
      return -std::numeric_limits<double>::infinity();
    }
    ++evals;
    const double v = objective(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  std::vector<double> step = config.initial_step;

  // coordinate-wise exploratory moves around x
  auto explore = [&](std::vector<double> x, double fx) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double origin = x[i];
      x[i] = origin + step[i];
      double f = eval(x);
      if (f > fx) {
        fx = f;
        continue;
      }
      x[i] = origin - step[i];
      f = eval(x);
      if (f > fx) {
        fx = f;
        continue;
      }
      x[i] = origin;
    }
    return std::make_pair(std::move(x), fx);
  };

  std::vector<double> base = config.init;
  double f_base = eval(base);
  if (!std::isfinite(f_base))
    throw ValidationError("objective is not finite at the starting point");

  while (!budget_hit) {
    auto [x_new, f_new] = explore(base, f_base);
    if (f_new > f_base) {
      // pattern moves while they keep paying off
      while (!budget_hit) {
        std::vector<double> pattern(dim);
        for (std::size_t i = 0; i < dim; ++i)
          pattern[i] = 2.0 * x_new[i] - base[i];
        base = x_new;
        f_base = f_new;
        const double f_pattern = eval(pattern);
        auto [x_try, f_try] = explore(pattern, f_pattern);
        if (f_try > f_base) {
          x_new = std::move(x_try);
          f_new = f_try;
        } else {
          break;
        }
      }
      continue;
    }
    const bool small = std::all_of(step.begin(), step.end(), [&](double s) { return s < config.min_step; });
    if (small)
      break;
    for (auto& s : step)
      s *= config.shrink_factor;
  }
  return PatternSearchResult{ std::move(base), f_base, evals, !budget_hit };
}

} // namespace incubation
