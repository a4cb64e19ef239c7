#pragma once

#include "distribution.hpp"
#include "error.hpp"
#include "observation.hpp"
#include "reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace incubation {

namespace detail {

//! y_0 = 0, y_{m+1} = 1, interior values from the vector.
inline double cdf_value(std::span<const double> y, std::size_t idx) noexcept
{
  if (idx == 0)
    return 0.0;
  if (idx > y.size())
    return 1.0;
  return y[idx - 1];
}

inline void check_dimension(std::span<const double> y, const ReducedProblem& problem)
{
  if (y.size() != problem.interior_size())
    throw ValidationError("CDF vector has " + std::to_string(y.size()) + " entries, problem has " +
                          std::to_string(problem.interior_size()) + " interior points");
}

} // namespace detail

//! f(y) = sum N_ij log(y_j - y_i) with y_0 = 0 and y_{m+1} = 1; -inf when a
//! referenced increment is not positive.
inline double loglik(std::span<const double> y, const ReducedProblem& problem)
{
  detail::check_dimension(y, problem);
  double f = 0.0;
  for (const auto& c : problem.cells()) {
    const double d = detail::cdf_value(y, c.upper) - detail::cdf_value(y, c.lower);
    if (!(d > 0.0))
      return -std::numeric_limits<double>::infinity();
    f += static_cast<double>(c.count) * std::log(d);
  }
  return f;
}

//! Current ICM iterate with first derivatives and the diagonal weights
//! w_j = -d^2 f / dy_j^2.
struct IsotonicState
{
  std::vector<double> y;
  std::vector<double> gradient;
  std::vector<double> weights;
};

inline IsotonicState isotonic_state(std::span<const double> y, const ReducedProblem& problem)
{
  detail::check_dimension(y, problem);
  const std::size_t m = y.size();
  IsotonicState s{ std::vector<double>(y.begin(), y.end()),
                   std::vector<double>(m, 0.0),
                   std::vector<double>(m, 0.0) };
  for (const auto& c : problem.cells()) {
    const double d = detail::cdf_value(y, c.upper) - detail::cdf_value(y, c.lower);
    if (!(d > 0.0))
      throw NumericError("gradient undefined: nonpositive increment in a referenced cell");
    const double n = static_cast<double>(c.count);
    const double g = n / d;
    const double w = g / d;
    if (c.upper <= m) {
      s.gradient[c.upper - 1] += g;
      s.weights[c.upper - 1] += w;
    }
    if (c.lower >= 1) {
      s.gradient[c.lower - 1] -= g;
      s.weights[c.lower - 1] += w;
    }
  }
  return s;
}

struct DiagramPoint
{
  double x;
  double y;
};

//! Cusum diagram: (0,0) followed by the partial sums of
//! (w_j, df/dy_j + w_j y_j).
inline std::vector<DiagramPoint> cusum_diagram(const IsotonicState& state)
{
  const std::size_t m = state.y.size();
  std::vector<DiagramPoint> pts;
  pts.reserve(m + 1);
  pts.push_back({ 0.0, 0.0 });
  for (std::size_t j = 0; j < m; ++j) {
    if (!(state.weights[j] > 0.0))
      throw NumericError("nonpositive weight at interior index " + std::to_string(j + 1));
    const auto& prev = pts.back();
    pts.push_back({ prev.x + state.weights[j],
                    prev.y + state.gradient[j] + state.weights[j] * state.y[j] });
  }
  return pts;
}

//! Left derivatives of the greatest convex minorant of a diagram with
//! strictly increasing abscissae, evaluated at points 1..m.
inline std::vector<double> gcm_left_derivatives(std::span<const DiagramPoint> points)
{
  if (points.size() < 2)
    return {};
  // lower convex hull by a monotone chain
  std::vector<std::size_t> hull;
  hull.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    while (hull.size() >= 2) {
      const auto& o = points[hull[hull.size() - 2]];
      const auto& a = points[hull.back()];
      const auto& b = points[k];
      const double cross = (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
      if (cross > 0.0)
        break;
      hull.pop_back();
    }
    hull.push_back(k);
  }

  std::vector<double> deriv(points.size() - 1);
  for (std::size_t q = 1; q < hull.size(); ++q) {
    const auto& a = points[hull[q - 1]];
    const auto& b = points[hull[q]];
    const double slope = (b.y - a.y) / (b.x - a.x);
    for (std::size_t k = hull[q - 1] + 1; k <= hull[q]; ++k)
      deriv[k - 1] = slope;
  }
  return deriv;
}

struct FenchelDiagnostics
{
  double max_violation = 0.0;
  double equality_gap = 0.0;
};

//! Optimality conditions on the cone 0 <= y_1 <= ... <= y_m: every
//! upper-tail gradient sum must be <= 0, every lower-tail sum >= 0, and
//! sum_j y_j df/dy_j = 0.
inline FenchelDiagnostics check_fenchel(std::span<const double> y, const ReducedProblem& problem)
{
  detail::check_dimension(y, problem);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!std::isfinite(loglik(y, problem)))
    return { inf, inf };
  const auto state = isotonic_state(y, problem);
  const auto& g = state.gradient;
  const std::size_t m = g.size();

  FenchelDiagnostics out;
  double tail = 0.0;
  for (std::size_t k = m; k-- > 0;) {
    tail += g[k];
    out.max_violation = std::max(out.max_violation, tail);
  }
  double head = 0.0;
  double inner = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    head += g[k];
    out.max_violation = std::max(out.max_violation, -head);
    inner += y[k] * g[k];
  }
  out.equality_gap = std::abs(inner);
  return out;
}

//! One self-consistency (EM) update of the m+1 cell masses. A cell whose
//! covered mass is zero contributes nothing (0/0 = 0).
inline std::vector<double> em_step(std::span<const double> p, const ReducedProblem& problem)
{
  const std::size_t cells = problem.cell_count();
  if (p.size() != cells)
    throw ValidationError("mass vector must have one entry per cell");

  // diff[k] accumulates N / (covered mass) over observations covering cell k
  std::vector<double> diff(cells + 1, 0.0);
  for (const auto& c : problem.cells()) {
    double covered = 0.0;
    for (std::size_t k = c.lower; k < c.upper; ++k)
      covered += p[k];
    if (covered > 0.0) {
      const double v = static_cast<double>(c.count) / covered;
      diff[c.lower] += v;
      diff[c.upper] -= v;
    }
  }
  const double n = static_cast<double>(problem.total_count());
  const double uninformative = static_cast<double>(problem.uninformative());
  std::vector<double> next(cells);
  double run = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    run += diff[k];
    //! cancellation in the prefix sum can leave uncovered cells at -eps
    next[k] = p[k] * std::max(0.0, run + uninformative) / n;
  }
  return next;
}

//! Outcome of an NPMLE computation.
struct FitResult
{
  DiscreteDistribution distribution;
  //! CDF values at the interior grid points of the fitted problem.
  std::vector<double> cdf_values;
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  FenchelDiagnostics fenchel;
  std::string algorithm;
  std::string message;
};

namespace detail {

inline std::vector<double> cumulative_interior(std::span<const double> masses)
{
  std::vector<double> y;
  y.reserve(masses.size() - 1);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < masses.size(); ++k) {
    acc += masses[k];
    y.push_back(std::min(acc, 1.0));
  }
  return y;
}

inline std::vector<double> masses_from_cdf(std::span<const double> y)
{
  std::vector<double> p;
  p.reserve(y.size() + 1);
  double prev = 0.0;
  for (double v : y) {
    p.push_back(std::max(v - prev, 0.0));
    prev = v;
  }
  p.push_back(std::max(1.0 - prev, 0.0));
  return p;
}

} // namespace detail

struct EmOptions
{
  //! Starting masses, one per cell; uniform when absent.
  std::optional<std::vector<double>> init;
  std::size_t max_iter = 100000;
  //! Stop when the largest change of a mass falls below this.
  double tol = 1e-10;
};

inline FitResult em_fit(const ReducedProblem& problem, const EmOptions& options = {})
{
  const std::size_t cells = problem.cell_count();
  std::vector<double> p;
  if (options.init) {
    p = *options.init;
    if (p.size() != cells)
      throw ValidationError("EM initial masses must have one entry per cell");
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0))
        throw ValidationError("EM initial masses must be nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError("EM initial masses must sum to 1");
  } else {
    p.assign(cells, 1.0 / static_cast<double>(cells));
  }

  std::size_t iter = 0;
  bool converged = false;
  while (iter < options.max_iter) {
    auto next = em_step(p, problem);
    double change = 0.0;
    for (std::size_t k = 0; k < cells; ++k)
      change = std::max(change, std::abs(next[k] - p[k]));
    p = std::move(next);
    ++iter;
    if (change < options.tol) {
      converged = true;
      break;
    }
  }

  auto y = detail::cumulative_interior(p);
  const double f = loglik(y, problem);
  const auto fenchel = check_fenchel(y, problem);
  return FitResult{ DiscreteDistribution(problem.mass_points(), std::move(p)),
                    std::move(y),
                    f,
                    iter,
                    converged,
                    fenchel,
                    "em",
                    converged ? "mass change below tolerance" : "iteration limit reached" };
}

struct IcmOptions
{
  //! Starting CDF values strictly inside the cone; y_j = j/(m+1) when absent.
  std::optional<std::vector<double>> init;
  std::size_t max_iter = 10000;
  //! Fenchel tolerance per observation on both the cumulative-gradient
  //! conditions and the equality condition; gradient sums grow with the
  //! sample size, so the bound applied is tol * n.
  double tol = 1e-10;
  //! Smallest line-search fraction tried before giving up.
  double min_step = 1e-10;
  //! Referenced increments y_j - y_i are kept at or above this.
  double min_increment = 1e-12;
};

namespace detail {

//! f(y + lambda d) - f(y), evaluated term by term through log1p so that
//! tiny improvements near the optimum are not lost to cancellation.
inline double loglik_gain(std::span<const double> y,
                          std::span<const double> dir,
                          double lambda,
                          const ReducedProblem& problem,
                          double min_increment)
{
  double gain = 0.0;
  for (const auto& c : problem.cells()) {
    const double base = cdf_value(y, c.upper) - cdf_value(y, c.lower);
    const double du = c.upper <= dir.size() ? dir[c.upper - 1] : 0.0;
    const double dl = c.lower >= 1 ? dir[c.lower - 1] : 0.0;
    const double step = lambda * (du - dl);
    if (!(base + step >= min_increment))
      return -std::numeric_limits<double>::infinity();
    gain += static_cast<double>(c.count) * std::log1p(step / base);
  }
  return gain;
}

inline FitResult icm_fit_referenced(const ReducedProblem& problem, const IcmOptions& options)
{
  const std::size_t m = problem.interior_size();
  std::vector<double> y;
  if (options.init) {
    y = *options.init;
    detail::check_dimension(y, problem);
    for (std::size_t k = 0; k < m; ++k) {
      const bool ordered = k == 0 || y[k - 1] <= y[k];
      if (!(y[k] > 0.0 && y[k] < 1.0 && ordered))
        throw ValidationError("ICM start must satisfy 0 < y_1 <= ... <= y_m < 1");
    }
  } else {
    for (std::size_t k = 1; k <= m; ++k)
      y.push_back(static_cast<double>(k) / static_cast<double>(m + 1));
  }
  if (!std::isfinite(loglik(y, problem)))
    throw ValidationError("ICM start has -inf log-likelihood");

  constexpr double armijo = 1e-4;
  std::size_t iter = 0;
  bool converged = false;
  std::string message = "iteration limit reached";
  FenchelDiagnostics fenchel = check_fenchel(y, problem);
  const double bound = options.tol * std::max<double>(1.0, static_cast<double>(problem.total_count()));
  std::vector<double> dir(m);

  while (true) {
    if (fenchel.max_violation <= bound && fenchel.equality_gap <= bound) {
      converged = true;
      message = "Fenchel conditions satisfied";
      break;
    }
    if (iter >= options.max_iter)
      break;
    ++iter;

    const auto state = isotonic_state(y, problem);
    const auto diagram = cusum_diagram(state);
    auto target = gcm_left_derivatives(diagram);
    double slope = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      target[k] = std::clamp(target[k], 0.0, 1.0);
      dir[k] = target[k] - y[k];
      slope += state.gradient[k] * dir[k];
    }
    if (!(slope > 0.0)) {
      message = "stationary point reached before the Fenchel tolerance";
      break;
    }

    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= options.min_step) {
      const double gain = loglik_gain(y, dir, lambda, problem, options.min_increment);
      if (std::isfinite(gain) && gain >= armijo * lambda * slope) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      message = "line search failed";
      break;
    }
    for (std::size_t k = 0; k < m; ++k)
      y[k] += lambda * dir[k];
    // restore monotonicity lost to rounding in the convex combination
    for (std::size_t k = 1; k < m; ++k)
      y[k] = std::max(y[k], y[k - 1]);
    fenchel = check_fenchel(y, problem);
  }

  const double f = loglik(y, problem);
  return FitResult{ DiscreteDistribution(problem.mass_points(), masses_from_cdf(y)),
                    y,
                    f,
                    iter,
                    converged,
                    fenchel,
                    "icm",
                    message };
}

} // namespace detail

//! Iterative convex minorant algorithm with backtracking line search.
//! Interior points that no informative cell references carry no weight;
//! they are removed before iterating and receive the CDF value of the
//! nearest kept point to their left.
inline FitResult icm_fit(const ReducedProblem& problem, const IcmOptions& options = {})
{
  const std::size_t m = problem.interior_size();
  if (m == 0) {
    return FitResult{ DiscreteDistribution({ problem.upper_edge() }, { 1.0 }),
                      {},
                      loglik(std::span<const double>{}, problem),
                      0,
                      true,
                      {},
                      "icm",
                      "single cell" };
  }

  const auto ref = problem.referenced();
  if (std::all_of(ref.begin(), ref.end(), [](bool b) { return b; }))
    return detail::icm_fit_referenced(problem, options);

  std::vector<std::size_t> kept;
  const auto compact = problem.without_unreferenced(kept);
  IcmOptions inner = options;
  if (options.init) {
    detail::check_dimension(*options.init, problem);
    std::vector<double> init;
    for (std::size_t j : kept)
      init.push_back((*options.init)[j - 1]);
    inner.init = std::move(init);
  }
  auto fit = icm_fit(compact, inner);

  std::vector<double> y(m, 0.0);
  std::size_t next = 0;
  double last = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    if (next < kept.size() && kept[next] == j)
      last = fit.cdf_values[next++];
    y[j - 1] = last;
  }
  fit.fenchel = check_fenchel(y, problem);
  fit.loglik = loglik(y, problem);
  fit.distribution = DiscreteDistribution(problem.mass_points(), detail::masses_from_cdf(y));
  fit.cdf_values = std::move(y);
  return fit;
}

//! NPMLE of a sample: preliminary reduction followed by ICM.
inline FitResult fit_npmle(const ObservationSet& sample, const IcmOptions& options = {})
{
  return icm_fit(reduce(sample), options);
}

//! CDF of a fitted distribution at the interior points of a problem.
inline std::vector<double> cdf_on_grid(const DiscreteDistribution& dist, const ReducedProblem& problem)
{
  std::vector<double> y;
  y.reserve(problem.interior_size());
  for (double x : problem.grid())
    y.push_back(dist.cdf(x));
  return y;
}

} // namespace incubation
