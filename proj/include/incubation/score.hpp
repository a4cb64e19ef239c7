#pragma once

#include "error.hpp"
#include "kernel.hpp"
#include "sampling.hpp"
#include "weibull.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace incubation {

using CdfFunction = std::function<double(double)>;

//! Exit times uniform on [0, M], infection uniform on [0, E], incubation
//! law G with G(M1) = 1.
struct ScoreModel
{
  CdfFunction G;
  double M = 30.0;
  double M1 = 20.0;

  void validate() const
  {
    if (!G)
      throw ValidationError("score model needs a distribution function");
    if (!(M1 > 0.0) || !(M1 <= M) || !std::isfinite(M))
      throw ValidationError("score model needs 0 < M1 <= M");
  }
};

inline ScoreModel truncated_weibull_model(const WeibullParams& params, double M = 30.0, double M1 = 20.0)
{
  params.validate();
  ScoreModel model{ [params, M1](double x) { return x <= 0.0 ? 0.0 : truncated_weibull_cdf(params, M1, x); },
                    M,
                    M1 };
  model.validate();
  return model;
}

enum class PhiSolver
{
  direct,
  fixed_point
};

struct PhiOptions
{
  double step = 0.05;
  PhiSolver solver = PhiSolver::direct;
  //! Relaxation weight of the fixed-point (Jacobi) iteration.
  double damping = 0.5;
  std::size_t max_iter = 100000;
  //! Fixed-point iterations stop once the componentwise backward error
  //! drops below this.
  double tol = 1e-13;
  //! Multiplier on the right-hand side K_h'(w - t).
  double rhs_scale = 1.0;
  //! G differences at or below this count as zero (0/0 = 0).
  double zero_gap = 1e-14;
};

//! phi on the grid 0, step, ..., M together with the setting it solves.
struct ScoreSolution
{
  std::vector<double> grid;
  std::vector<double> phi;
  double t = 0.0;
  double h = 0.0;
  double step = 0.0;
  ScoreModel model;
  double zero_gap = 1e-14;
  //! Componentwise backward error of the discretized equation.
  double residual = 0.0;
  std::size_t iterations = 0;
  PhiSolver solver = PhiSolver::direct;

  //! Linear interpolation; zero outside [0, M1).
  double phi_at(double w) const
  {
    if (!(w > 0.0) || w >= model.M1)
      return 0.0;
    const double x = w / step;
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= phi.size())
      return phi.back();
    const double frac = x - static_cast<double>(k);
    return phi[k] + frac * (phi[k + 1] - phi[k]);
  }
};

namespace detail {

struct PhiSystem
{
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::size_t N = 0; //!< grid cells on [0, M]
  std::size_t K = 0; //!< grid cells on [0, M1]
};

inline std::size_t grid_cells(double length, double step, const char* what)
{
  const double x = length / step;
  const double r = std::round(x);
  if (!(r >= 2.0) || std::abs(x - r) > 1e-9 * std::max(1.0, x))
    throw ValidationError(std::string(what) + " must be an integer multiple (>= 2) of the grid step");
  return static_cast<std::size_t>(r);
}

//! G on 0, step, ..., 2M after checking it is a distribution function
//! with G(M1) = 1.
inline std::vector<double> tabulate_cdf(const ScoreModel& model, double step, std::size_t N)
{
  std::vector<double> g(2 * N + 1);
  double prev = 0.0;
  for (std::size_t j = 0; j <= 2 * N; ++j) {
    const double v = model.G(static_cast<double>(j) * step);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0 + 1e-12)
      throw ValidationError("G must take values in [0, 1]");
    if (v < prev - 1e-12)
      throw ValidationError("G must be nondecreasing");
    g[j] = std::min(std::max(v, prev), 1.0);
    prev = g[j];
  }
  if (std::abs(model.G(model.M1) - 1.0) > 1e-12)
    throw ValidationError("G must reach 1 at M1");
  return g;
}

//! Discretized integral equation in the unknowns phi_1, ..., phi_{K-1}
//! (phi_0 = 0 and phi_j = 0 for j >= K), one row per interior node w_k:
//!   -phi_k log(M/w_k) / (M G_k)
//!   + (1/M) sum_{l=1}^{N} (step/e_l) (phi_{k+l} - phi_k) / (G_{k+l} - G_k)
//!   - (1/M) sum_{l=1}^{k} (step/e_l) (phi_k - phi_{k-l}) / (G_k - G_{k-l})
//!   = rhs_scale * K_h'(w_k - t).
inline PhiSystem assemble_phi_system(const std::vector<double>& g,
                                     std::size_t N,
                                     std::size_t K,
                                     double step,
                                     double M,
                                     double t,
                                     double h,
                                     const PhiOptions& options)
{
  const std::size_t n = K - 1;
  PhiSystem sys{ Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)),
                 N,
                 K };
  auto add = [&](std::size_t row, std::size_t j, double c) {
    if (j >= 1 && j < K)
      sys.A(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j - 1)) += c;
  };
  for (std::size_t k = 1; k < K; ++k) {
    const std::size_t row = k - 1;
    const double w = static_cast<double>(k) * step;
    if (g[k] > options.zero_gap)
      add(row, k, -std::log(M / w) / (M * g[k]));
    for (std::size_t l = 1; l <= N; ++l) {
      const double dg = g[k + l] - g[k];
      if (dg > options.zero_gap) {
        const double c = 1.0 / (M * static_cast<double>(l) * dg);
        add(row, k + l, c);
        add(row, k, -c);
      }
    }
    for (std::size_t l = 1; l <= k; ++l) {
      const double dg = g[k] - g[k - l];
      if (dg > options.zero_gap) {
        const double c = 1.0 / (M * static_cast<double>(l) * dg);
        add(row, k, -c);
        add(row, k - l, c);
      }
    }
    sys.b(static_cast<Eigen::Index>(row)) = options.rhs_scale * scaled_kernel_derivative(w - t, h);
  }
  return sys;
}

//! max_k |A x - b|_k / (|A| |x| + |b|)_k, the Oettli-Prager backward error.
inline double backward_error(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x)
{
  const Eigen::VectorXd r = A * x - b;
  const Eigen::VectorXd scale = A.cwiseAbs() * x.cwiseAbs() + b.cwiseAbs();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    if (scale(k) > 0.0)
      worst = std::max(worst, std::abs(r(k)) / scale(k));
    else if (r(k) != 0.0)
      return std::numeric_limits<double>::infinity();
  }
  return worst;
}

} // namespace detail

//! Solves the integral equation for phi at target t and bandwidth h.
inline ScoreSolution solve_phi(const ScoreModel& model, double t, double h, const PhiOptions& options = {})
{
  model.validate();
  KernelSpec{ KernelFamily::triweight, h }.validate();
  if (!std::isfinite(t))
    throw ValidationError("target point must be finite");
  if (!(options.step > 0.0))
    throw ValidationError("grid step must be positive");
  if (options.solver == PhiSolver::fixed_point && !(options.damping > 0.0 && options.damping <= 1.0))
    throw ValidationError("damping must lie in (0, 1]");

  const std::size_t N = detail::grid_cells(model.M, options.step, "M");
  const std::size_t K = detail::grid_cells(model.M1, options.step, "M1");
  const auto g = detail::tabulate_cdf(model, options.step, N);
  const auto sys = detail::assemble_phi_system(g, N, K, options.step, model.M, t, h, options);

  Eigen::VectorXd x;
  std::size_t iterations = 0;
  if (options.solver == PhiSolver::direct) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.A);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
      throw NumericError("phi system is singular to working precision (rcond " + std::to_string(rcond) + ")");
    x = lu.solve(sys.b);
  } else {
    const Eigen::VectorXd diag = sys.A.diagonal();
    if ((diag.array() == 0.0).any())
      throw NumericError("phi system has a zero diagonal entry; use the direct solver");
    x = Eigen::VectorXd::Zero(sys.b.size());
    bool done = detail::backward_error(sys.A, sys.b, x) <= options.tol;
    while (!done && iterations < options.max_iter) {
      ++iterations;
      const Eigen::VectorXd r = sys.b - sys.A * x;
      x += options.damping * r.cwiseQuotient(diag);
      done = detail::backward_error(sys.A, sys.b, x) <= options.tol;
    }
    if (!done)
      throw NumericError("fixed-point iteration for phi did not converge");
  }
  if (!x.allFinite())
    throw NumericError("phi solution is not finite");

  ScoreSolution sol;
  sol.grid.reserve(N + 1);
  sol.phi.assign(N + 1, 0.0);
  for (std::size_t j = 0; j <= N; ++j)
    sol.grid.push_back(static_cast<double>(j) * options.step);
  for (std::size_t k = 1; k < K; ++k)
    sol.phi[k] = x(static_cast<Eigen::Index>(k - 1));
  sol.t = t;
  sol.h = h;
  sol.step = options.step;
  sol.model = model;
  sol.zero_gap = options.zero_gap;
  sol.residual = detail::backward_error(sys.A, sys.b, x);
  sol.iterations = iterations;
  sol.solver = options.solver;
  return sol;
}

//! Backward error of a stored solution against a freshly assembled system.
inline double phi_residual(const ScoreSolution& sol, double rhs_scale = 1.0)
{
  PhiOptions opts;
  opts.step = sol.step;
  opts.rhs_scale = rhs_scale;
  opts.zero_gap = sol.zero_gap;
  const std::size_t N = detail::grid_cells(sol.model.M, sol.step, "M");
  const std::size_t K = detail::grid_cells(sol.model.M1, sol.step, "M1");
  const auto g = detail::tabulate_cdf(sol.model, sol.step, N);
  const auto sys = detail::assemble_phi_system(g, N, K, sol.step, sol.model.M, sol.t, sol.h, opts);
  Eigen::VectorXd x(static_cast<Eigen::Index>(K - 1));
  for (std::size_t k = 1; k < K; ++k)
    x(static_cast<Eigen::Index>(k - 1)) = sol.phi[k];
  return detail::backward_error(sys.A, sys.b, x);
}

//! theta(e, s, delta) = delta phi(s)/G(s) + (1 - delta)(phi(s) - phi(s-e))/(G(s) - G(s-e)), 0/0 = 0.
inline double score_theta(double e, double s, bool delta, const ScoreSolution& sol)
{
  const auto& G = sol.model.G;
  if (delta) {
    const double gs = s > 0.0 ? G(s) : 0.0;
    return gs > sol.zero_gap ? sol.phi_at(s) / gs : 0.0;
  }
  const double lo = s - e;
  const double dg = (s > 0.0 ? G(s) : 0.0) - (lo > 0.0 ? G(lo) : 0.0);
  return dg > sol.zero_gap ? (sol.phi_at(s) - sol.phi_at(lo)) / dg : 0.0;
}

enum class ScoreRange
{
  //! s restricted to [0, M]
  observed,
  //! s up to e + M1, the full support of S given E = e
  full
};

namespace detail {

//! sum over the (e, s) grid of step^2 f(theta) p(e, s), where
//! p(e, s) = (G(s) - G(s - e)) / (M e) is the density of (E, S); e starts
//! at one step.
template <class F>
double score_moment(const ScoreSolution& sol, ScoreRange range, F f)
{
  const double d = sol.step;
  const std::size_t N = detail::grid_cells(sol.model.M, d, "M");
  const std::size_t K = detail::grid_cells(sol.model.M1, d, "M1");
  std::vector<double> g(2 * N + 1);
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = j == 0 ? 0.0 : sol.model.G(static_cast<double>(j) * d);
  auto phi = [&](std::size_t j) { return j < sol.phi.size() ? sol.phi[j] : 0.0; };

  double total = 0.0;
  for (std::size_t l = 1; l <= N; ++l) {
    const double e = static_cast<double>(l) * d;
    const std::size_t top = range == ScoreRange::observed ? N : l + K;
    double inner = 0.0;
    for (std::size_t j = 1; j <= top; ++j) {
      double theta = 0.0;
      double mass = 0.0;
      if (j <= l) {
        mass = g[j];
        theta = mass > sol.zero_gap ? phi(j) / mass : 0.0;
      } else {
        mass = g[j] - g[j - l];
        theta = mass > sol.zero_gap ? (phi(j) - phi(j - l)) / mass : 0.0;
      }
      inner += f(theta) * mass;
    }
    total += inner / (sol.model.M * e);
  }
  return total * d * d;
}

} // namespace detail

//! E theta by quadrature over the full support of (E, S).
inline double mean_theta(const ScoreSolution& sol)
{
  return detail::score_moment(sol, ScoreRange::full, [](double v) { return v; });
}

inline double expected_theta_squared(const ScoreSolution& sol, ScoreRange range = ScoreRange::observed)
{
  return detail::score_moment(sol, range, [](double v) { return v * v; });
}

//! n^{-3/7} E theta^2
inline double asymptotic_variance(const ScoreSolution& sol, double n, ScoreRange range = ScoreRange::observed)
{
  if (!(n >= 1.0))
    throw ValidationError("sample size must be at least 1");
  return std::pow(n, -3.0 / 7.0) * expected_theta_squared(sol, range);
}

//! E[theta | W = w] by midpoint quadrature over e in (0, M] and the
//! infection time v in (0, e], with the given number of cells per axis.
inline double conditional_mean_theta(const ScoreSolution& sol, double w, std::size_t cells = 400)
{
  const double M = sol.model.M;
  const double de = M / static_cast<double>(cells);
  double total = 0.0;
  for (std::size_t a = 0; a < cells; ++a) {
    const double e = (static_cast<double>(a) + 0.5) * de;
    const double dv = e / static_cast<double>(cells);
    double inner = 0.0;
    for (std::size_t b = 0; b < cells; ++b) {
      const double s = (static_cast<double>(b) + 0.5) * dv + w;
      inner += score_theta(e, s, s <= e, sol);
    }
    total += inner / static_cast<double>(cells);
  }
  return total * de / M;
}

} // namespace incubation
