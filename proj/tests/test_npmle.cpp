#include <incubation/npmle.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace incubation;
using incubation::test::random_day_sample;
using incubation::test::reference_masses;
using incubation::test::wuhan;

namespace {

//! Pointwise maximum over every convex chain through a subset of the points
//! (first and last always included) that stays below all points; returns
//! the left derivatives of that maximal chain.
std::vector<double> brute_force_gcm(const std::vector<DiagramPoint>& pts)
{
  const std::size_t n = pts.size();
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  const std::size_t inner = n - 2;
  for (std::size_t mask = 0; mask < (std::size_t{ 1 } << inner); ++mask) {
    std::vector<std::size_t> chain{ 0 };
    for (std::size_t k = 0; k < inner; ++k)
      if (mask & (std::size_t{ 1 } << k))
        chain.push_back(k + 1);
    chain.push_back(n - 1);

    bool convex = true;
    for (std::size_t q = 2; q < chain.size() && convex; ++q) {
      const auto& a = pts[chain[q - 2]];
      const auto& b = pts[chain[q - 1]];
      const auto& c = pts[chain[q]];
      convex = (b.y - a.y) / (b.x - a.x) <= (c.y - b.y) / (c.x - b.x) + 1e-12;
    }
    if (!convex)
      continue;

    std::vector<double> value(n);
    bool below = true;
    for (std::size_t q = 1; q < chain.size(); ++q) {
      const auto& a = pts[chain[q - 1]];
      const auto& b = pts[chain[q]];
      for (std::size_t k = chain[q - 1]; k <= chain[q]; ++k) {
        value[k] = a.y + (b.y - a.y) * (pts[k].x - a.x) / (b.x - a.x);
        below = below && value[k] <= pts[k].y + 1e-12;
      }
    }
    if (!below)
      continue;
    for (std::size_t k = 0; k < n; ++k)
      best[k] = std::max(best[k], value[k]);
  }
  std::vector<double> deriv;
  for (std::size_t k = 1; k < n; ++k)
    deriv.push_back((best[k] - best[k - 1]) / (pts[k].x - pts[k - 1].x));
  return deriv;
}

std::vector<double> cumulative(const std::vector<double>& masses)
{
  std::vector<double> y;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < masses.size(); ++k) {
    acc += masses[k];
    y.push_back(acc);
  }
  return y;
}

//! A reduced problem with every interior point referenced, so the cone is
//! the full parameter space of both algorithms.
ReducedProblem random_problem(Rng& rng, std::size_t n)
{
  while (true) {
    const auto p = reduce(random_day_sample(rng, n, 12, 16));
    const auto ref = p.referenced();
    if (p.interior_size() >= 2 && std::all_of(ref.begin(), ref.end(), [](bool b) { return b; }))
      return p;
  }
}

} // namespace

TEST(Loglik, SmallProblems)
{
  const auto one = reduce(parse_observations("0 5\n"));
  EXPECT_EQ(loglik(std::vector<double>{}, one), 0.0);

  // N_01 = N_12 = 1 after reduction of (0,2] and (2,4]
  const auto two = reduce(parse_observations("0 2\n2 4\n"));
  ASSERT_EQ(two.interior_size(), 1u);
  EXPECT_NEAR(loglik(std::vector<double>{ 0.5 }, two), 2.0 * std::log(0.5), 1e-15);
  EXPECT_EQ(loglik(std::vector<double>{ 1.0 }, two), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(loglik(std::vector<double>{ 0.2, 0.3 }, two), ValidationError);
}

TEST(EmStep, HandEvaluated)
{
  const auto p = reduce(parse_observations("0 2\n3 5\n"));
  ASSERT_EQ(p.cell_count(), 3u);
  const auto same = em_step(std::vector<double>{ 0.5, 0.0, 0.5 }, p);
  EXPECT_DOUBLE_EQ(same[0], 0.5);
  EXPECT_DOUBLE_EQ(same[1], 0.0);
  EXPECT_DOUBLE_EQ(same[2], 0.5);
  const auto moved = em_step(std::vector<double>{ 0.25, 0.0, 0.75 }, p);
  EXPECT_DOUBLE_EQ(moved[0], 0.5);
  EXPECT_DOUBLE_EQ(moved[2], 0.5);
}

TEST(EmStep, FixedPointAtWuhanMle)
{
  const auto p = reduce(wuhan());
  const auto fit = icm_fit(p, { std::nullopt, 10000, 1e-12 });
  const auto& masses = fit.distribution.masses();
  const auto next = em_step(masses, p);
  for (std::size_t k = 0; k < masses.size(); ++k)
    EXPECT_NEAR(next[k], masses[k], 1e-10);
  // the rounded reference masses are a fixed point up to their rounding
  const auto from_reference = em_step(reference_masses, p);
  for (std::size_t k = 0; k < reference_masses.size(); ++k)
    EXPECT_NEAR(from_reference[k], reference_masses[k], 1e-9);
}

TEST(EmFit, WuhanDayGrid)
{
  const auto p = day_grid_problem(wuhan());
  const auto fit = em_fit(p, { std::nullopt, 10000, 0.0 });
  EXPECT_EQ(fit.iterations, 10000u);
  const auto& d = fit.distribution;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double day = d.support()[k];
    if (day >= 3 && day <= 9) {
      EXPECT_NEAR(d.masses()[k], reference_masses[static_cast<std::size_t>(day) - 3], 1e-4) << "day " << day;
    } else {
      EXPECT_LT(d.masses()[k], 1e-4) << "day " << day;
    }
  }
}

TEST(EmFit, SingleIntervalOneIteration)
{
  const auto p = reduce(parse_observations("0 5\n0 5\n"));
  const auto fit = em_fit(p, { std::nullopt, 1, 1e-10 });
  ASSERT_EQ(fit.distribution.size(), 1u);
  EXPECT_DOUBLE_EQ(fit.distribution.masses()[0], 1.0);
}

TEST(EmFit, RejectsBadInit)
{
  const auto p = reduce(parse_observations("0 2\n3 5\n"));
  EXPECT_THROW(em_fit(p, { std::vector<double>{ 0.5, 0.5 }, 10, 1e-10 }), ValidationError);
  EXPECT_THROW(em_fit(p, { std::vector<double>{ 0.5, 0.4, 0.2 }, 10, 1e-10 }), ValidationError);
}

TEST(EmProperties, MonotoneAndMassConserving)
{
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = random_problem(rng, 20 + rng.index(20));
    std::vector<double> masses(p.cell_count(), 1.0 / static_cast<double>(p.cell_count()));
    double prev = loglik(cumulative(masses), p);
    for (int it = 0; it < 200; ++it) {
      masses = em_step(masses, p);
      double total = 0.0;
      for (double v : masses) {
        EXPECT_GE(v, 0.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      const double f = loglik(cumulative(masses), p);
      EXPECT_GE(f, prev - 1e-12);
      prev = f;
    }
  }
}

TEST(Gradient, MatchesFiniteDifferences)
{
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_problem(rng, 25);
    std::vector<double> y(p.interior_size());
    double acc = 0.0;
    for (auto& v : y)
      v = (acc += 0.2 + rng.uniform());
    for (auto& v : y)
      v /= acc + 0.2 + rng.uniform();
    const auto s = isotonic_state(y, p);
    constexpr double h = 1e-6;
    for (std::size_t j = 0; j < y.size(); ++j) {
      auto up = y;
      auto dn = y;
      up[j] += h;
      dn[j] -= h;
      const double g = (loglik(up, p) - loglik(dn, p)) / (2 * h);
      // wider step for the second difference, which loses digits as 1/h^2
      constexpr double h2 = 1e-5;
      auto up2 = y;
      auto dn2 = y;
      up2[j] += h2;
      dn2[j] -= h2;
      const double w = -(loglik(up2, p) - 2 * loglik(y, p) + loglik(dn2, p)) / (h2 * h2);
      EXPECT_NEAR(s.gradient[j], g, 1e-5 * std::max(1.0, std::abs(g)));
      EXPECT_NEAR(s.weights[j], w, 1e-4 * std::max(1.0, std::abs(w)));
      // analytic second derivative from a difference of analytic gradients
      const double w_from_grad = -(isotonic_state(up, p).gradient[j] - isotonic_state(dn, p).gradient[j]) / (2 * h);
      EXPECT_NEAR(s.weights[j], w_from_grad, 1e-5 * std::abs(w_from_grad));
    }
  }
}

TEST(Cusum, SinglePoint)
{
  const IsotonicState s{ { 0.3 }, { 0.5 }, { 2.0 } };
  const auto d = cusum_diagram(s);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].x, 0.0);
  EXPECT_EQ(d[0].y, 0.0);
  EXPECT_DOUBLE_EQ(d[1].x, 2.0);
  EXPECT_DOUBLE_EQ(d[1].y, 1.1);
}

TEST(Cusum, StationaryLine)
{
  const IsotonicState s{ { 0.4, 0.4, 0.4 }, { 0.0, 0.0, 0.0 }, { 1.0, 2.0, 0.5 } };
  const auto d = cusum_diagram(s);
  for (std::size_t k = 1; k < d.size(); ++k)
    EXPECT_DOUBLE_EQ(d[k].y, 0.4 * d[k].x);
  const IsotonicState bad{ { 0.4 }, { 0.0 }, { 0.0 } };
  EXPECT_THROW(cusum_diagram(bad), NumericError);
}

TEST(Cusum, GcmFixedPointAtWuhanMle)
{
  const auto p = reduce(wuhan());
  const auto fit = icm_fit(p, { std::nullopt, 10000, 1e-12 });
  const auto deriv = gcm_left_derivatives(cusum_diagram(isotonic_state(fit.cdf_values, p)));
  for (std::size_t k = 0; k < deriv.size(); ++k)
    EXPECT_NEAR(deriv[k], fit.cdf_values[k], 1e-8);
}

TEST(Gcm, Examples)
{
  const std::vector<DiagramPoint> pts{ { 0, 0 }, { 1, 2 }, { 2, 2 }, { 3, 6 } };
  const auto d = gcm_left_derivatives(pts);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
  EXPECT_DOUBLE_EQ(d[2], 4.0);
  EXPECT_EQ(d, brute_force_gcm(pts));

  const std::vector<DiagramPoint> line{ { 0, 0 }, { 1, 0.7 }, { 3, 2.1 }, { 3.5, 2.45 } };
  for (double v : gcm_left_derivatives(line))
    EXPECT_NEAR(v, 0.7, 1e-15);

  const std::vector<DiagramPoint> convex{ { 0, 0 }, { 1, -1 }, { 2, -1 }, { 4, 2 } };
  const auto c = gcm_left_derivatives(convex);
  EXPECT_DOUBLE_EQ(c[0], -1.0);
  EXPECT_DOUBLE_EQ(c[1], 0.0);
  EXPECT_DOUBLE_EQ(c[2], 1.5);
}

TEST(Gcm, MatchesBruteForceOnRandomDiagrams)
{
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    std::vector<DiagramPoint> pts{ { 0.0, 0.0 } };
    for (std::size_t k = 1; k < n; ++k) {
      // integer-valued coordinates keep the brute-force comparisons exact
      pts.push_back({ pts.back().x + static_cast<double>(1 + rng.index(4)), static_cast<double>(rng.index(21)) - 10.0 });
    }
    const auto got = gcm_left_derivatives(pts);
    const auto want = brute_force_gcm(pts);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_NEAR(got[k], want[k], 1e-12);
      if (k > 0) {
        EXPECT_LE(got[k - 1], got[k] + 1e-12);
      }
    }
    // the minorant never exceeds a point
    double value = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      value += got[k - 1] * (pts[k].x - pts[k - 1].x);
      EXPECT_LE(value, pts[k].y + 1e-9);
    }
  }
}

TEST(IcmFit, WuhanMatchesReferenceMasses)
{
  const auto fit = icm_fit(reduce(wuhan()));
  ASSERT_TRUE(fit.converged) << fit.message;
  EXPECT_LT(fit.iterations, 1000u);
  ASSERT_EQ(fit.distribution.size(), 7u);
  for (std::size_t k = 0; k < 7; ++k) {
    EXPECT_EQ(fit.distribution.support()[k], static_cast<double>(k + 3));
    EXPECT_NEAR(fit.distribution.masses()[k], reference_masses[k], 1e-8);
  }
  EXPECT_LE(fit.fenchel.max_violation, 1e-8);
  EXPECT_LE(fit.fenchel.equality_gap, 1e-8);
}

TEST(IcmFit, SingleCell)
{
  const auto fit = icm_fit(reduce(parse_observations("0 5\n0 3\n")));
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.iterations, 2u);
}

TEST(IcmFit, RejectsInitOutsideCone)
{
  const auto p = reduce(wuhan());
  IcmOptions o;
  o.init = std::vector<double>{ 0.1, 0.2, 0.15, 0.4, 0.5, 0.6 };
  EXPECT_THROW(icm_fit(p, o), ValidationError);
  o.init = std::vector<double>{ 0.0, 0.2, 0.3, 0.4, 0.5, 0.6 };
  EXPECT_THROW(icm_fit(p, o), ValidationError);
}

TEST(IcmFit, AgreesWithEmOnRandomProblems)
{
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, 20);
    const auto icm = icm_fit(p);
    const auto em = em_fit(p, { std::nullopt, 1000000, 1e-13 });
    ASSERT_TRUE(icm.converged) << icm.message;
    EXPECT_GE(icm.loglik, em.loglik - 1e-8);
    if (em.converged) {
      EXPECT_NEAR(icm.loglik, em.loglik, 1e-8);
    }
    const double bound = 1e-10 * static_cast<double>(p.total_count());
    EXPECT_LE(icm.fenchel.max_violation, bound);
  }
}

TEST(IcmFit, EmAndIcmCdfAgreeOnWuhan)
{
  const auto p = reduce(wuhan());
  const auto icm = icm_fit(p);
  const auto em = em_fit(p);
  ASSERT_TRUE(em.converged);
  for (std::size_t k = 0; k < icm.cdf_values.size(); ++k)
    EXPECT_NEAR(icm.cdf_values[k], em.cdf_values[k], 1e-6);
}

TEST(Fenchel, DetectsNonOptimalPoints)
{
  const auto p = reduce(wuhan());
  const std::vector<double> uniform{ 1.0 / 7, 2.0 / 7, 3.0 / 7, 4.0 / 7, 5.0 / 7, 6.0 / 7 };
  EXPECT_GT(check_fenchel(uniform, p).max_violation, 1.0);

  const auto y = icm_fit(p, { std::nullopt, 10000, 1e-12 }).cdf_values;
  // y_3 sits between y_2 and y_4 with room on both sides; the sweep keeps the order
  double prev = check_fenchel(y, p).max_violation;
  for (double eps : { 1e-5, 1e-4, 5e-4, 1e-3 }) {
    auto z = y;
    z[3] += eps;
    const double v = check_fenchel(z, p).max_violation;
    EXPECT_GT(v, prev);
    prev = v;
  }
}
