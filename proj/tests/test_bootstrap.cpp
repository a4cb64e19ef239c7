#include <incubation/bootstrap.hpp>
#include <incubation/sampling.hpp>
#include <incubation/simulation.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace incubation;
using incubation::test::wuhan;

namespace {

//! Kolmogorov distance between the empirical law of `xs` and `cdf`.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf)
{
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = cdf(xs[k]);
    d = std::max({ d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n });
  }
  return d;
}

} // namespace

TEST(Rejection, UniformAcceptsEveryProposal)
{
  Rng rng(1);
  const RejectionSampler s([](double) { return 1.0; }, 0.0, 1.0, 1.0);
  std::size_t proposals = 0;
  std::vector<double> xs;
  for (int k = 0; k < 10000; ++k)
    xs.push_back(s(rng, &proposals));
  EXPECT_EQ(proposals, 10000u);
  EXPECT_LT(ks_distance(xs, [](double x) { return x; }), 0.02);
}

TEST(Rejection, TriangularMatchesAnalyticCdf)
{
  Rng rng(2);
  auto tri = [](double x) { return x < 1.0 ? x : 2.0 - x; };
  std::vector<double> xs;
  for (int k = 0; k < 100000; ++k)
    xs.push_back(rejection_sample_density(tri, 0.0, 2.0, 1.0, rng));
  const double d = ks_distance(xs, [](double x) { return x < 1.0 ? x * x / 2 : 1.0 - (2 - x) * (2 - x) / 2; });
  EXPECT_LT(d, 0.01);
}

TEST(Rejection, Errors)
{
  Rng rng(3);
  EXPECT_THROW(RejectionSampler([](double) { return 1.0; }, 1.0, 1.0, 1.0), ValidationError);
  EXPECT_THROW(RejectionSampler([](double) { return 1.0; }, 0.0, 1.0, 0.0), ValidationError);
  const RejectionSampler low([](double) { return 2.0; }, 0.0, 1.0, 1.0);
  EXPECT_THROW(low(rng), NumericError);
  const RejectionSampler empty([](double) { return 0.0; }, 0.0, 1.0, 1.0, 100);
  EXPECT_THROW(empty(rng), NumericError);
}

TEST(Rejection, DensitySamplerEnvelope)
{
  const DiscreteDistribution d({ 3, 4, 9 }, { 0.2, 0.5, 0.3 });
  const auto s = density_sampler(d, 4.0);
  EXPECT_EQ(s.lo(), 0.0);
  EXPECT_EQ(s.hi(), 13.0);
  for (double t = 0.0; t <= 13.0; t += 0.001)
    EXPECT_LE(density_at(d, 4.0, t), s.bound());
}

TEST(Resample, DeltaMatchesQuadrature)
{
  const auto sample = wuhan();
  const auto fit = fit_npmle(sample);
  const auto& dist = fit.distribution;
  const double h0 = 4.0;
  const auto sampler = density_sampler(dist, h0);
  const auto exits = sample.exit_times();

  // reference law is the kernel density restricted to the sampler range
  const double lo = sampler.lo();
  const double hi = sampler.hi();
  const double du = 1e-3;
  std::vector<double> grid_cdf{ 0.0 };
  for (double u = lo; u < hi - du / 2; u += du)
    grid_cdf.push_back(grid_cdf.back() + du * density_at(dist, h0, u + du / 2));
  for (auto& v : grid_cdf)
    v /= grid_cdf.back();
  auto G = [&](double u) {
    if (u <= lo)
      return 0.0;
    const auto k = static_cast<std::size_t>((u - lo) / du);
    return k + 1 >= grid_cdf.size() ? 1.0 : grid_cdf[k] + (grid_cdf[k + 1] - grid_cdf[k]) * ((u - lo) / du - k);
  };
  double expected = 0.0;
  for (double e : exits) {
    double acc = 0.0;
    const std::size_t cells = 2000;
    for (std::size_t k = 0; k < cells; ++k)
      acc += G((static_cast<double>(k) + 0.5) * e / cells);
    expected += acc / cells;
  }
  expected /= static_cast<double>(exits.size());

  const std::size_t reps = 10000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = replicate_stream(77, r);
    const auto star = bootstrap_resample(exits, sampler, Rounding::round_to_day, rng);
    double m = 0.0;
    for (const auto& o : star)
      m += o.delta();
    m /= static_cast<double>(star.size());
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / reps);
  EXPECT_LT(std::abs(mean - expected), 3.0 * se) << mean << " vs " << expected;
}

TEST(Resample, KeepsExitsAndRounds)
{
  const auto sample = wuhan();
  const auto sampler = density_sampler(fit_npmle(sample).distribution, 4.0);
  const auto exits = sample.exit_times();
  Rng rng(5);
  const auto day = bootstrap_resample(exits, sampler, Rounding::round_to_day, rng);
  const auto cont = bootstrap_resample(exits, sampler, Rounding::continuous, rng);
  ASSERT_EQ(day.size(), exits.size());
  for (std::size_t k = 0; k < exits.size(); ++k) {
    EXPECT_EQ(day[k].exit_time(), exits[k]);
    EXPECT_EQ(cont[k].exit_time(), exits[k]);
    EXPECT_EQ(std::round(day[k].symptom_time()), day[k].symptom_time());
    EXPECT_NE(std::round(cont[k].symptom_time()), cont[k].symptom_time());
    EXPECT_GT(day[k].symptom_time(), 0.0);
  }
  EXPECT_EQ(day.scale(), TimeScale::discrete_days);
  EXPECT_EQ(cont.scale(), TimeScale::continuous);
  const std::vector<double> fractional{ 2.5 };
  EXPECT_THROW(bootstrap_resample(fractional, sampler, Rounding::round_to_day, rng), ValidationError);
  EXPECT_THROW(bootstrap_resample(std::vector<double>{}, sampler, Rounding::continuous, rng), ValidationError);
}

TEST(Riemann, LeftEndpoints)
{
  const auto pts = RiemannGrid{}.points();
  ASSERT_EQ(pts.size(), 140u);
  EXPECT_EQ(pts.front(), 0.0);
  EXPECT_NEAR(pts.back(), 13.9, 1e-12);
  EXPECT_THROW((RiemannGrid{ 1.0, 1.0, 0.1 }.points()), ValidationError);
}

TEST(SelectBandwidth, DeterministicAndThreadIndependent)
{
  BandwidthOptions o;
  o.B = 24;
  o.seed = 9;
  const auto a = select_bandwidth(wuhan(), o);
  const auto b = select_bandwidth(wuhan(), o);
  o.threads = 4;
  const auto c = select_bandwidth(wuhan(), o);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.mse, c.mse);
  EXPECT_EQ(a.minimizer, c.minimizer);
  EXPECT_EQ(a.used + a.dropped, 24u);
  EXPECT_EQ(a.h_values.size(), 26u);
  EXPECT_NE(std::find(a.h_values.begin(), a.h_values.end(), a.minimizer), a.h_values.end());
  for (double v : a.mse)
    EXPECT_GT(v, 0.0);
}

TEST(SelectBandwidth, MseIsMeanOfReplicates)
{
  BandwidthOptions o;
  o.B = 5;
  o.target = BandwidthTarget::cdf;
  o.h_grid = { 3.0, 4.0 };
  const SmoothedBootstrap boot(wuhan(), o);
  const auto curve = boot.run();
  ASSERT_EQ(curve.used, 5u);
  std::vector<double> acc(2, 0.0);
  for (std::size_t r = 0; r < 5; ++r) {
    // replicates in reverse order give the same per-replicate values
    const auto ise = boot.replicate(4 - r);
    ASSERT_TRUE(ise.has_value());
    acc[0] += (*ise)[0];
    acc[1] += (*ise)[1];
  }
  EXPECT_NEAR(curve.mse[0], acc[0] / 5, 1e-15);
  EXPECT_NEAR(curve.mse[1], acc[1] / 5, 1e-15);
  EXPECT_EQ(serialize(boot.resample(3)), serialize(boot.resample(3)));
}

TEST(SelectBandwidth, Errors)
{
  BandwidthOptions o;
  o.h_grid = {};
  EXPECT_THROW(select_bandwidth(wuhan(), o), ValidationError);
  o.h_grid = { 1.0, -2.0 };
  EXPECT_THROW(select_bandwidth(wuhan(), o), ValidationError);
  o.h_grid = { 3.0 };
  o.B = 0;
  EXPECT_THROW(select_bandwidth(wuhan(), o), ValidationError);
}

TEST(Simulate, IncubationFollowsTruncatedWeibull)
{
  SimulationConfig c;
  c.seed = 12;
  const auto sim = simulate_with_latent(c);
  ASSERT_EQ(sim.sample.size(), 1000u);
  const double d = ks_distance(sim.incubation, [&](double x) { return truncated_weibull_cdf(c.weibull, c.M1, x); });
  EXPECT_LT(d, 0.05);
  for (std::size_t k = 0; k < sim.sample.size(); ++k) {
    const auto& o = sim.sample[k];
    EXPECT_LE(sim.infection[k], o.exit_time());
    EXPECT_LE(o.exit_time(), c.M);
    EXPECT_NEAR(o.symptom_time(), sim.infection[k] + sim.incubation[k], 1e-12);
    EXPECT_EQ(o.delta(), o.symptom_time() <= o.exit_time());
  }
  EXPECT_EQ(serialize(simulate_continuous(c)), serialize(sim.sample));
}

TEST(Simulate, DayRounding)
{
  SimulationConfig c;
  c.n = 300;
  c.rounding = Rounding::round_to_day;
  const auto s = simulate_continuous(c);
  EXPECT_EQ(s.scale(), TimeScale::discrete_days);
  for (const auto& o : s) {
    EXPECT_EQ(std::round(o.exit_time()), o.exit_time());
    EXPECT_EQ(std::round(o.symptom_time()), o.symptom_time());
  }
  c.M1 = 40.0;
  EXPECT_THROW(simulate_continuous(c), ValidationError);
}

TEST(TruncatedWeibull, QuantileInversion)
{
  const WeibullParams p{ 3.03514, 0.002619 };
  EXPECT_EQ(truncated_weibull_quantile(p, 20.0, 0.0), 0.0);
  EXPECT_EQ(truncated_weibull_quantile(p, 20.0, 1.0), 20.0);
  for (double u : { 0.1, 0.5, 0.9, 0.999 }) {
    const double x = truncated_weibull_quantile(p, 20.0, u);
    EXPECT_NEAR(weibull_cdf(p, x), u * weibull_cdf(p, 20.0), 1e-12);
    EXPECT_NEAR(truncated_weibull_cdf(p, 20.0, x), u, 1e-12);
  }
}

TEST(Subsample, SingletonGrid)
{
  SimulationConfig c;
  c.n = 200;
  SubsampleOptions o;
  o.c_grid = { 4.0 };
  const auto r = subsample_bandwidth(simulate_continuous(c), o);
  EXPECT_EQ(r.c_hat, 4.0);
  EXPECT_NEAR(r.bandwidth, 4.0 * std::pow(200.0, -1.0 / 7.0), 1e-15);
  EXPECT_EQ(r.used, 0u);
}

TEST(Subsample, Deterministic)
{
  SimulationConfig c;
  c.n = 200;
  const auto s = simulate_continuous(c);
  SubsampleOptions o;
  o.B = 20;
  o.c_grid = uniform_grid(2.0, 8.0, 0.5);
  const auto a = subsample_bandwidth(s, o);
  o.threads = 3;
  const auto b = subsample_bandwidth(s, o);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.c_hat, b.c_hat);
  o.m = 500;
  EXPECT_THROW(subsample_bandwidth(s, o), ValidationError);
}

TEST(Percentile, Indices)
{
  EXPECT_EQ(percentile_indices(2, 0.95), std::make_pair(std::size_t{ 0 }, std::size_t{ 1 }));
  EXPECT_EQ(percentile_indices(1000, 0.95), std::make_pair(std::size_t{ 25 }, std::size_t{ 974 }));
  EXPECT_EQ(percentile_indices(200, 0.9), std::make_pair(std::size_t{ 10 }, std::size_t{ 189 }));
}

TEST(ConfidenceBand, TwoReplicatesGiveMinMax)
{
  const auto sample = wuhan();
  const std::vector<double> grid{ 2.0, 6.0, 10.0 };
  const auto band = bootstrap_ci_density(sample, 3.4, grid, 2, 0.95, 21);
  ASSERT_EQ(band.used, 2u);
  std::vector<std::vector<double>> reps;
  for (std::size_t r = 0; r < 2; ++r) {
    Rng rng = replicate_stream(21, r);
    std::vector<Observation> recs;
    for (std::size_t k = 0; k < sample.size(); ++k)
      recs.push_back(sample[rng.index(sample.size())]);
    reps.push_back(density(fit_npmle(ObservationSet(recs, sample.scale())).distribution, 3.4, grid).values);
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_DOUBLE_EQ(band.lower[k], std::min(reps[0][k], reps[1][k]));
    EXPECT_DOUBLE_EQ(band.upper[k], std::max(reps[0][k], reps[1][k]));
  }
  EXPECT_THROW(bootstrap_ci_density(sample, 3.4, grid, 1, 0.95, 1), ValidationError);
  EXPECT_THROW(bootstrap_ci_density(sample, 3.4, grid, 10, 1.0, 1), ValidationError);
  EXPECT_THROW(bootstrap_ci_density(sample, 3.4, {}, 10, 0.95, 1), ValidationError);
}

TEST(ConfidenceBand, CoverageAtSix)
{
  SimulationConfig c;
  c.n = 200;
  const double truth = truncated_weibull_density(c.weibull, c.M1, 6.0);
  const std::vector<double> grid{ 6.0 };
  int cover = 0;
  for (int s = 0; s < 100; ++s) {
    c.seed = 1000 + static_cast<std::uint64_t>(s);
    const auto band = bootstrap_ci_density(simulate_continuous(c), 3.4, grid, 200, 0.95, s + 1);
    EXPECT_LE(band.lower[0], band.estimate[0] + 1e-12);
    EXPECT_GE(band.upper[0], band.estimate[0] - 1e-12);
    cover += band.lower[0] <= truth && truth <= band.upper[0];
  }
  EXPECT_GE(cover, 85);
  EXPECT_LE(cover, 99);
}
