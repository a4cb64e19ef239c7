#include <incubation/incubation.hpp>

#include "CLI11.hpp"
#include "manifest.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace incubation;
using incubation::cli::CsvWriter;
using incubation::cli::json;
using incubation::cli::RunManifest;

namespace {

//! Missing or unreadable files; reported with exit status 2.
struct InputError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text)
{
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write '" + path + "'");
  out << text;
}

std::uint64_t default_seed()
{
  if (const char* env = std::getenv("INCUBATION_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError("INCUBATION_SEED is not an unsigned integer");
    }
  }
  return 1;
}

//! "lo:hi:step" (inclusive), "a..b" (integers) or "x,y,z".
std::vector<double> parse_points(const std::string& text)
{
  try {
    if (auto c1 = text.find(':'); c1 != std::string::npos) {
      const auto c2 = text.find(':', c1 + 1);
      if (c2 == std::string::npos)
        throw ValidationError("range needs lo:hi:step");
      return uniform_grid(std::stod(text.substr(0, c1)),
                          std::stod(text.substr(c1 + 1, c2 - c1 - 1)),
                          std::stod(text.substr(c2 + 1)));
    }
    if (auto dots = text.find(".."); dots != std::string::npos)
      return uniform_grid(std::stod(text.substr(0, dots)), std::stod(text.substr(dots + 2)), 1.0);
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(std::stod(item));
    if (out.empty())
      throw ValidationError("empty point list");
    return out;
  } catch (const std::logic_error&) {
    throw ValidationError("cannot parse point list '" + text + "'");
  }
}

//! Two-column (S - E, S) or three-column (arrival, departure, onset) text.
ObservationSet load_sample(const std::string& text, const std::string& format)
{
  std::string fmt = format;
  if (fmt == "auto") {
    fmt = "two";
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#')
        continue;
      std::istringstream fields(line);
      std::string tok;
      std::size_t n = 0;
      while (fields >> tok)
        ++n;
      fmt = n == 3 ? "three" : "two";
      break;
    }
  }
  return fmt == "three" ? parse_raw_records(text) : parse_observations(text);
}

RiemannGrid parse_riemann(const std::string& text)
{
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw ValidationError("integration range needs lo:hi:step");
  try {
    return RiemannGrid{ std::stod(text.substr(0, c1)), std::stod(text.substr(c1 + 1, c2 - c1 - 1)), std::stod(text.substr(c2 + 1)) };
  } catch (const std::logic_error&) {
    throw ValidationError("cannot parse integration range '" + text + "'");
  }
}

Rounding parse_rounding(const std::string& s)
{
  return s == "continuous" ? Rounding::continuous : Rounding::round_to_day;
}

json fit_json(const FitResult& fit)
{
  return json{ { "algorithm", fit.algorithm },
               { "converged", fit.converged },
               { "iterations", fit.iterations },
               { "loglik", fit.loglik },
               { "message", fit.message },
               { "fenchel", { { "max_violation", fit.fenchel.max_violation }, { "equality_gap", fit.fenchel.equality_gap } } },
               { "support", fit.distribution.support() },
               { "masses", fit.distribution.masses() } };
}

DiscreteDistribution distribution_from_json(const json& j)
{
  const json& src = j.contains("fit") ? j.at("fit") : j;
  if (!src.contains("support") || !src.contains("masses"))
    throw ValidationError("fit file needs 'support' and 'masses'");
  return DiscreteDistribution(src.at("support").get<std::vector<double>>(), src.at("masses").get<std::vector<double>>());
}

std::string dump(const json& j)
{
  return j.dump(2) + "\n";
}

struct Common
{
  std::string json_out = "-";
  std::string csv_out;
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

void add_outputs(CLI::App* cmd, Common& c, bool csv = true)
{
  cmd->add_option("--json", c.json_out, "JSON output path ('-' for stdout)")->capture_default_str();
  if (csv)
    cmd->add_option("--csv", c.csv_out, "CSV output path");
}

int cmd_fit(const std::string& input, const std::string& format, const std::string& algorithm, const std::string& grid,
            std::size_t max_iter, double tol, const Common& c)
{
  const std::string text = read_file(input);
  const auto sample = load_sample(text, format);
  RunManifest m{ "fit",
                 { { "algorithm", algorithm }, { "grid", grid }, { "max_iter", max_iter }, { "tol", tol }, { "format", format } },
                 0,
                 cli::hex_digest(text) };
  if (algorithm == "em" && grid == "days" && sample.scale() != TimeScale::discrete_days)
    throw ValidationError("the day grid needs integer data");
  const FitResult fit = [&] {
    if (algorithm == "em")
      return em_fit(grid == "days" ? day_grid_problem(sample) : reduce(sample), EmOptions{ std::nullopt, max_iter, tol });
    IcmOptions opts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    return fit_npmle(sample, opts);
  }();
  write_output(c.json_out, dump({ { "manifest", m.to_json() }, { "fit", fit_json(fit) } }));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "x", "mass", "cdf" });
    double acc = 0.0;
    for (std::size_t k = 0; k < fit.distribution.size(); ++k) {
      acc += fit.distribution.masses()[k];
      csv.row(fit.distribution.support()[k], fit.distribution.masses()[k], std::min(acc, 1.0));
    }
    write_output(c.csv_out, csv.str());
  }
  if (!fit.converged) {
    std::cerr << "fit did not converge: " << fit.message << "\n";
    return 1;
  }
  return 0;
}

int cmd_weibull(const std::string& input, const std::string& format, const WeibullFitOptions& opts, const Common& c)
{
  const std::string text = read_file(input);
  const auto sample = load_sample(text, format);
  RunManifest m{ "weibull",
                 { { "shape0", opts.init.shape },
                   { "rate0", opts.init.rate },
                   { "step0", opts.initial_step },
                   { "min_step", opts.min_step },
                   { "max_evals", opts.max_evals },
                   { "format", format } },
                 0,
                 cli::hex_digest(text) };
  const auto fit = fit_weibull(sample, opts);
  write_output(c.json_out,
               dump({ { "manifest", m.to_json() },
                      { "shape", fit.params.shape },
                      { "rate", fit.params.rate },
                      { "loglik", fit.loglik },
                      { "evals", fit.evals },
                      { "converged", fit.converged } }));
  if (!fit.converged) {
    std::cerr << "pattern search hit its evaluation budget\n";
    return 1;
  }
  return 0;
}

int cmd_smooth(const std::string& input, const std::string& kind, double h, const std::string& grid_spec, const Common& c)
{
  const std::string text = read_file(input);
  json src;
  try {
    src = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("fit file is not JSON: ") + e.what());
  }
  const auto dist = distribution_from_json(src);
  const auto grid = parse_points(grid_spec);
  RunManifest m{ "smooth", { { "kind", kind }, { "h", h }, { "grid", grid_spec } }, 0, cli::hex_digest(text) };
  const auto est = kind == "cdf" ? smle(dist, h, grid) : density(dist, h, grid);
  write_output(c.json_out,
               dump({ { "manifest", m.to_json() }, { "kind", kind }, { "bandwidth", h }, { "t", est.eval_grid }, { "values", est.values } }));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "t", kind });
    for (std::size_t k = 0; k < grid.size(); ++k)
      csv.row(est.eval_grid[k], est.values[k]);
    write_output(c.csv_out, csv.str());
  }
  return 0;
}

int cmd_bandwidth(const std::string& input, const std::string& format, const std::string& target, double h0, std::size_t B,
                  const std::string& h_grid, const std::string& rounding, const std::string& integration, const Common& c)
{
  const std::string text = read_file(input);
  const auto sample = load_sample(text, format);
  BandwidthOptions opts;
  opts.target = target == "cdf" ? BandwidthTarget::cdf : BandwidthTarget::density;
  opts.h_grid = parse_points(h_grid);
  opts.h0 = h0;
  opts.B = B;
  opts.seed = c.seed;
  opts.rounding = parse_rounding(rounding);
  opts.integration = parse_riemann(integration);
  opts.threads = c.threads;
  RunManifest m{ "bandwidth",
                 { { "target", target }, { "h0", h0 }, { "B", B }, { "h_grid", h_grid }, { "rounding", rounding }, { "integration", integration }, { "format", format } },
                 c.seed,
                 cli::hex_digest(text) };
  const auto curve = select_bandwidth(sample, opts);
  write_output(c.json_out,
               dump({ { "manifest", m.to_json() },
                      { "target", target },
                      { "h0", curve.h0 },
                      { "B", curve.B },
                      { "used", curve.used },
                      { "dropped", curve.dropped },
                      { "minimizer", curve.minimizer },
                      { "h", curve.h_values },
                      { "mse", curve.mse } }));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "h", "mse" });
    for (std::size_t k = 0; k < curve.h_values.size(); ++k)
      csv.row(curve.h_values[k], curve.mse[k]);
    write_output(c.csv_out, csv.str());
  }
  return 0;
}

int cmd_simulate(const SimulationConfig& cfg, const std::string& rounding, const std::string& output, const std::string& latent)
{
  RunManifest m{ "simulate",
                 { { "n", cfg.n },
                   { "M", cfg.M },
                   { "M1", cfg.M1 },
                   { "shape", cfg.weibull.shape },
                   { "rate", cfg.weibull.rate },
                   { "rounding", rounding } },
                 cfg.seed,
                 "" };
  const auto sim = simulate_with_latent(cfg);
  write_output(output, "# manifest: " + m.to_json().dump() + "\n# S-E S\n" + serialize(sim.sample));
  if (!latent.empty()) {
    CsvWriter csv(m, { "exit", "symptom", "delta", "infection", "incubation" });
    for (std::size_t k = 0; k < sim.sample.size(); ++k) {
      const auto& r = sim.sample[k];
      csv.row(r.exit_time(), r.symptom_time(), std::size_t{ r.delta() }, sim.infection[k], sim.incubation[k]);
    }
    write_output(latent, csv.str());
  }
  return 0;
}

int cmd_ci(const std::string& input, const std::string& format, double h, const std::string& grid_spec, std::size_t B, double level,
           const Common& c)
{
  const std::string text = read_file(input);
  const auto sample = load_sample(text, format);
  const auto grid = parse_points(grid_spec);
  RunManifest m{ "ci", { { "h", h }, { "grid", grid_spec }, { "B", B }, { "level", level }, { "format", format } }, c.seed, cli::hex_digest(text) };
  const auto band = bootstrap_ci_density(sample, h, grid, B, level, c.seed, c.threads);
  write_output(c.json_out,
               dump({ { "manifest", m.to_json() },
                      { "level", band.level },
                      { "B", band.B },
                      { "used", band.used },
                      { "dropped", band.dropped },
                      { "t", band.grid },
                      { "lower", band.lower },
                      { "estimate", band.estimate },
                      { "upper", band.upper } }));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "t", "lower", "estimate", "upper" });
    for (std::size_t k = 0; k < band.grid.size(); ++k)
      csv.row(band.grid[k], band.lower[k], band.estimate[k], band.upper[k]);
    write_output(c.csv_out, csv.str());
  }
  return 0;
}

int cmd_variance(const SimulationConfig& cfg, const std::string& t_spec, double h, std::size_t n_sims, double step, const Common& c)
{
  const auto ts = parse_points(t_spec);
  RunManifest m{ "variance",
                 { { "t", t_spec },
                   { "h", h },
                   { "n", cfg.n },
                   { "n_sims", n_sims },
                   { "M", cfg.M },
                   { "M1", cfg.M1 },
                   { "shape", cfg.weibull.shape },
                   { "rate", cfg.weibull.rate },
                   { "step", step } },
                 c.seed,
                 "" };
  PhiOptions phi;
  phi.step = step;
  VarianceReport report;
  if (n_sims == 0) {
    report.t_values = ts;
    report.n = cfg.n;
    report.h = h;
    report.asymptotic = asymptotic_variances(cfg, ts, h, phi, c.threads);
  } else {
    VarianceOptions opts;
    opts.n_sims = n_sims;
    opts.seed = c.seed;
    opts.threads = c.threads;
    opts.phi = phi;
    report = empirical_variance(cfg, ts, h, opts);
  }
  json out{ { "manifest", m.to_json() },
            { "t", report.t_values },
            { "asymptotic", report.asymptotic },
            { "n", report.n },
            { "h", report.h },
            { "n_sims", report.n_sims },
            { "used", report.used },
            { "dropped", report.dropped } };
  if (!report.empirical.empty())
    out["empirical"] = report.empirical;
  write_output(c.json_out, dump(out));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "t", "empirical", "asymptotic" });
    for (std::size_t k = 0; k < ts.size(); ++k)
      csv.row(ts[k], report.empirical.empty() ? std::string("NA") : cli::format_double(report.empirical[k]), report.asymptotic[k]);
    write_output(c.csv_out, csv.str());
  }
  return 0;
}

int cmd_phi(const SimulationConfig& cfg, double t, double h, double n, const PhiOptions& opts, const std::string& solver,
            const Common& c)
{
  RunManifest m{ "phi",
                 { { "t", t },
                   { "h", h },
                   { "n", n },
                   { "M", cfg.M },
                   { "M1", cfg.M1 },
                   { "shape", cfg.weibull.shape },
                   { "rate", cfg.weibull.rate },
                   { "step", opts.step },
                   { "solver", solver } },
                 0,
                 "" };
  const auto model = truncated_weibull_model(cfg.weibull, cfg.M, cfg.M1);
  const auto sol = solve_phi(model, t, h, opts);
  write_output(c.json_out,
               dump({ { "manifest", m.to_json() },
                      { "residual", sol.residual },
                      { "iterations", sol.iterations },
                      { "mean_theta", mean_theta(sol) },
                      { "expected_theta_squared", expected_theta_squared(sol) },
                      { "asymptotic_variance", asymptotic_variance(sol, n) } }));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "w", "phi", "kernel_derivative" });
    for (std::size_t k = 0; k < sol.grid.size(); ++k)
      csv.row(sol.grid[k], sol.phi[k], scaled_kernel_derivative(sol.grid[k] - t, h));
    write_output(c.csv_out, csv.str());
  }
  return 0;
}

int cmd_subsample(const std::string& input, const std::string& format, SubsampleOptions opts, const std::string& c_grid,
                  const Common& c)
{
  const std::string text = read_file(input);
  const auto sample = load_sample(text, format);
  opts.c_grid = parse_points(c_grid);
  opts.seed = c.seed;
  opts.threads = c.threads;
  RunManifest m{ "subsample",
                 { { "m", opts.m }, { "c_grid", c_grid }, { "h_ref", opts.h_ref }, { "B", opts.B }, { "format", format } },
                 c.seed,
                 cli::hex_digest(text) };
  const auto res = subsample_bandwidth(sample, opts);
  write_output(c.json_out,
               dump({ { "manifest", m.to_json() },
                      { "c_hat", res.c_hat },
                      { "bandwidth", res.bandwidth },
                      { "used", res.used },
                      { "dropped", res.dropped },
                      { "c", res.c_values },
                      { "mse", res.mse } }));
  if (!c.csv_out.empty()) {
    CsvWriter csv(m, { "c", "mse" });
    for (std::size_t k = 0; k < res.c_values.size(); ++k)
      csv.row(res.c_values[k], res.mse[k]);
    write_output(c.csv_out, csv.str());
  }
  return 0;
}

void add_model(CLI::App* cmd, SimulationConfig& cfg)
{
  cmd->add_option("--M", cfg.M, "exit-time upper bound")->capture_default_str();
  cmd->add_option("--M1", cfg.M1, "incubation support bound")->capture_default_str();
  cmd->add_option("--shape", cfg.weibull.shape, "Weibull shape a")->capture_default_str();
  cmd->add_option("--rate", cfg.weibull.rate, "Weibull rate b")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Incubation-time estimation from doubly censored exposure data" };
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(incubation::version));

  Common common;
  std::uint64_t env_seed = 1;
  try {
    env_seed = default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  common.seed = env_seed;
  app.add_option("--threads", common.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  std::string input;
  std::string format = "auto";
  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("input", input, "observation file")->required();
    cmd->add_option("--format", format, "input columns")->check(CLI::IsMember({ "auto", "two", "three" }))->capture_default_str();
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "master seed (default from INCUBATION_SEED)")->capture_default_str();
  };

  // fit
  std::string algorithm = "icm";
  std::string grid = "reduced";
  std::size_t max_iter = 0;
  double tol = 1e-10;
  auto* fit = app.add_subcommand("fit", "nonparametric MLE");
  add_input(fit);
  add_outputs(fit, common);
  fit->add_option("--algorithm", algorithm)->check(CLI::IsMember({ "icm", "em" }))->capture_default_str();
  fit->add_option("--grid", grid, "EM support: reduced points or every day 1..max S")
    ->check(CLI::IsMember({ "reduced", "days" }))
    ->capture_default_str();
  fit->add_option("--max-iter", max_iter, "iteration cap (default 10000 for ICM, 100000 for EM)");
  fit->add_option("--tol", tol)->capture_default_str();

  // weibull
  WeibullFitOptions wopts;
  auto* weib = app.add_subcommand("weibull", "Weibull MLE by pattern search");
  add_input(weib);
  add_outputs(weib, common, false);
  weib->add_option("--shape0", wopts.init.shape)->capture_default_str();
  weib->add_option("--rate0", wopts.init.rate)->capture_default_str();
  weib->add_option("--step0", wopts.initial_step)->capture_default_str();
  weib->add_option("--min-step", wopts.min_step)->capture_default_str();
  weib->add_option("--max-evals", wopts.max_evals)->capture_default_str();

  // smooth
  std::string kind = "density";
  double h = 4.6;
  std::string grid_spec = "0:14:0.1";
  auto* sm = app.add_subcommand("smooth", "SMLE or density estimate from a fit file");
  sm->add_option("fit", input, "JSON written by 'fit'")->required();
  add_outputs(sm, common);
  sm->add_option("--kind", kind)->check(CLI::IsMember({ "cdf", "density" }))->capture_default_str();
  sm->add_option("--h", h, "bandwidth")->capture_default_str();
  sm->add_option("--grid", grid_spec, "evaluation points")->capture_default_str();

  // bandwidth
  std::string target = "density";
  double h0 = 4.0;
  std::size_t B = 1000;
  std::string h_grid = "2:7:0.2";
  std::string rounding = "day";
  std::string integration = "0:14:0.1";
  auto* bw = app.add_subcommand("bandwidth", "smoothed-bootstrap bandwidth selection");
  add_input(bw);
  add_outputs(bw, common);
  add_seed(bw);
  bw->add_option("--target", target)->check(CLI::IsMember({ "density", "cdf" }))->capture_default_str();
  bw->add_option("--h0", h0)->capture_default_str();
  bw->add_option("--B", B)->capture_default_str();
  bw->add_option("--h-grid", h_grid)->capture_default_str();
  bw->add_option("--rounding", rounding)->check(CLI::IsMember({ "day", "continuous" }))->capture_default_str();
  bw->add_option("--integration", integration, "Riemann grid lo:hi:step, left endpoints")->capture_default_str();

  // simulate
  SimulationConfig sim;
  std::string sim_rounding = "continuous";
  std::string sim_out = "-";
  std::string latent;
  auto* simc = app.add_subcommand("simulate", "continuous simulation model");
  simc->add_option("--n", sim.n)->capture_default_str();
  add_model(simc, sim);
  add_seed(simc);
  simc->add_option("--rounding", sim_rounding)->check(CLI::IsMember({ "day", "continuous" }))->capture_default_str();
  simc->add_option("--output", sim_out, "two-column data file ('-' for stdout)")->capture_default_str();
  simc->add_option("--latent", latent, "CSV with latent infection and incubation times");

  // ci
  double level = 0.95;
  std::size_t ci_B = 1000;
  double ci_h = 3.4;
  std::string ci_grid = "0:20:0.5";
  auto* ci = app.add_subcommand("ci", "pointwise percentile bootstrap band for the density");
  add_input(ci);
  add_outputs(ci, common);
  add_seed(ci);
  ci->add_option("--h", ci_h)->capture_default_str();
  ci->add_option("--grid", ci_grid)->capture_default_str();
  ci->add_option("--B", ci_B)->capture_default_str();
  ci->add_option("--level", level)->capture_default_str();

  // variance
  SimulationConfig vcfg;
  std::string t_spec = "2..11";
  double vh = 3.4;
  std::size_t n_sims = 0;
  double step = 0.05;
  auto* var = app.add_subcommand("variance", "asymptotic and simulated variances of the density estimate");
  add_outputs(var, common);
  add_seed(var);
  add_model(var, vcfg);
  var->add_option("--n", vcfg.n)->capture_default_str();
  var->add_option("--t", t_spec)->capture_default_str();
  var->add_option("--h", vh)->capture_default_str();
  var->add_option("--n-sims", n_sims, "simulated samples (0: asymptotic only)")->capture_default_str();
  var->add_option("--step", step, "integral-equation grid step")->capture_default_str();

  // phi
  SimulationConfig pcfg;
  double pt = 6.0;
  double ph = 3.4;
  double pn = 1000.0;
  std::string solver = "direct";
  PhiOptions popts;
  auto* phi = app.add_subcommand("phi", "solve the integral equation for the score");
  add_outputs(phi, common);
  add_model(phi, pcfg);
  phi->add_option("--t", pt)->capture_default_str();
  phi->add_option("--h", ph)->capture_default_str();
  phi->add_option("--n", pn)->capture_default_str();
  phi->add_option("--step", popts.step)->capture_default_str();
  phi->add_option("--solver", solver)->check(CLI::IsMember({ "direct", "fixed-point" }))->capture_default_str();
  phi->add_option("--damping", popts.damping)->capture_default_str();

  // subsample
  SubsampleOptions sopts;
  std::string c_grid = "1:20:0.1";
  auto* sub = app.add_subcommand("subsample", "m-out-of-n bootstrap for the bandwidth constant");
  add_input(sub);
  add_outputs(sub, common);
  add_seed(sub);
  sub->add_option("--m", sopts.m)->capture_default_str();
  sub->add_option("--c-grid", c_grid)->capture_default_str();
  sub->add_option("--h-ref", sopts.h_ref)->capture_default_str();
  sub->add_option("--B", sopts.B)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit) {
      if (max_iter == 0)
        max_iter = algorithm == "em" ? 100000 : 10000;
      return cmd_fit(input, format, algorithm, grid, max_iter, tol, common);
    }
    if (*weib)
      return cmd_weibull(input, format, wopts, common);
    if (*sm)
      return cmd_smooth(input, kind, h, grid_spec, common);
    if (*bw)
      return cmd_bandwidth(input, format, target, h0, B, h_grid, rounding, integration, common);
    if (*simc) {
      sim.seed = common.seed;
      sim.rounding = parse_rounding(sim_rounding);
      return cmd_simulate(sim, sim_rounding, sim_out, latent);
    }
    if (*ci)
      return cmd_ci(input, format, ci_h, ci_grid, ci_B, level, common);
    if (*var)
      return cmd_variance(vcfg, t_spec, vh, n_sims, step, common);
    if (*phi) {
      popts.solver = solver == "fixed-point" ? PhiSolver::fixed_point : PhiSolver::direct;
      return cmd_phi(pcfg, pt, ph, pn, popts, solver, common);
    }
    if (*sub)
      return cmd_subsample(input, format, sopts, c_grid, common);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
