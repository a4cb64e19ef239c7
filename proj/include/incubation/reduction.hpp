#pragma once

#include "error.hpp"
#include "observation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace incubation {

//! Nonzero entry N_ij of the triangular count array: `count` observations
//! whose censoring interval is (x_lower, x_upper] on the reduced grid.
struct CountCell
{
  std::size_t lower;
  std::size_t upper;
  std::size_t count;

  friend bool operator==(const CountCell&, const CountCell&) = default;
};

//! Interval-censored counting structure consumed by the NPMLE algorithms.
//!
//! Interior grid points x_1 < ... < x_m carry the free CDF values
//! y_j = G(x_j). Index 0 stands for the region forced to G = 0 and index m+1
//! for the region forced to G = 1. Mass cell k (1 <= k <= m+1) is the
//! increment y_k - y_{k-1}; it is reported at x_k, and cell m+1 at
//! `upper_edge()`.
//!
//! Observations whose interval spans (forced-0, forced-1] contribute
//! log(1 - 0) = 0 to the likelihood; they are tallied in `uninformative()`
//! and are not part of the count array.
class ReducedProblem
{
public:
  ReducedProblem(std::vector<double> grid,
                 double upper_edge,
                 std::vector<std::pair<std::size_t, std::size_t>> obs_index)
    : grid_(std::move(grid))
    , upper_edge_(upper_edge)
    , obs_index_(std::move(obs_index))
  {
    for (std::size_t k = 1; k < grid_.size(); ++k) {
      if (!(grid_[k - 1] < grid_[k]))
        throw ValidationError("reduced grid must be strictly increasing");
    }
    if (!grid_.empty() && !(upper_edge_ > grid_.back()))
      throw ValidationError("upper edge must exceed the last grid point");

    const std::size_t top = grid_.size() + 1;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> tally;
    for (const auto& [i, j] : obs_index_) {
      if (!(i < j) || j > top)
        throw ValidationError("observation index pair must satisfy i < j <= m+1");
      if (i == 0 && j == top)
        ++uninformative_;
      else
        ++tally[{ i, j }];
    }
    cells_.reserve(tally.size());
    for (const auto& [key, n] : tally)
      cells_.push_back({ key.first, key.second, n });
  }

  //! Number of free interior CDF values m.
  std::size_t interior_size() const noexcept { return grid_.size(); }
  //! Number of mass cells m + 1.
  std::size_t cell_count() const noexcept { return grid_.size() + 1; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  double upper_edge() const noexcept { return upper_edge_; }
  const std::vector<CountCell>& cells() const noexcept { return cells_; }
  std::size_t uninformative() const noexcept { return uninformative_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& obs_index() const noexcept
  {
    return obs_index_;
  }
  std::size_t total_count() const noexcept { return obs_index_.size(); }

  std::size_t count(std::size_t i, std::size_t j) const noexcept
  {
    for (const auto& c : cells_)
      if (c.lower == i && c.upper == j)
        return c.count;
    return 0;
  }

  //! Locations at which the m+1 cell masses are reported.
  std::vector<double> mass_points() const
  {
    std::vector<double> pts = grid_;
    pts.push_back(upper_edge_);
    return pts;
  }

  //! True for each interior index 1..m (stored at [j-1]) that is an
  //! endpoint of at least one informative cell.
  std::vector<bool> referenced() const
  {
    std::vector<bool> ref(grid_.size(), false);
    for (const auto& c : cells_) {
      if (c.lower >= 1)
        ref[c.lower - 1] = true;
      if (c.upper <= grid_.size())
        ref[c.upper - 1] = true;
    }
    return ref;
  }

  //! The same problem with unreferenced interior points removed; `kept`
  //! receives the surviving original indices (1-based).
  ReducedProblem without_unreferenced(std::vector<std::size_t>& kept) const
  {
    const auto ref = referenced();
    std::vector<std::size_t> new_index(grid_.size() + 2, 0);
    std::vector<double> grid;
    kept.clear();
    for (std::size_t j = 1; j <= grid_.size(); ++j) {
      if (ref[j - 1]) {
        grid.push_back(grid_[j - 1]);
        kept.push_back(j);
        new_index[j] = kept.size();
      }
    }
    new_index[grid_.size() + 1] = kept.size() + 1;
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    idx.reserve(obs_index_.size());
    for (const auto& [i, j] : obs_index_) {
      // Unreferenced points never appear in obs_index except through
      // uninformative observations, which only touch 0 and m+1.
      idx.emplace_back(new_index[i], new_index[j]);
    }
    return ReducedProblem(std::move(grid), upper_edge_, std::move(idx));
  }

private:
  std::vector<double> grid_;
  double upper_edge_;
  std::vector<std::pair<std::size_t, std::size_t>> obs_index_;
  std::vector<CountCell> cells_;
  std::size_t uninformative_ = 0;
};

//! Preliminary reduction. Endpoints below the smallest right endpoint can be
//! given G = 0 and endpoints above the largest left endpoint G = 1 without
//! lowering the likelihood; the remaining distinct endpoints form the
//! interior grid. Tied endpoints share a grid point.
inline ReducedProblem reduce(const ObservationSet& sample)
{
  double min_right = sample[0].interval_right();
  double max_left = sample[0].interval_left();
  for (const auto& r : sample) {
    min_right = std::min(min_right, r.interval_right());
    max_left = std::max(max_left, r.interval_left());
  }

  std::vector<double> grid;
  double upper_edge = std::numeric_limits<double>::infinity();
  for (const auto& r : sample) {
    for (double x : { r.interval_left(), r.interval_right() }) {
      if (x >= min_right && x <= max_left)
        grid.push_back(x);
    }
    if (r.interval_right() > max_left)
      upper_edge = std::min(upper_edge, r.interval_right());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const std::size_t top = grid.size() + 1;
  auto index_of = [&](double x) -> std::size_t {
    if (x < min_right)
      return 0;
    if (x > max_left)
      return top;
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin()) + 1;
  };

  std::vector<std::pair<std::size_t, std::size_t>> obs_index;
  obs_index.reserve(sample.size());
  for (const auto& r : sample)
    obs_index.emplace_back(index_of(r.interval_left()), index_of(r.interval_right()));
  return ReducedProblem(std::move(grid), upper_edge, std::move(obs_index));
}

//! Unreduced problem on the integer day grid 1..max(S): cell d is the day
//! (d-1, d]. This is the support the EM iterations start from.
inline ReducedProblem day_grid_problem(const ObservationSet& sample)
{
  if (sample.scale() != TimeScale::discrete_days)
    throw ValidationError("day grid requires a discrete_days sample");
  double max_s = 0.0;
  for (const auto& r : sample)
    max_s = std::max(max_s, r.symptom_time());
  const auto last = static_cast<std::size_t>(max_s);

  std::vector<double> grid;
  for (std::size_t d = 1; d < last; ++d)
    grid.push_back(static_cast<double>(d));

  std::vector<std::pair<std::size_t, std::size_t>> obs_index;
  obs_index.reserve(sample.size());
  for (const auto& r : sample) {
    obs_index.emplace_back(static_cast<std::size_t>(r.interval_left()),
                           static_cast<std::size_t>(r.interval_right()));
  }
  return ReducedProblem(std::move(grid), max_s, std::move(obs_index));
}

} // namespace incubation
