#pragma once

#include "error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace incubation {

enum class TimeScale
{
  discrete_days,
  continuous
};

//! One traveler: exit time E from the exposure window [0, E], symptom onset
//! time S and the indicator delta = 1{S <= E}. The incubation time is then
//! known to lie in the censoring interval (max(S - E, 0), S].
class Observation
{
public:
  Observation(double exit_time, double symptom_time, bool delta)
    : exit_(exit_time)
    , symptom_(symptom_time)
    , delta_(delta)
    , left_(delta ? 0.0 : std::max(symptom_time - exit_time, 0.0))
  {
    validate();
  }

  //! Observation with delta derived from the two times.
  static Observation from_times(double exit_time, double symptom_time)
  {
    return Observation(exit_time, symptom_time, symptom_time <= exit_time);
  }

  //! Observation from its censoring interval (left, symptom]. The left
  //! endpoint is stored exactly; E is recovered as S - left (or S when
  //! left == 0, i.e. symptomatic before exit).
  static Observation from_interval(double left, double symptom_time)
  {
    if (!(left >= 0.0))
      throw ValidationError("interval left endpoint must be nonnegative");
    if (!(symptom_time > left))
      throw ValidationError("symptom time must exceed the interval left endpoint");
    const bool delta = left == 0.0;
    Observation obs(delta ? symptom_time : symptom_time - left, symptom_time, delta);
    obs.left_ = left;
    return obs;
  }

  double exit_time() const noexcept { return exit_; }
  double symptom_time() const noexcept { return symptom_; }
  bool delta() const noexcept { return delta_; }
  double interval_left() const noexcept { return left_; }
  double interval_right() const noexcept { return symptom_; }

  friend bool operator==(const Observation& a, const Observation& b) noexcept
  {
    return a.left_ == b.left_ && a.symptom_ == b.symptom_ && a.delta_ == b.delta_;
  }

private:
  void validate() const
  {
    if (!std::isfinite(exit_) || !std::isfinite(symptom_))
      throw ValidationError("observation times must be finite");
    if (!(symptom_ > 0.0))
      throw ValidationError("symptom time must be positive");
    if (!(exit_ >= 0.0))
      throw ValidationError("exit time must be nonnegative");
    // delta = 0 with S == E only arises from rounding; the interval is (0, S]
    // under either value of delta.
    if (delta_ && symptom_ > exit_)
      throw ValidationError("delta = 1 requires symptom time <= exit time");
    if (!delta_ && symptom_ < exit_)
      throw ValidationError("delta = 0 requires symptom time >= exit time");
    if (!(left_ < symptom_))
      throw ValidationError("empty censoring interval (exit time must be positive)");
  }

  double exit_;
  double symptom_;
  bool delta_;
  double left_;
};

class ObservationSet
{
public:
  ObservationSet(std::vector<Observation> records, TimeScale scale)
    : records_(std::move(records))
    , scale_(scale)
  {
    if (records_.empty())
      throw ValidationError("observation set is empty");
    if (scale_ == TimeScale::discrete_days) {
      for (const auto& r : records_) {
        if (!is_integer(r.exit_time()) || !is_integer(r.symptom_time()))
          throw ValidationError("discrete_days sample contains non-integer times");
      }
    }
  }

  //! Discrete when every time is an integer, continuous otherwise.
  static ObservationSet with_inferred_scale(std::vector<Observation> records)
  {
    const bool integral = std::all_of(records.begin(), records.end(), [](const Observation& r) {
      return is_integer(r.exit_time()) && is_integer(r.symptom_time());
    });
    return ObservationSet(std::move(records),
                          integral ? TimeScale::discrete_days : TimeScale::continuous);
  }

  const std::vector<Observation>& records() const noexcept { return records_; }
  TimeScale scale() const noexcept { return scale_; }
  std::size_t size() const noexcept { return records_.size(); }
  const Observation& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  std::vector<double> exit_times() const
  {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_)
      out.push_back(r.exit_time());
    return out;
  }

  friend bool operator==(const ObservationSet& a, const ObservationSet& b)
  {
    return a.scale_ == b.scale_ && a.records_ == b.records_;
  }

private:
  static bool is_integer(double x) { return std::floor(x) == x; }

  std::vector<Observation> records_;
  TimeScale scale_;
};

namespace detail {

//! Splits text into numeric rows; '#' lines and blank lines are skipped.
//! Each returned row remembers its 1-based line number.
struct NumericRow
{
  std::size_t line;
  std::vector<double> values;
};

inline std::vector<NumericRow> read_numeric_rows(std::string_view text, std::size_t arity)
{
  std::vector<NumericRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#')
      continue;

    NumericRow row{ line_no, {} };
    std::size_t i = first;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
        ++i;
      if (i >= line.size())
        break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
        ++j;
      std::string_view token = line.substr(i, j - i);
      if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
        throw ParseError(line_no, "not a number: '" + std::string(line.substr(i, j - i)) + "'");
      row.values.push_back(value);
      i = j;
    }
    if (row.values.size() != arity) {
      throw ParseError(line_no,
                       "expected " + std::to_string(arity) + " columns, found " +
                         std::to_string(row.values.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class Fn>
Observation at_line(std::size_t line, Fn&& make)
{
  try {
    return make();
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
}

} // namespace detail

//! Two-column format: (S - E, S) per row. S - E == 0 marks symptom onset
//! before exit.
inline ObservationSet parse_observations(std::string_view text)
{
  std::vector<Observation> records;
  for (const auto& row : detail::read_numeric_rows(text, 2)) {
    const double left = row.values[0];
    const double symptom = row.values[1];
    records.push_back(detail::at_line(row.line, [&] {
      if (left < 0.0)
        throw ValidationError("negative S - E");
      return Observation::from_interval(left, symptom);
    }));
  }
  if (records.empty())
    throw ValidationError("no observations in input");
  return ObservationSet::with_inferred_scale(std::move(records));
}

//! Three-column calendar format: arrival, departure, symptom onset on a
//! shared origin. Times are shifted so that arrival is 0; a symptom onset
//! before departure sets the exit time to the onset time.
inline ObservationSet parse_raw_records(std::string_view text)
{
  std::vector<Observation> records;
  for (const auto& row : detail::read_numeric_rows(text, 3)) {
    const double arrival = row.values[0];
    const double departure = row.values[1];
    const double onset = row.values[2];
    records.push_back(detail::at_line(row.line, [&] {
      if (departure < arrival)
        throw ValidationError("departure before arrival");
      const double exit = departure - arrival;
      const double symptom = onset - arrival;
      if (!(symptom > 0.0))
        throw ValidationError("symptom onset not after entrance");
      if (symptom <= exit)
        return Observation(symptom, symptom, true);
      return Observation(exit, symptom, false);
    }));
  }
  if (records.empty())
    throw ValidationError("no observations in input");
  return ObservationSet(std::move(records), TimeScale::discrete_days);
}

//! Two-column text, exact for doubles (max_digits10).
inline std::string serialize(const ObservationSet& sample)
{
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : sample)
    out << r.interval_left() << ' ' << r.symptom_time() << '\n';
  return out.str();
}

} // namespace incubation
