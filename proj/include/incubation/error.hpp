#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incubation {

//! Malformed input text. Carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error
{
public:
  ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what)
    , line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

//! Input that parses but violates a domain invariant.
class ValidationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! A numerical procedure could not produce a meaningful result.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace incubation
