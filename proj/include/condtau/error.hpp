#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace condtau {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

// Every kernel weight vanishes at the query point: the estimator is undefined there.
class AllWeightsZero : public Error {
public:
  AllWeightsZero() : Error("all kernel weights are zero at the query point") {}
};

// A single observation carries all the weight (s_n = 1).
class DegenerateWindow : public Error {
public:
  DegenerateWindow() : Error("degenerate window: a single observation carries all the weight") {}
};

// Fewer observations with nonzero weight than a plug-in statistic needs.
class SparseWindow : public Error {
public:
  explicit SparseWindow(std::size_t needed)
      : Error("fewer than " + std::to_string(needed) + " observations carry nonzero weight") {}
};

class ConditionViolated : public Error {
public:
  explicit ConditionViolated(std::string condition)
      : Error("condition violated: " + condition), condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

private:
  std::string condition_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), message_(what), line_(line) {}
  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string message_;
  std::size_t line_;
};

}  // namespace condtau
