#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace kaf {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string &what, long line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

class SpacingError : public Error {
public:
  using Error::Error;
};

class DivergenceError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class DegenerateDataError : public Error {
public:
  using Error::Error;
};

class TuningError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

/// Requested more eigenpairs than the operator numerically supports.
class RankDeficiencyError : public Error {
public:
  RankDeficiencyError(Eigen::Index requested, Eigen::Index usable)
      : Error("rank deficiency: requested " + std::to_string(requested) +
              " eigenpairs, usable rank is " + std::to_string(usable)),
        requested_(requested), usable_(usable) {}
  Eigen::Index requested() const { return requested_; }
  Eigen::Index usable_rank() const { return usable_; }

private:
  Eigen::Index requested_;
  Eigen::Index usable_;
};

} // namespace kaf
