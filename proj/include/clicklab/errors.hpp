// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace clicklab {

/// Base class for all clicklab errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration, parameter, or input value. The message names the
/// offending field (e.g. "state.q_sq: must lie in [0,1)").
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// A truncated representation cannot meet the requested tail tolerance.
class TruncationError : public Error {
  public:
    using Error::Error;
};

/// A combinatorial object would exceed a configured size cap.
class SizeError : public Error {
  public:
    using Error::Error;
};

/// A statistic has a degenerate denominator (e.g. vacuum data in Q_bin).
class DegenerateStatisticsError : public Error {
  public:
    using Error::Error;
};

/// Malformed file content; carries a 1-based line number when known.
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    long line() const { return line_; }

  private:
    long line_;
};

/// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
  public:
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public Error {
  public:
    using Error::Error;
};

}  // namespace clicklab
