#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rpeak {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong with this record" catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or missing header / structure in an input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed file whose content is not acceptable (non-finite sample, ...).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::int64_t row)
      : Error(what), row_(row) {}
  // 1-based data row the problem was found on, or -1 when not row-specific.
  std::int64_t row() const noexcept { return row_; }

 private:
  std::int64_t row_;
};

class UnsupportedRateError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// BayeSlope could not be initialized (e.g. flat init span).
class InitError : public Error {
 public:
  using Error::Error;
};

class TraceError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Score requested on an empty match (tp+fp+fn == 0, or tp == 0 for timing).
class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

// Two inputs disagree on physical units (sampling rate, ...).
class UnitError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpeak
