// SPDX-License-Identifier: Apache-2.0

#ifndef IPD_ERRORS_H_
#define IPD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ipd {

// Root of every error the toolkit raises on bad input or unusable data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or invariant violation on caller-supplied values.
class InputError : public Error {
 public:
  using Error::Error;
};

// Three source points that do not span the plane.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

// Registration and matching produced zero instance pairs.
class NoInstancesError : public Error {
 public:
  using Error::Error;
};

// A required cross-validation cell is missing.
class IncompleteResultsError : public Error {
 public:
  using Error::Error;
};

// Average precision with no ground truth at all.
class UndefinedApError : public Error {
 public:
  using Error::Error;
};

// Malformed label line. Carries the source name and 1-based line number.
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what),
        source_(source),
        line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

// Dataset manifest could not be loaded; message names the offending entry.
class LoadError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace ipd

#endif  // IPD_ERRORS_H_
