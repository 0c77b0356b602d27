// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eventaug {

/// Base of every error thrown by the library. The CLI maps subclasses to
/// process exit codes (see run_command()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Wrong magic or otherwise malformed binary/text layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncatedError : public FormatError {
 public:
  TruncatedError(const std::string& what, std::size_t expected, std::size_t actual)
      : FormatError(what + " (expected " + std::to_string(expected) + " bytes, got " +
                    std::to_string(actual) + ")"),
        expected_(expected),
        actual_(actual) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition or invariant of an input value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// One problem found while parsing a line-oriented file.
struct LineIssue {
  std::size_t line = 0;
  std::string message;
};

class CorpusError : public ValidationError {
 public:
  explicit CorpusError(std::vector<LineIssue> issues)
      : ValidationError(summarize(issues)), issues_(std::move(issues)) {}
  const std::vector<LineIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarize(const std::vector<LineIssue>& issues) {
    std::string out = std::to_string(issues.size()) + " corpus error(s)";
    for (const auto& issue : issues) {
      out += "\n  line " + std::to_string(issue.line) + ": " + issue.message;
    }
    return out;
  }
  std::vector<LineIssue> issues_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Provider request failed after all retries.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int status = 0) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// The provider answered, but the answer is unusable (empty, or it broke
/// the entity-preservation contract). Callers may skip the message.
class AugmentationRejected : public Error {
 public:
  using Error::Error;
};

/// Training data cannot support the requested model (e.g. a single class).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace eventaug
