#pragma once

#include <stdexcept>
#include <string>

namespace aviary {

/// File could not be opened / read / written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// File opened fine but its contents are not what the format requires.
class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

/// Structured input (config, manifest, data table) violates a documented rule.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Optimizer produced a non-finite loss; carries the epoch it happened in.
class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(const std::string& what, int epoch)
      : std::runtime_error(what), epoch(epoch) {}
  int epoch;
};

}  // namespace aviary
