#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmrc {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its tolerance.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A sensor's Riesz representer is (numerically) in the span of the preceding ones.
class DegenerateSensor : public std::runtime_error {
 public:
  DegenerateSensor(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// V_n intersects the orthogonal complement of W: the one-space map does not exist.
class UnstableSpace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside one stage of the benchmark pipeline.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace rmrc
