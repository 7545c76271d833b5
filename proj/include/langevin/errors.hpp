#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace langevin {

/// Bad caller input: dimension mismatch, out-of-range argument.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A drift model produced something it must not (non-finite output).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration rejected before any computation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested feature outside what the library supports.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-algebra failure (singular covariance, failed square root).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chain left the representable range. Carries the offending state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::uint64_t chain,
                  std::uint64_t step, std::vector<double> state)
      : std::runtime_error(what),
        chain_(chain),
        step_(step),
        state_(std::move(state)) {}

  std::uint64_t chain() const noexcept { return chain_; }
  std::uint64_t step() const noexcept { return step_; }
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  std::uint64_t chain_;
  std::uint64_t step_;
  std::vector<double> state_;
};

}  // namespace langevin
