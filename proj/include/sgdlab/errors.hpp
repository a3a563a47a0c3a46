#ifndef SGDLAB_ERRORS_HPP_
#define SGDLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sgdlab {

// Malformed or incomplete problem definition (unknown sample id, point outside
// all cells, missing oracle, missing critical-set descriptor).
class ProblemError : public std::runtime_error {
 public:
  explicit ProblemError(const std::string& what) : std::runtime_error(what) {}
};

// Selection-policy misuse: missing FixedAtKinks entry at a hit kink, or an
// entry outside the Clarke set.
class PolicyError : public std::runtime_error {
 public:
  explicit PolicyError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An iterate left the guard ball (||x|| > 1e12) or became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace sgdlab

#endif  // SGDLAB_ERRORS_HPP_
