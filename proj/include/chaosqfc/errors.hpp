#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chaosqfc {

// Precondition violations and malformed arguments.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Split-step solver could not meet the Manley-Rowe drift tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double drift)
      : std::runtime_error(what), drift_(drift) {}
  double drift() const noexcept { return drift_; }

 private:
  double drift_;
};

// One entry per offending field, "field: message".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wraps a failure inside simulate_link and friends with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause, bool convergence);
  const std::string& stage() const noexcept { return stage_; }
  bool convergence() const noexcept { return convergence_; }

 private:
  std::string stage_;
  bool convergence_;
};

// Runs f(); rethrows anything it throws as a StageError tagged with stage.
template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ConvergenceError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

}  // namespace chaosqfc
