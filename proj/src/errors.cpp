#include "chaosqfc/errors.hpp"

namespace chaosqfc {

namespace {
std::string join(const std::vector<std::string>& issues) {
  std::string s = "invalid configuration";
  for (const auto& i : issues) s += "\n  " + i;
  return s;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

StageError::StageError(std::string stage, const std::string& cause, bool convergence)
    : std::runtime_error("stage " + stage + ": " + cause), stage_(std::move(stage)), convergence_(convergence) {}

}  // namespace chaosqfc
