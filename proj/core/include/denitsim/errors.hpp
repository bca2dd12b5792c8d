#pragma once

#include <stdexcept>
#include <string>

namespace denitsim {

/// Invalid configuration, file, or argument. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Integration blow-up, NaN/Inf in the state, or an actuation impossibility
/// (e.g. dosing into zero flow). CLI maps this to exit code 3.
class NumericalFault : public std::runtime_error {
 public:
  explicit NumericalFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace denitsim
