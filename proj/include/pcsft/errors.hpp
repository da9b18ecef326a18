#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pcsft {

// Malformed arguments: zero vectors, bad dimensions, non-normalized directions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operator that should be positive semidefinite has an eigenvalue below -tol_psd.
class NotPsdError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The field carries no energy, so there is no normalized (epistemic) image.
class ZeroFieldError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UndefinedG2Error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration validation failure. Carries every offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : std::invalid_argument(what), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

}  // namespace pcsft
