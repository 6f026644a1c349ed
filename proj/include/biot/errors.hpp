#ifndef BIOT_ERRORS_HPP
#define BIOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace biot {

/// Raised by solvers, factorizations and element construction when the
/// numerics break down (singular systems, degenerate triangles, NaN).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration; `key()` names the offending option.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace biot

#endif  // BIOT_ERRORS_HPP
