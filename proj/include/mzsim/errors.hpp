#pragma once

#include <stdexcept>
#include <string>

namespace mzsim {

/// Non-finite or out-of-domain numeric input to a phase operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment configuration. The message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A configuration key that the schema does not define.
class UnknownKeyError : public ConfigError {
 public:
  explicit UnknownKeyError(const std::string& key, const std::string& source = {})
      : ConfigError(key, source.empty() ? "unknown key" : "unknown key (in " + source + ")") {}
};

/// A photon was asked to interact before it existed.
class SequencingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Caller violated an operation's preconditions (empty input, bad counts, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read, parsed or written. The message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File contents are not valid JSON/CSV for the expected schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mzsim
