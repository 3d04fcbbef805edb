#pragma once

#include <stdexcept>
#include <string>

namespace wbergman {

/// Invalid arguments: degenerate grids, collapsing margins, bad weight parameters.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A set that the caller needs to be nonempty turned out empty (E ∩ Ω, E ∩ K).
class EmptySetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Every Gram eigenvalue fell below the floor.
class DegenerateBasisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Ratio with a vanishing denominator (f = 0, i.e. u holomorphic).
class UndefinedRatioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Config parse/validation failure; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace wbergman
