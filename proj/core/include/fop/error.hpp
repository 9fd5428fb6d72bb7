#pragma once

#include <stdexcept>
#include <string>

namespace fop {

/// Violated precondition on an operation's inputs (shape mismatch,
/// asymmetric matrix where a symmetric one is required, ...).
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid run configuration: unknown optimizer kind, bad grid, missing file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed external data: IDX files, run artifacts, non-finite input values.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fop
