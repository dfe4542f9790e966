#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsbse {

/// One byte per binary variable, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

enum class Sense { minimize, maximize };

/// Selects the kernel flavour. Both must produce identical results.
enum class Exec { serial, parallel };

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Invalid argument or violated precondition.
class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Sampler cannot handle the problem (e.g. exact enumeration too large).
class CapabilityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact solver exhausted its node or time budget.
class ResourceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qsbse
