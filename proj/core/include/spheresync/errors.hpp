#pragma once

#include <stdexcept>
#include <string>

namespace spheresync {

/// Precondition or type-invariant violation on caller-supplied data.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what);
};

/// Non-finite state or a numerically degenerate problem detected at run time.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what);
};

/// File-system failure. The message always names the offending path.
/// The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace spheresync
