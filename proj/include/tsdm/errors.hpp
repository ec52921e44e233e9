#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsdm {

/// Input rejected: malformed files, invalid parameters, inconsistent sizes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The explicit integration produced non-finite values.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// File system or stream failure, including damaged exchange files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsdm
