#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace meshstyle {

// File access or encoding failures.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a documented precondition or invariant.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or diverging optimization.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(const std::string&)>;

// Non-fatal diagnostics (dropped faces, normalized planes, truncated
// pyramids) go through this hook. Default handler writes to stderr.
void warn(const std::string& message);
void set_warning_handler(WarningHandler handler);

}  // namespace meshstyle
