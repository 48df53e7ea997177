#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpplvv {

enum class ErrorKind {
  invalid_input,
  degenerate_data,
  not_enough_events,
  no_window,
  too_short,
  domain,
  numeric_overflow,
  blow_up,
  degenerate_design,
  fit_failed,
  no_estimate,
  degenerate_test,
  invalid_pairing,
  experiment_failed,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind; the
// pipeline records it as the skip reason and the CLI maps it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by the integrator; remembers the step at which the bound was hit.
class BlowUpError : public Error {
 public:
  BlowUpError(std::size_t step, const std::string& what)
      : Error(ErrorKind::blow_up, what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace lpplvv
