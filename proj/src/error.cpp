#include "lpplvv/error.hpp"

namespace lpplvv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::degenerate_data: return "degenerate-data";
    case ErrorKind::not_enough_events: return "not-enough-events";
    case ErrorKind::no_window: return "no-window";
    case ErrorKind::too_short: return "too-short";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numeric_overflow: return "numeric-overflow";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::degenerate_design: return "degenerate-design";
    case ErrorKind::fit_failed: return "fit-failed";
    case ErrorKind::no_estimate: return "no-estimate";
    case ErrorKind::degenerate_test: return "degenerate-test";
    case ErrorKind::invalid_pairing: return "invalid-pairing";
    case ErrorKind::experiment_failed: return "experiment-failed";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace lpplvv
