#pragma once

#include <stdexcept>
#include <string>

namespace cbs {

/// Categories used to prefix diagnostics so callers (and the CLI) can
/// classify failures without string matching on free-form text.
enum class ErrorKind {
    parse,
    dimension,
    domain,
    convergence,
    infeasible,
    degenerate_anchor,
    ill_conditioned,
    empty_support,
    degenerate_variance,
    infinite_variance,
    contract_violation,
    undefined_sd,
    io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

/// Carries the bracket the iteration was in when it gave up.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& message, double last_low, double last_high)
        : Error(ErrorKind::convergence, message), last_low(last_low), last_high(last_high) {}

    double last_low;
    double last_high;
};

}  // namespace cbs
