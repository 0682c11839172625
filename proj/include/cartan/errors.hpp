#pragma once

#include <stdexcept>
#include <string>

namespace cartan {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidForm : Error { using Error::Error; };
struct DegenerateBasis : Error { using Error::Error; };
struct DegenerateForm : Error { using Error::Error; };
struct InvalidPoint : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct ScenarioMismatch : Error { using Error::Error; };
struct InvalidDirection : Error { using Error::Error; };
struct DegenerateMetric : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct MarginViolation : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace cartan
