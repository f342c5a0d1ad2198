#pragma once

#include <stdexcept>
#include <string>

namespace fbmdim {

/// Circulant embedding produced a significantly negative eigenvalue.
class SynthesisError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature hit its subdivision cap before reaching the tolerance.
class QuadratureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or corrupted binary path cache.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Request exceeds the sample budget.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Density or dimension estimator has nothing to fit.
class EstimationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fbmdim
