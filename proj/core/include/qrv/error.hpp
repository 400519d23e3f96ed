#pragma once

#include <stdexcept>
#include <string>

namespace qrv {

// Invalid parameters: quantile grids, block lengths, weights, levels.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be estimated on: too short, non-positive prices,
// malformed CSV rows.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-conditioned linear algebra or non-PSD covariance structures.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qrv
