#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace paddy {

/// Invalid space, parameter, or runner configuration.
class config_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An objective returned NaN or infinity; carries the offending point.
class evaluation_error : public std::runtime_error {
public:
  evaluation_error(const std::string& message, std::vector<double> params)
      : std::runtime_error(message), params_(std::move(params)) {}

  const std::vector<double>& params() const { return params_; }

private:
  std::vector<double> params_;
};

}  // namespace paddy
