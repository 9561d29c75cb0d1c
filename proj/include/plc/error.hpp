#pragma once

#include <stdexcept>
#include <string>

namespace plc {

/// Vector arguments whose lengths disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state or action index that does not exist in the model.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A parameter that violates a documented constraint. The message names the
/// violated constraint.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace plc
