#pragma once

#include <stdexcept>
#include <string>

namespace csmc {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
  public:
    using Error::Error;
};

class InvalidInput : public Error {
  public:
    using Error::Error;
};

class CapacityError : public Error {
  public:
    using Error::Error;
};

class DegenerateModel : public Error {
  public:
    using Error::Error;
};

/// Thrown when a requested variant needs a model capability (e.g. transition
/// densities) that the model does not provide.
class CapabilityError : public Error {
  public:
    using Error::Error;
};

class InvalidReference : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

/// All weights vanished. `time()` is the 0-based time step, or -1 when the
/// weights did not come from a particle system.
class DegenerateWeights : public Error {
  public:
    explicit DegenerateWeights(int time)
        : Error(time < 0 ? std::string("degenerate weights: all zero or invalid")
                         : "degenerate weights at time step " + std::to_string(time + 1)),
          time_(time)
    {
    }
    DegenerateWeights(int time, const std::string& what) : Error(what), time_(time) {}

    [[nodiscard]] int time() const noexcept { return time_; }

  private:
    int time_;
};

}  // namespace csmc
