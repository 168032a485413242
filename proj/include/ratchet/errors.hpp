#pragma once

#include <stdexcept>
#include <string>

namespace ratchet {

// Bad or incomplete user input (config keys, units, ranges). CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that goes wrong while doing the physics. CLI exit code 2.
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRootError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class DegenerateDenominatorError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class OverlapAmbiguityError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class StepUnderflowError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class InvariantError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

}  // namespace ratchet
