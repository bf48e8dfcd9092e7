// Error taxonomy shared by all confuse components.
#pragma once

#include <stdexcept>
#include <string>

namespace confuse {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value, unknown key, unresolvable model id, bad k, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between tensors that must agree element-wise.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Mask rectangle out of bounds or otherwise malformed geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// A surrogate adapter failed to evaluate; carries the model id.
class AdapterError : public Error {
 public:
  AdapterError(std::string model_id, const std::string& what)
      : Error("adapter '" + model_id + "': " + what), model_id_(std::move(model_id)) {}
  const std::string& model_id() const noexcept { return model_id_; }

 private:
  std::string model_id_;
};

// Adapter cannot provide a requested capability (e.g. gradients).
class CapabilityError : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

// Held-out transfer protocol cannot be satisfied by the given models.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Operation on empty or inconsistent state (e.g. argmax of an empty trace).
class StateError : public Error {
 public:
  using Error::Error;
};

// ECR denominator is zero; never silently mapped to infinity.
class DenominatorError : public Error {
 public:
  using Error::Error;
};

// Mode/outcome classification is missing a required input.
class ClassificationInputError : public Error {
 public:
  using Error::Error;
};

// File I/O and format violations.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace confuse
