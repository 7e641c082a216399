#pragma once

#include <stdexcept>
#include <string>

namespace dtc {

/// Error categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Dimension,
  UnsupportedConfiguration,
  Index,
  Argument,
  Domain,
  ResourceLimit,
  NumericalFailure,
  DegenerateInput,
  Validation,
  MissingColumn,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define DTC_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

DTC_DEFINE_ERROR(DimensionError, Dimension)
DTC_DEFINE_ERROR(UnsupportedConfigurationError, UnsupportedConfiguration)
DTC_DEFINE_ERROR(IndexError, Index)
DTC_DEFINE_ERROR(ArgumentError, Argument)
DTC_DEFINE_ERROR(DomainError, Domain)
DTC_DEFINE_ERROR(ResourceLimitError, ResourceLimit)
DTC_DEFINE_ERROR(NumericalFailureError, NumericalFailure)
DTC_DEFINE_ERROR(DegenerateInputError, DegenerateInput)
DTC_DEFINE_ERROR(MissingColumnError, MissingColumn)

#undef DTC_DEFINE_ERROR

/// Config validation failure; carries the JSON path of the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(ErrorKind::Validation, field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace dtc
