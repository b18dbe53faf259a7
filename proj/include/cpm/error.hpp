#pragma once

#include <stdexcept>
#include <string>

namespace cpm {

// Broad failure classes; the CLI maps each to its own exit code.
enum class ErrorClass { Validation, Io, Computation };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorClass::Validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorClass::Io, what) {}
};

class ComputationError : public Error {
public:
    explicit ComputationError(const std::string& what) : Error(ErrorClass::Computation, what) {}
};

#define CPM_DEFINE_ERROR(Name, Base)                                      \
    class Name : public Base {                                            \
    public:                                                               \
        explicit Name(const std::string& what) : Base(#Name ": " + what) {} \
    };

CPM_DEFINE_ERROR(NonFiniteGap, ComputationError)
CPM_DEFINE_ERROR(TargetOutOfRange, ValidationError)
CPM_DEFINE_ERROR(WindowExceedsHorizon, ValidationError)
CPM_DEFINE_ERROR(NonFiniteInput, ValidationError)
CPM_DEFINE_ERROR(DegenerateLabels, ValidationError)
CPM_DEFINE_ERROR(SingularSystem, ComputationError)
CPM_DEFINE_ERROR(DimensionMismatch, ValidationError)
CPM_DEFINE_ERROR(LengthMismatch, ValidationError)

#undef CPM_DEFINE_ERROR

}  // namespace cpm
