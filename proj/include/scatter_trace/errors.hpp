#pragma once

#include <stdexcept>
#include <string>

namespace scatter_trace {

// Exit-code classes used by the CLI: config/input = 2, numerical = 3,
// validation mismatch = 4.
enum class ErrorClass { config = 2, numerical = 3, validation = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what)
        : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

#define SCATTER_TRACE_ERROR(Name, Class)                      \
    class Name : public Error {                               \
    public:                                                   \
        explicit Name(const std::string& what)                \
            : Error(ErrorClass::Class, what) {}               \
    };

SCATTER_TRACE_ERROR(ConfigError, config)
SCATTER_TRACE_ERROR(FormatError, config)
SCATTER_TRACE_ERROR(UnitarityError, config)

SCATTER_TRACE_ERROR(DomainError, numerical)
SCATTER_TRACE_ERROR(GridError, numerical)
SCATTER_TRACE_ERROR(IntegrationError, numerical)
SCATTER_TRACE_ERROR(BranchError, numerical)
SCATTER_TRACE_ERROR(RangeError, numerical)
SCATTER_TRACE_ERROR(AccuracyError, numerical)
SCATTER_TRACE_ERROR(PoleError, numerical)
SCATTER_TRACE_ERROR(TailError, numerical)
SCATTER_TRACE_ERROR(ConvergenceError, numerical)
SCATTER_TRACE_ERROR(ResolutionError, numerical)
SCATTER_TRACE_ERROR(MissedLevelError, numerical)
SCATTER_TRACE_ERROR(ExtrapolationError, numerical)
SCATTER_TRACE_ERROR(TruncationError, numerical)

SCATTER_TRACE_ERROR(ValidationError, validation)

#undef SCATTER_TRACE_ERROR

}  // namespace scatter_trace
