#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Base for every error the toolkit raises on purpose. `kind()` is the stable
/// name used in structured (JSON) error reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define HARDY_DEFINE_ERROR(Name)                                               \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    };

HARDY_DEFINE_ERROR(DomainError)
HARDY_DEFINE_ERROR(StepFailure)
HARDY_DEFINE_ERROR(NotBlowingUp)
HARDY_DEFINE_ERROR(BracketFailure)
HARDY_DEFINE_ERROR(IncompatibleProblems)
HARDY_DEFINE_ERROR(NonConvergence)
HARDY_DEFINE_ERROR(RegimeError)
HARDY_DEFINE_ERROR(PreconditionError)
HARDY_DEFINE_ERROR(InsufficientSamples)
HARDY_DEFINE_ERROR(NonpositiveValues)

#undef HARDY_DEFINE_ERROR

} // namespace hardy
