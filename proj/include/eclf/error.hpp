#pragma once

#include <exception>
#include <string>

namespace eclf {

/// Base of every library error. `kind()` is a stable, machine-readable tag
/// used by the CLI when reporting failures.
class Error : public std::exception {
public:
    Error(std::string kind, std::string message) : kind_(std::move(kind)), message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }
    const std::string& kind() const noexcept { return kind_; }

    /// Prefixes the message with the name of the stage that raised it.
    void add_context(const std::string& stage) { message_ = stage + ": " + message_; }

private:
    std::string kind_;
    std::string message_;
};

#define ECLF_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

ECLF_DEFINE_ERROR(ParseError);
ECLF_DEFINE_ERROR(GapError);
ECLF_DEFINE_ERROR(DuplicateError);
ECLF_DEFINE_ERROR(InsufficientDataError);
ECLF_DEFINE_ERROR(RangeError);
ECLF_DEFINE_ERROR(AlignmentError);
ECLF_DEFINE_ERROR(DegenerateInputError);
ECLF_DEFINE_ERROR(DivergenceError);
ECLF_DEFINE_ERROR(ConfigError);
ECLF_DEFINE_ERROR(MissingFeatureError);
ECLF_DEFINE_ERROR(DivisionByZeroError);
ECLF_DEFINE_ERROR(IoError);

#undef ECLF_DEFINE_ERROR

}  // namespace eclf
