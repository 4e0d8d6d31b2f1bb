#pragma once

#include <stdexcept>
#include <string>

namespace specfuse {

// User errors map to CLI exit code 2, internal errors to exit code 1.
class Error : public std::runtime_error {
public:
    enum class Kind { User, Internal };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

[[noreturn]] inline void throw_user(std::string msg) {
    throw Error(Error::Kind::User, std::move(msg));
}

[[noreturn]] inline void throw_internal(std::string msg) {
    throw Error(Error::Kind::Internal, std::move(msg));
}

} // namespace specfuse
