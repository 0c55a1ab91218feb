#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace erdistill {

// All pipeline failures carry a stable machine-readable code (e.g. "MissingId",
// "ScoreOutOfRange") next to the human-readable message; the CLI emits the code
// in its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message),
          code_(std::move(code)),
          message_(message) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string code_;
    std::string message_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

}  // namespace erdistill
