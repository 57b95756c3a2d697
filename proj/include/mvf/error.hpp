#pragma once

#include <stdexcept>
#include <string>

namespace mvf {

/// Base exception for every failure raised by the library. `code()` is a short
/// machine-readable tag ("io", "schema", "precondition", ...) used by the CLI
/// when it prints its error line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        throw Error("precondition", what);
    }
}

} // namespace mvf
