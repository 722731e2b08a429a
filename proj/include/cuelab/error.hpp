#pragma once

#include <stdexcept>
#include <string>

namespace cuelab {

enum class ErrorCode {
    input = 1,
    config = 2,
    numerical = 3,
    io = 4,
    insufficient_data = 5,
    divergence = 6,
};

/// Base exception for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline Error input_error(const std::string& what) { return {ErrorCode::input, what}; }
inline Error config_error(const std::string& what) { return {ErrorCode::config, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorCode::numerical, what}; }
inline Error io_error(const std::string& what) { return {ErrorCode::io, what}; }

} // namespace cuelab
