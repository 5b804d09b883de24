#pragma once

#include <stdexcept>
#include <string>

namespace fer {

/// Error categories, aligned with the CLI exit codes.
enum class ErrorCode : int {
    Config = 2,   // bad flags, bad config file, invalid hyperparameters
    Data = 3,     // manifest/landmark/image validation failures
    Numeric = 4,  // non-finite values, rejected optimizer steps
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }
    const char* code_name() const {
        switch (code_) {
            case ErrorCode::Config: return "config";
            case ErrorCode::Data: return "data";
            case ErrorCode::Numeric: return "numeric";
        }
        return "unknown";
    }

private:
    ErrorCode code_;
};

inline Error config_error(const std::string& msg) { return Error(ErrorCode::Config, msg); }
inline Error data_error(const std::string& msg) { return Error(ErrorCode::Data, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorCode::Numeric, msg); }

}  // namespace fer
