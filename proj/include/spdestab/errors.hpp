#pragma once

#include <stdexcept>
#include <string>

namespace spdestab {

/// Precondition failure on a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A derived quantity lands outside the range its defining theorem requires.
class ConditionViolated : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InvalidCovariance : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Log-linear fit requested on data with non-positive entries.
class FitUndefined : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed configuration; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace spdestab
