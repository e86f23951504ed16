#pragma once

#include <stdexcept>
#include <string>

namespace traceshape {

// Invalid argument to a core routine (n = 0, page not in W_1, ...).
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Configuration rejected at load or validation time. `key` names the
// offending dotted key when one is known; `line` is 1-based, 0 if unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, int line, const std::string& what)
        : std::runtime_error(format(key, line, what)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& what) {
        std::string s;
        if (line > 0) s += "line " + std::to_string(line) + ": ";
        if (!key.empty()) s += key + ": ";
        return s + what;
    }

    std::string key_;
    int line_;
};

// Combination search exceeded its partial-solution cap.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace traceshape
