#pragma once

#include <stdexcept>
#include <string>

namespace dsmt {

// Error categories map onto the CLI exit-code contract:
// 2 = config, 3 = data, 4 = numeric.
class Error : public std::runtime_error {
public:
    enum class Kind { Config = 2, Data = 3, Numeric = 4 };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

    static Error config(std::string msg) { return Error(Kind::Config, std::move(msg)); }
    static Error data(std::string msg) { return Error(Kind::Data, std::move(msg)); }
    static Error numeric(std::string msg) { return Error(Kind::Numeric, std::move(msg)); }

private:
    Kind kind_;
};

} // namespace dsmt
