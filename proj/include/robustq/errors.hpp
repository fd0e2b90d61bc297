#pragma once

#include <stdexcept>
#include <string>

namespace robustq {

// Argument outside the mathematical domain of an operation (p outside (0,1), w <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Result is not representable (e.g. the kernel quantile at p = 1 is +inf).
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InvariantViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

class UnattainableBudget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace robustq
