#pragma once

#include <stdexcept>
#include <string>

namespace roskit {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Moment budgets or targets that no law in the requested class can satisfy.
class FeasibilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested evaluation method does not apply to the given law.
class UnsupportedMethodError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two independent evaluation routes disagree beyond tolerance.
class BranchMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A discretization grid cannot hold the law to the requested accuracy.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two laws handed to a comparison do not share the moments the comparison
/// presupposes.
class InvalidComparisonError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace roskit
