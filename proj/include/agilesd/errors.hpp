#pragma once

#include <stdexcept>
#include <string>

namespace agilesd {

// Raised when an input violates an operation's preconditions.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when an internal consistency check fails (e.g. a computed
// throughput above the window bound, or a degenerate agility state).
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace agilesd
