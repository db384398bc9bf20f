#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

// Raised whenever an input violates an operation's precondition. The message
// names the offending object (edge, vertex, parameter) so callers can surface
// it unchanged.
class Rejection : public std::invalid_argument {
public:
    explicit Rejection(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace mixlab
