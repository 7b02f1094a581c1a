#pragma once

#include <stdexcept>

namespace scnet {

/// A physical or structural constraint of the circuit model is violated.
class DomainViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or document.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace scnet
