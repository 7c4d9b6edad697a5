#pragma once

#include <stdexcept>
#include <string>

namespace toda {

// Exit-code classes used by the CLI: validation 2, numerical 3, io 4.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an exact identity that the construction guarantees fails.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace toda
