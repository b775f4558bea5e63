#pragma once

#include <stdexcept>
#include <string>

namespace lorag {

// Root of every exception thrown by the library. Module-specific failures
// derive from it so callers can catch broadly or narrowly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lorag
