#pragma once

#include <stdexcept>
#include <string>

namespace rdlab {

// Raised for contract violations and numerical failures that the caller
// cannot recover from locally. Explosion of a path is *not* an error; it is
// reported through PathRecord.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rdlab
