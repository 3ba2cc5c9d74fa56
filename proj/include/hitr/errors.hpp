#pragma once

#include <stdexcept>
#include <string>

namespace hitr {

// Error in user-supplied data or a violated runtime contract (empty corpus,
// degenerate distribution, exhausted group, ...). The CLI maps this to
// exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hitr
