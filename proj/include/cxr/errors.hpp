#ifndef CXR_ERRORS_HPP
#define CXR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cxr {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pretrained weight loading: "offline" (file absent) vs "corrupt"
// (present but unreadable) are distinct failures.
struct WeightsUnavailableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WeightsCorruptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cxr

#endif
