#pragma once

#include <stdexcept>
#include <string>

namespace pedhat {

// Base of every error raised by the toolkit. `kind()` is a stable,
// machine-readable tag used by the CLI's --json error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PEDHAT_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(#Name, what) {}       \
  };

PEDHAT_DEFINE_ERROR(GimbalLock)
PEDHAT_DEFINE_ERROR(NonMonotonicTime)
PEDHAT_DEFINE_ERROR(StepTooLarge)
PEDHAT_DEFINE_ERROR(UnknownPattern)
PEDHAT_DEFINE_ERROR(NoRoadNearby)
PEDHAT_DEFINE_ERROR(ParseError)
PEDHAT_DEFINE_ERROR(EmptyNetwork)
PEDHAT_DEFINE_ERROR(ShapeMismatch)
PEDHAT_DEFINE_ERROR(EmptyDataset)
PEDHAT_DEFINE_ERROR(NoOverlap)
PEDHAT_DEFINE_ERROR(ConfigError)
PEDHAT_DEFINE_ERROR(InvalidArgument)

#undef PEDHAT_DEFINE_ERROR

}  // namespace pedhat
