#pragma once

#include <stdexcept>
#include <string>

namespace camsel {

// Every error carries a short machine-readable category; the CLI maps
// categories onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

#define CAMSEL_DEFINE_ERROR(Name, category_string)                \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(category_string, what) {} \
  }

CAMSEL_DEFINE_ERROR(DimensionError, "dimension-underflow");
CAMSEL_DEFINE_ERROR(OutOfBoundsError, "out-of-bounds");
CAMSEL_DEFINE_ERROR(DegenerateConfiguration, "degenerate-configuration");
CAMSEL_DEFINE_ERROR(ShapeMismatch, "shape-mismatch");
CAMSEL_DEFINE_ERROR(CorruptCheckpoint, "corrupt-checkpoint");
CAMSEL_DEFINE_ERROR(IoError, "io");
CAMSEL_DEFINE_ERROR(ImageReadError, "unreadable-image");
CAMSEL_DEFINE_ERROR(ManifestError, "manifest");
CAMSEL_DEFINE_ERROR(OverlapError, "split-overlap");
CAMSEL_DEFINE_ERROR(EmptyDataset, "empty-dataset");
CAMSEL_DEFINE_ERROR(InsufficientIterations, "insufficient-iterations");
CAMSEL_DEFINE_ERROR(NoCandidate, "no-candidate");
CAMSEL_DEFINE_ERROR(ConfigError, "config-parse");
CAMSEL_DEFINE_ERROR(MissingInput, "missing-input");
CAMSEL_DEFINE_ERROR(InvalidSpec, "invalid-spec");
CAMSEL_DEFINE_ERROR(InvalidArgument, "invalid-argument");

#undef CAMSEL_DEFINE_ERROR

}  // namespace camsel
