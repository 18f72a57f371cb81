#pragma once

#include <stdexcept>
#include <string>

namespace verbspace {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define VERBSPACE_ERROR(Name)                  \
  struct Name : Error {                        \
    using Error::Error;                        \
  }

// taxonomy
VERBSPACE_ERROR(MalformedDocument);
VERBSPACE_ERROR(CyclicTaxonomy);
VERBSPACE_ERROR(DuplicateId);
VERBSPACE_ERROR(DanglingParent);
VERBSPACE_ERROR(UnknownNode);
VERBSPACE_ERROR(MissingCount);

// nodetext
VERBSPACE_ERROR(EmptyInput);
VERBSPACE_ERROR(EmptyText);

// harmonize
VERBSPACE_ERROR(PendingVerdicts);
VERBSPACE_ERROR(UnmappedClass);
VERBSPACE_ERROR(ClosureConflict);
VERBSPACE_ERROR(NonPositiveDuration);
VERBSPACE_ERROR(NoInstances);
VERBSPACE_ERROR(MalformedManifest);

// lorentz
VERBSPACE_ERROR(DimensionMismatch);
VERBSPACE_ERROR(CurvatureMismatch);
VERBSPACE_ERROR(MagnitudeOverflow);
VERBSPACE_ERROR(OriginAperture);
VERBSPACE_ERROR(DegeneratePair);
VERBSPACE_ERROR(OriginApex);

// model
VERBSPACE_ERROR(ConfigMismatch);
VERBSPACE_ERROR(NonFiniteLoss);
VERBSPACE_ERROR(MissingPseudo);
VERBSPACE_ERROR(LabelOutOfRange);

// augment
VERBSPACE_ERROR(ZeroVector);
VERBSPACE_ERROR(ShapeMismatch);

// eval
VERBSPACE_ERROR(NoPositives);
VERBSPACE_ERROR(SplitOverlap);

// io / cli
VERBSPACE_ERROR(IoError);
VERBSPACE_ERROR(ConfigError);
VERBSPACE_ERROR(FingerprintMismatch);

#undef VERBSPACE_ERROR

}  // namespace verbspace
