#pragma once

#include <stdexcept>
#include <string>

namespace adir {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define ADIR_DEFINE_ERROR(Name)                 \
    struct Name : Error {                       \
        using Error::Error;                     \
    }

// imaging
ADIR_DEFINE_ERROR(MissingFile);
ADIR_DEFINE_ERROR(UnsupportedFormat);
ADIR_DEFINE_ERROR(CorruptData);
ADIR_DEFINE_ERROR(IoFailure);
ADIR_DEFINE_ERROR(EvenKernel);

// synth
ADIR_DEFINE_ERROR(EmptyCleanSet);
ADIR_DEFINE_ERROR(UnwritableManifest);
ADIR_DEFINE_ERROR(StratumTooSmall);

// features
ADIR_DEFINE_ERROR(TooSmall);

// classify
ADIR_DEFINE_ERROR(ShapeMismatch);
ADIR_DEFINE_ERROR(EmptyCorpus);
ADIR_DEFINE_ERROR(EmptyRateSet);
ADIR_DEFINE_ERROR(BadMagic);
ADIR_DEFINE_ERROR(VersionMismatch);
ADIR_DEFINE_ERROR(TruncatedFile);

// route
ADIR_DEFINE_ERROR(WrongMode);
ADIR_DEFINE_ERROR(OutOfRange);

// restore
ADIR_DEFINE_ERROR(OversizeForUpscale);
ADIR_DEFINE_ERROR(TemplateInvalid);

// blend
ADIR_DEFINE_ERROR(NoActiveDegradation);

// metrics
ADIR_DEFINE_ERROR(LengthMismatch);
ADIR_DEFINE_ERROR(IndexOutOfRange);
ADIR_DEFINE_ERROR(EmptyMatrix);
ADIR_DEFINE_ERROR(EmptyRow);
ADIR_DEFINE_ERROR(EmptyColumn);
ADIR_DEFINE_ERROR(DimensionMismatch);
ADIR_DEFINE_ERROR(NonPositiveTime);

// pipeline
ADIR_DEFINE_ERROR(ModelLoadFailure);
ADIR_DEFINE_ERROR(EmptySource);
ADIR_DEFINE_ERROR(NoMatches);
ADIR_DEFINE_ERROR(ConfigError);

#undef ADIR_DEFINE_ERROR

} // namespace adir
