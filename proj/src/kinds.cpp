#include "adir/kinds.hpp"

namespace adir {

namespace {
const std::array<std::string, kKindCount> kNames = {
    "Denoising",      "DehazingIndoor", "DehazingOutdoor", "Deblurring",
    "Deraining",      "Enhancement",    "SuperResolution"};
}

const std::string& kind_name(DegradationKind k) { return kNames[kind_index(k)]; }

std::optional<DegradationKind> kind_from_name(const std::string& name) {
    for (int i = 0; i < kKindCount; ++i)
        if (kNames[i] == name)
            return static_cast<DegradationKind>(i);
    return std::nullopt;
}

} // namespace adir
