#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace adir {

// The seven restoration services, in stable index order 0..6.
enum class DegradationKind : uint8_t {
    Denoising = 0,
    DehazingIndoor = 1,
    DehazingOutdoor = 2,
    Deblurring = 3,
    Deraining = 4,
    Enhancement = 5,
    SuperResolution = 6,
};

inline constexpr int kKindCount = 7;

inline constexpr std::array<DegradationKind, kKindCount> all_kinds() {
    return {DegradationKind::Denoising,      DegradationKind::DehazingIndoor,
            DegradationKind::DehazingOutdoor, DegradationKind::Deblurring,
            DegradationKind::Deraining,       DegradationKind::Enhancement,
            DegradationKind::SuperResolution};
}

inline int kind_index(DegradationKind k) { return static_cast<int>(k); }

const std::string& kind_name(DegradationKind k);
std::optional<DegradationKind> kind_from_name(const std::string& name);

} // namespace adir
