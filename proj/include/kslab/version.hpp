#pragma once

namespace kslab {
inline constexpr const char* kArtifactVersion = "0.1.0";
}
