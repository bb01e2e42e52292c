#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace newsclick {

using WarningSink = std::function<void(std::string_view)>;

/// Emits a warning through the installed sink (stderr by default).
/// Thread-safe.
void warn(std::string_view message);

/// Replaces the warning sink and returns the previous one. Passing an empty
/// function silences warnings.
WarningSink set_warning_sink(WarningSink sink);

/// Number of warnings emitted since process start.
std::size_t warning_count();

}  // namespace newsclick
