#pragma once

#include <functional>
#include <string_view>

namespace gaplm {

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink. The default writes to stderr.
/// Passing an empty handler silences warnings.
void set_warning_handler(WarningHandler handler);

/// Emits a warning through the current handler. Thread-safe.
void warn(std::string_view message);

}  // namespace gaplm
