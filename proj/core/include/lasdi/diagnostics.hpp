#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace lasdi::diag {

using WarningSink = std::function<void(const std::string&)>;

/// Emit a warning through the installed sink (stderr by default).
void warn(const std::string& message);

/// Replace the warning sink; returns the previous one. Passing an empty
/// function restores the stderr sink.
WarningSink set_sink(WarningSink sink);

/// Total number of warnings emitted since start-up or the last reset.
std::size_t warning_count();
void reset_warning_count();

/// Installs a sink for the lifetime of the guard, then restores the old one.
class ScopedSink {
public:
    explicit ScopedSink(WarningSink sink) : previous_(set_sink(std::move(sink))) {}
    ~ScopedSink() { set_sink(std::move(previous_)); }
    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    WarningSink previous_;
};

}  // namespace lasdi::diag
