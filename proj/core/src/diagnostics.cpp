#include "lasdi/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace lasdi::diag {
namespace {

std::mutex sink_mutex;
WarningSink current_sink;
std::atomic<std::size_t> counter{0};

}  // namespace

void warn(const std::string& message) {
    counter.fetch_add(1, std::memory_order_relaxed);
    std::lock_guard lock(sink_mutex);
    if (current_sink) {
        current_sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

WarningSink set_sink(WarningSink sink) {
    std::lock_guard lock(sink_mutex);
    WarningSink previous = std::move(current_sink);
    current_sink = std::move(sink);
    return previous;
}

std::size_t warning_count() { return counter.load(std::memory_order_relaxed); }

void reset_warning_count() { counter.store(0, std::memory_order_relaxed); }

}  // namespace lasdi::diag
