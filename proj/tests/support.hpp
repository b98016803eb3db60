#pragma once

#include <optional>
#include <utility>

#include "viewcal/errors.hpp"

namespace support {

/// Error code raised by `f`, or nullopt when it returns normally.
template <typename F>
std::optional<viewcal::ErrorCode> error_of(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const viewcal::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace support
