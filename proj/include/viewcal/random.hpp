#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace viewcal {

/// Rows per independently seeded stream. Row r of any sampled batch is drawn
/// from stream r / kStreamRows, so results do not depend on how rows are split
/// across workers.
inline constexpr std::size_t kStreamRows = 65536;

inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

/// Walks rows 0..n-1, reseeding at every stream boundary.
class StreamCursor {
public:
    StreamCursor(std::uint64_t seed, std::uint64_t base_stream = 0) : seed_(seed), base_(base_stream) {}

    std::mt19937_64& at(std::size_t row) {
        const std::uint64_t stream = base_ + row / kStreamRows;
        if (!started_ || stream != current_) {
            engine_ = stream_engine(seed_, stream);
            current_ = stream;
            started_ = true;
        }
        return engine_;
    }

private:
    std::uint64_t seed_;
    std::uint64_t base_;
    std::uint64_t current_ = 0;
    bool started_ = false;
    std::mt19937_64 engine_;
};

}  // namespace viewcal
