#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "vlp/error.hpp"

namespace vlp {

// 8-bit grayscale raster, row-major. The only pixel format in the pipeline;
// the camera node is configured for mono8 output.
struct Frame {
    std::uint64_t timestamp_ns = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Frame() = default;
    Frame(int w, int h, std::uint64_t ts = 0)
        : timestamp_ns(ts), width(w), height(h),
          pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    bool contains(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    // Nearest-neighbor resize, matching the camera node's INTER_NEAREST scale.
    Frame resized(int new_w, int new_h) const {
        if (new_w <= 0 || new_h <= 0) throw DomainError("resize to empty frame");
        Frame out(new_w, new_h, timestamp_ns);
        for (int y = 0; y < new_h; ++y) {
            int sy = static_cast<int>((static_cast<std::int64_t>(y) * height) / new_h);
            for (int x = 0; x < new_w; ++x) {
                int sx = static_cast<int>((static_cast<std::int64_t>(x) * width) / new_w);
                out.at(x, y) = at(sx, sy);
            }
        }
        return out;
    }
};

} // namespace vlp
