#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgaze {

// Sensor geometry of the DVXplorer-class input stream and the working
// resolution after 8x spatial downsampling.
inline constexpr int kSensorWidth = 640;
inline constexpr int kSensorHeight = 480;
inline constexpr int kDownsample = 8;
inline constexpr int kGridWidth = 80;   // x after downsampling
inline constexpr int kGridHeight = 60;  // y after downsampling

struct ParseError : std::runtime_error {
    int line;
    explicit ParseError(const std::string& msg, int line_no = -1)
        : std::runtime_error(line_no >= 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64: used to derive independent rng streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-index substream seed (seed, index) -> 64-bit seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

template <typename T>
inline bool is_finite(T v) {
    return std::isfinite(static_cast<double>(v));
}

}  // namespace sgaze
