#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace comap {

// Parameter snapshot encoding: 16-byte header (magic "CMG1", u32 n, u32 level
// count, u32 reserved) followed by n little-endian float32 values. The same
// bytes, followed by the little-endian u32 count vector (and, for gradient
// tracking runs, a second float32 block for the tracker), form the network
// wire payload.

inline constexpr uint32_t kSnapshotMagic = 0x31474d43u;  // "CMG1"
inline constexpr size_t kSnapshotHeaderBytes = 16;

namespace detail {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

inline uint32_t get_u32(std::span<const uint8_t> in, size_t offset) {
    return static_cast<uint32_t>(in[offset]) |
           (static_cast<uint32_t>(in[offset + 1]) << 8) |
           (static_cast<uint32_t>(in[offset + 2]) << 16) |
           (static_cast<uint32_t>(in[offset + 3]) << 24);
}

inline void put_f32(std::vector<uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<uint32_t>(v));
}

inline float get_f32(std::span<const uint8_t> in, size_t offset) {
    return std::bit_cast<float>(get_u32(in, offset));
}

}  // namespace detail

inline std::vector<uint8_t> encode_params(std::span<const double> theta,
                                          uint32_t level_count) {
    std::vector<uint8_t> out;
    out.reserve(kSnapshotHeaderBytes + 4 * theta.size());
    detail::put_u32(out, kSnapshotMagic);
    detail::put_u32(out, static_cast<uint32_t>(theta.size()));
    detail::put_u32(out, level_count);
    detail::put_u32(out, 0u);
    for (double v : theta) detail::put_f32(out, static_cast<float>(v));
    return out;
}

struct DecodedParams {
    std::vector<double> theta;
    uint32_t level_count = 0;
};

inline DecodedParams decode_params(std::span<const uint8_t> bytes) {
    if (bytes.size() < kSnapshotHeaderBytes) {
        throw std::runtime_error("decode_params: truncated header");
    }
    if (detail::get_u32(bytes, 0) != kSnapshotMagic) {
        throw std::runtime_error("decode_params: bad magic");
    }
    const uint32_t n = detail::get_u32(bytes, 4);
    DecodedParams out;
    out.level_count = detail::get_u32(bytes, 8);
    if (bytes.size() < kSnapshotHeaderBytes + 4ull * n) {
        throw std::runtime_error("decode_params: truncated payload");
    }
    out.theta.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        out.theta[i] = detail::get_f32(bytes, kSnapshotHeaderBytes + 4ull * i);
    }
    return out;
}

inline void save_params(const std::string& path, std::span<const double> theta,
                        uint32_t level_count) {
    const std::vector<uint8_t> bytes = encode_params(theta, level_count);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_params: cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

inline DecodedParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_params: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return decode_params(bytes);
}

struct WireMessage {
    std::vector<double> theta;
    std::vector<uint32_t> counts;
    std::vector<double> tracker;  // present only for gradient-tracking runs
    uint32_t level_count = 0;
};

inline size_t wire_size(size_t n, bool with_tracker) {
    return kSnapshotHeaderBytes + 4 * n + 4 * n + (with_tracker ? 4 * n : 0);
}

inline std::vector<uint8_t> encode_wire(std::span<const double> theta,
                                        uint32_t level_count,
                                        std::span<const uint32_t> counts,
                                        std::span<const double> tracker = {}) {
    if (counts.size() != theta.size()) {
        throw std::invalid_argument("encode_wire: count vector length mismatch");
    }
    std::vector<uint8_t> out = encode_params(theta, level_count);
    out.reserve(wire_size(theta.size(), !tracker.empty()));
    for (uint32_t c : counts) detail::put_u32(out, c);
    for (double v : tracker) detail::put_f32(out, static_cast<float>(v));
    return out;
}

inline WireMessage decode_wire(std::span<const uint8_t> bytes) {
    DecodedParams params = decode_params(bytes);
    const size_t n = params.theta.size();
    WireMessage msg;
    msg.theta = std::move(params.theta);
    msg.level_count = params.level_count;
    const size_t counts_off = kSnapshotHeaderBytes + 4 * n;
    if (bytes.size() < counts_off + 4 * n) {
        throw std::runtime_error("decode_wire: truncated count vector");
    }
    msg.counts.resize(n);
    for (size_t i = 0; i < n; ++i) {
        msg.counts[i] = detail::get_u32(bytes, counts_off + 4 * i);
    }
    const size_t tracker_off = counts_off + 4 * n;
    if (bytes.size() >= tracker_off + 4 * n && n > 0) {
        msg.tracker.resize(n);
        for (size_t i = 0; i < n; ++i) {
            msg.tracker[i] = detail::get_f32(bytes, tracker_off + 4 * i);
        }
    }
    return msg;
}

}  // namespace comap
