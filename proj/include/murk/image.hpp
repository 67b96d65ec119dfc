#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace murk {

// Linear radiance, row-major. Pixels are stored as f32 because that is the
// lossless interchange unit of the pipeline; the event model consumes these
// exact values.
struct LuminanceFrame {
    int width = 0;
    int height = 0;
    double timestamp = 0.0;  // seconds
    std::vector<float> pixels;

    float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Per-pixel rock instance ids; 0 = background (seabed, water, particles).
struct LabelMask {
    int width = 0;
    int height = 0;
    double timestamp = 0.0;
    std::vector<std::uint16_t> labels;

    std::uint16_t at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t& at(int x, int y) {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("missing input: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)),
                      std::istreambuf_iterator<char>());
    return bytes;
}

inline void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint16_t get_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace detail

// --- PGM (P5) ---------------------------------------------------------------

inline std::string encode_pgm8(int width, int height,
                               const std::vector<std::uint8_t>& data) {
    if (data.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("encode_pgm8: size mismatch");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(data.data()), data.size());
    return out;
}

// 16-bit PGM stores the most significant byte first.
inline std::string encode_pgm16(int width, int height,
                                const std::vector<std::uint16_t>& data) {
    if (data.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("encode_pgm16: size mismatch");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                      "\n65535\n";
    out.reserve(out.size() + data.size() * 2);
    for (std::uint16_t v : data) {
        out.push_back(static_cast<char>((v >> 8) & 0xFF));
        out.push_back(static_cast<char>(v & 0xFF));
    }
    return out;
}

namespace detail {

inline const char* pgm_parse_header(const std::string& bytes, int& width, int& height,
                                    int& maxval, const std::string& what) {
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t start = pos;
        while (pos < bytes.size() &&
               !std::isspace(static_cast<unsigned char>(bytes[pos])))
            ++pos;
        return bytes.substr(start, pos - start);
    };
    if (next_token() != "P5") throw IoError(what + ": not a P5 PGM");
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
    if (pos >= bytes.size()) throw IoError(what + ": truncated header");
    ++pos;  // single whitespace after maxval
    return bytes.data() + pos;
}

}  // namespace detail

inline std::vector<std::uint16_t> decode_pgm16(const std::string& bytes, int& width,
                                               int& height) {
    int maxval = 0;
    const char* p = detail::pgm_parse_header(bytes, width, height, maxval, "pgm16");
    if (maxval != 65535) throw IoError("pgm16: expected maxval 65535");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (static_cast<std::size_t>(bytes.data() + bytes.size() - p) < n * 2)
        throw IoError("pgm16: truncated pixel data");
    std::vector<std::uint16_t> out(n);
    const unsigned char* u = reinterpret_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<std::uint16_t>((u[2 * i] << 8) | u[2 * i + 1]);
    return out;
}

inline std::vector<std::uint8_t> decode_pgm8(const std::string& bytes, int& width,
                                             int& height) {
    int maxval = 0;
    const char* p = detail::pgm_parse_header(bytes, width, height, maxval, "pgm8");
    if (maxval != 255) throw IoError("pgm8: expected maxval 255");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (static_cast<std::size_t>(bytes.data() + bytes.size() - p) < n)
        throw IoError("pgm8: truncated pixel data");
    return std::vector<std::uint8_t>(reinterpret_cast<const std::uint8_t*>(p),
                                     reinterpret_cast<const std::uint8_t*>(p) + n);
}

// Linear exposure tone mapping for previews only; the event pipeline never
// sees these quantized values.
inline std::vector<std::uint8_t> tone_map(const LuminanceFrame& frame,
                                          double exposure) {
    std::vector<std::uint8_t> out(frame.pixels.size());
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        const double v = std::floor(static_cast<double>(frame.pixels[i]) * exposure);
        out[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
    }
    return out;
}

// --- ELUM: raw f32 frame stack ----------------------------------------------
//
// 16-byte header: magic "ELUM", width u32, height u32, frame count u32, all
// little-endian, followed by count row-major planes of f32 (little-endian).

inline constexpr char kElumMagic[4] = {'E', 'L', 'U', 'M'};

inline std::string encode_elum_header(int width, int height, std::uint32_t count) {
    std::string out(kElumMagic, 4);
    detail::put_u32le(out, static_cast<std::uint32_t>(width));
    detail::put_u32le(out, static_cast<std::uint32_t>(height));
    detail::put_u32le(out, count);
    return out;
}

inline std::string encode_elum_plane(const LuminanceFrame& frame) {
    std::string out;
    out.reserve(frame.pixels.size() * 4);
    for (float f : frame.pixels) detail::put_u32le(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

// Frames come back with timestamps unset; the caller owns frame timing.
inline std::vector<LuminanceFrame> decode_elum(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kElumMagic, 4) != 0)
        throw IoError("elum: bad magic");
    const unsigned char* u = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t width = detail::get_u32le(u + 4);
    const std::uint32_t height = detail::get_u32le(u + 8);
    const std::uint32_t count = detail::get_u32le(u + 12);
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    if (bytes.size() != 16 + plane * 4 * count) throw IoError("elum: truncated file");
    std::vector<LuminanceFrame> frames(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        LuminanceFrame& f = frames[k];
        f.width = static_cast<int>(width);
        f.height = static_cast<int>(height);
        f.pixels.resize(plane);
        const unsigned char* base = u + 16 + static_cast<std::size_t>(k) * plane * 4;
        for (std::size_t i = 0; i < plane; ++i)
            f.pixels[i] = std::bit_cast<float>(detail::get_u32le(base + i * 4));
    }
    return frames;
}

inline std::string encode_elum(const std::vector<LuminanceFrame>& frames) {
    if (frames.empty()) throw std::invalid_argument("elum: no frames");
    std::string out = encode_elum_header(frames[0].width, frames[0].height,
                                         static_cast<std::uint32_t>(frames.size()));
    for (const LuminanceFrame& f : frames) {
        if (f.width != frames[0].width || f.height != frames[0].height)
            throw std::invalid_argument("elum: frame dimension mismatch");
        out += encode_elum_plane(f);
    }
    return out;
}

}  // namespace murk
