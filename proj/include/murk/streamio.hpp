#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "murk/events.hpp"
#include "murk/image.hpp"

namespace murk {

class StreamFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- CSV ---------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "t_us,x,y,p";

inline std::string write_csv(const EventStream& stream) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const Event& e : stream.events) {
        out += std::to_string(e.t);
        out += ',';
        out += std::to_string(e.x);
        out += ',';
        out += std::to_string(e.y);
        out += ',';
        out += std::to_string(static_cast<int>(e.polarity));
        out += '\n';
    }
    return out;
}

namespace detail {

template <typename T>
inline T csv_number(const std::string& field, int line) {
    T v{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw StreamFormatError("csv parse error at line " + std::to_string(line) +
                                ": bad field '" + field + "'");
    return v;
}

}  // namespace detail

// The file itself carries only the column header; the caller supplies the
// sensor dimensions (they live in the EREV twin and in the config).
inline EventStream read_csv(const std::string& text, int width, int height) {
    EventStream stream;
    stream.width = width;
    stream.height = height;
    std::size_t pos = 0;
    int line = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string row = text.substr(pos, eol - pos);
        if (!row.empty() && row.back() == '\r') row.pop_back();
        pos = eol + 1;
        ++line;
        if (line == 1) {
            if (row != kCsvHeader)
                throw StreamFormatError(std::string("csv header mismatch: expected '") +
                                        kCsvHeader + "', got '" + row + "'");
            continue;
        }
        if (row.empty()) continue;
        std::string fields[4];
        int nf = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= row.size(); ++i) {
            if (i == row.size() || row[i] == ',') {
                if (nf >= 4)
                    throw StreamFormatError("csv parse error at line " +
                                            std::to_string(line) + ": too many fields");
                fields[nf++] = row.substr(start, i - start);
                start = i + 1;
            }
        }
        if (nf != 4)
            throw StreamFormatError("csv parse error at line " + std::to_string(line) +
                                    ": expected 4 fields");
        Event e;
        e.t = detail::csv_number<std::uint64_t>(fields[0], line);
        const int x = detail::csv_number<int>(fields[1], line);
        const int y = detail::csv_number<int>(fields[2], line);
        const int p = detail::csv_number<int>(fields[3], line);
        if (x < 0 || x >= width || y < 0 || y >= height)
            throw StreamFormatError("csv parse error at line " + std::to_string(line) +
                                    ": pixel (" + std::to_string(x) + "," +
                                    std::to_string(y) + ") outside " +
                                    std::to_string(width) + "x" + std::to_string(height));
        if (p != 1 && p != -1)
            throw StreamFormatError("csv parse error at line " + std::to_string(line) +
                                    ": polarity must be 1 or -1");
        e.x = static_cast<std::uint16_t>(x);
        e.y = static_cast<std::uint16_t>(y);
        e.polarity = static_cast<std::int8_t>(p);
        stream.events.push_back(e);
    }
    if (line == 0)
        throw StreamFormatError("csv header mismatch: empty input");
    return stream;
}

// --- EREV binary -------------------------------------------------------------
//
// 24-byte header, little-endian throughout:
//   magic "EREV" | version u16 = 1 | width u16 | height u16 | 6 reserved zero
//   bytes | count u64
// then `count` 16-byte records:
//   t_us u64 | x u16 | y u16 | polarity i8 | 3 zero pad bytes

inline constexpr char kErevMagic[4] = {'E', 'R', 'E', 'V'};
inline constexpr std::uint16_t kErevVersion = 1;
inline constexpr std::size_t kErevHeaderSize = 24;
inline constexpr std::size_t kErevRecordSize = 16;

inline std::string write_binary(const EventStream& stream) {
    if (stream.width < 0 || stream.width > 65535 || stream.height < 0 ||
        stream.height > 65535)
        throw std::invalid_argument("write_binary: dimensions exceed u16");
    std::string out;
    out.reserve(kErevHeaderSize + kErevRecordSize * stream.events.size());
    out.append(kErevMagic, 4);
    detail::put_u16le(out, kErevVersion);
    detail::put_u16le(out, static_cast<std::uint16_t>(stream.width));
    detail::put_u16le(out, static_cast<std::uint16_t>(stream.height));
    out.append(6, '\0');
    detail::put_u64le(out, static_cast<std::uint64_t>(stream.events.size()));
    for (const Event& e : stream.events) {
        detail::put_u64le(out, e.t);
        detail::put_u16le(out, e.x);
        detail::put_u16le(out, e.y);
        out.push_back(static_cast<char>(e.polarity));
        out.append(3, '\0');
    }
    return out;
}

inline EventStream read_binary(const std::string& bytes) {
    if (bytes.size() < kErevHeaderSize) throw StreamFormatError("erev: truncated header");
    if (std::memcmp(bytes.data(), kErevMagic, 4) != 0)
        throw StreamFormatError("erev: bad magic");
    const unsigned char* u = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint16_t version = detail::get_u16le(u + 4);
    if (version != kErevVersion)
        throw StreamFormatError("erev: unsupported version " + std::to_string(version));
    EventStream stream;
    stream.width = detail::get_u16le(u + 6);
    stream.height = detail::get_u16le(u + 8);
    for (int i = 10; i < 16; ++i)
        if (u[i] != 0) throw StreamFormatError("erev: nonzero reserved bytes");
    const std::uint64_t count = detail::get_u64le(u + 16);
    if (bytes.size() != kErevHeaderSize + count * kErevRecordSize)
        throw StreamFormatError("erev: truncated file");
    stream.events.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* r = u + kErevHeaderSize + i * kErevRecordSize;
        Event& e = stream.events[i];
        e.t = detail::get_u64le(r);
        e.x = detail::get_u16le(r + 8);
        e.y = detail::get_u16le(r + 10);
        e.polarity = static_cast<std::int8_t>(r[12]);
        if (e.polarity != 1 && e.polarity != -1)
            throw StreamFormatError("erev: bad polarity in record " + std::to_string(i));
        if (r[13] != 0 || r[14] != 0 || r[15] != 0)
            throw StreamFormatError("erev: nonzero padding in record " +
                                    std::to_string(i));
    }
    return stream;
}

// --- Event frames ("DVS video") ----------------------------------------------

struct EventFrame {
    int width = 0;
    int height = 0;
    std::uint64_t t_start_us = 0;
    std::uint64_t t_end_us = 0;
    std::vector<std::int32_t> signed_counts;   // ON - OFF per pixel
    std::vector<std::uint32_t> total_counts;
};

inline EventFrame accumulate(const EventStream& stream, std::uint64_t t_start_us,
                             std::uint64_t t_end_us) {
    if (t_start_us >= t_end_us)
        throw std::invalid_argument("accumulate: t_start_us must be < t_end_us");
    EventFrame frame;
    frame.width = stream.width;
    frame.height = stream.height;
    frame.t_start_us = t_start_us;
    frame.t_end_us = t_end_us;
    const std::size_t n = static_cast<std::size_t>(stream.width) * stream.height;
    frame.signed_counts.assign(n, 0);
    frame.total_counts.assign(n, 0);
    for (const Event& e : stream.events) {
        if (e.t < t_start_us || e.t >= t_end_us) continue;
        const std::size_t i = static_cast<std::size_t>(e.y) * stream.width + e.x;
        frame.signed_counts[i] += e.polarity;
        frame.total_counts[i] += 1;
    }
    return frame;
}

// Mid-gray canvas; ON pushes toward white, OFF toward black.
inline std::vector<std::uint8_t> event_frame_to_image(const EventFrame& frame,
                                                      double gain = 64.0) {
    std::vector<std::uint8_t> out(frame.signed_counts.size());
    for (std::size_t i = 0; i < frame.signed_counts.size(); ++i) {
        const double v = 128.0 + gain * frame.signed_counts[i];
        out[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
    }
    return out;
}

}  // namespace murk
