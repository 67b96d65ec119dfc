#include "murk/streamio.hpp"

#include <gtest/gtest.h>

#include <numeric>

#include "murk/rng.hpp"

namespace {

using murk::Event;
using murk::EventStream;

EventStream random_stream(std::uint64_t seed, std::size_t count, int w = 64,
                          int h = 48) {
    murk::CounterRng rng(seed, murk::RngStream::kNoise, 0);
    EventStream s;
    s.width = w;
    s.height = h;
    for (std::size_t i = 0; i < count; ++i) {
        Event e;
        e.t = rng.next_u64() % 1000000;
        e.x = static_cast<std::uint16_t>(rng.next_u64() % w);
        e.y = static_cast<std::uint16_t>(rng.next_u64() % h);
        e.polarity = (rng.next_u64() & 1) ? 1 : -1;
        s.events.push_back(e);
    }
    std::sort(s.events.begin(), s.events.end(), murk::event_order);
    return s;
}

TEST(Csv, EmptyStreamIsHeaderOnly) {
    EventStream s;
    s.width = 8;
    s.height = 8;
    const std::string text = murk::write_csv(s);
    EXPECT_EQ(text, "t_us,x,y,p\n");
    EXPECT_EQ(murk::read_csv(text, 8, 8), s);
}

TEST(Csv, ThreeEventsMakeFourLines) {
    EventStream s;
    s.width = 8;
    s.height = 8;
    s.events = {{5, 1, 0, 1}, {6, 1, 0, 1}, {7, 2, 3, -1}};
    const std::string text = murk::write_csv(s);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    EXPECT_EQ(murk::read_csv(text, 8, 8), s);
}

TEST(Csv, MalformedLineNamesLineNumber) {
    try {
        murk::read_csv("t_us,x,y,p\n12,3,x,1\n", 8, 8);
        FAIL() << "expected StreamFormatError";
    } catch (const murk::StreamFormatError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Csv, HeaderAndRangeErrors) {
    EXPECT_THROW(murk::read_csv("t,x,y,p\n", 8, 8), murk::StreamFormatError);
    EXPECT_THROW(murk::read_csv("", 8, 8), murk::StreamFormatError);
    EXPECT_THROW(murk::read_csv("t_us,x,y,p\n1,9,0,1\n", 8, 8),
                 murk::StreamFormatError);
    EXPECT_THROW(murk::read_csv("t_us,x,y,p\n1,0,0,2\n", 8, 8),
                 murk::StreamFormatError);
    EXPECT_THROW(murk::read_csv("t_us,x,y,p\n1,0,0\n", 8, 8),
                 murk::StreamFormatError);
}

TEST(Erev, EmptyStreamIsExactlyHeaderSize) {
    EventStream s;
    s.width = 320;
    s.height = 240;
    const std::string bytes = murk::write_binary(s);
    EXPECT_EQ(bytes.size(), 24u);
    EXPECT_EQ(murk::read_binary(bytes), s);
}

TEST(Erev, TwoEventsAre56Bytes) {
    EventStream s;
    s.width = 16;
    s.height = 16;
    s.events = {{123456789ull, 3, 4, 1}, {123456790ull, 5, 6, -1}};
    const std::string bytes = murk::write_binary(s);
    EXPECT_EQ(bytes.size(), 56u);
    EXPECT_EQ(murk::read_binary(bytes), s);
}

TEST(Erev, HeaderLayoutIsPinned) {
    EventStream s;
    s.width = 0x0102;
    s.height = 0x0304;
    s.events = {{0x1122334455667788ull, 0x0A0B, 0x0C0D, -1}};
    const std::string b = murk::write_binary(s);
    ASSERT_EQ(b.size(), 40u);
    EXPECT_EQ(b.substr(0, 4), "EREV");
    EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);  // version lo
    EXPECT_EQ(static_cast<unsigned char>(b[5]), 0);  // version hi
    EXPECT_EQ(static_cast<unsigned char>(b[6]), 0x02);  // width LE
    EXPECT_EQ(static_cast<unsigned char>(b[7]), 0x01);
    EXPECT_EQ(static_cast<unsigned char>(b[8]), 0x04);  // height LE
    EXPECT_EQ(static_cast<unsigned char>(b[9]), 0x03);
    for (int i = 10; i < 16; ++i) EXPECT_EQ(b[i], 0);
    EXPECT_EQ(static_cast<unsigned char>(b[16]), 1);  // count LE
    // Record: t u64 LE, x u16 LE, y u16 LE, polarity i8, 3 zero pad.
    EXPECT_EQ(static_cast<unsigned char>(b[24]), 0x88);
    EXPECT_EQ(static_cast<unsigned char>(b[31]), 0x11);
    EXPECT_EQ(static_cast<unsigned char>(b[32]), 0x0B);
    EXPECT_EQ(static_cast<unsigned char>(b[33]), 0x0A);
    EXPECT_EQ(static_cast<unsigned char>(b[34]), 0x0D);
    EXPECT_EQ(static_cast<unsigned char>(b[35]), 0x0C);
    EXPECT_EQ(static_cast<signed char>(b[36]), -1);
    EXPECT_EQ(b[37], 0);
    EXPECT_EQ(b[38], 0);
    EXPECT_EQ(b[39], 0);
}

TEST(Erev, RejectsCorruptInput) {
    EventStream s;
    s.width = 4;
    s.height = 4;
    s.events = {{1, 0, 0, 1}};
    std::string good = murk::write_binary(s);

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(murk::read_binary(bad_magic), murk::StreamFormatError);

    std::string truncated = good.substr(0, good.size() - 1);
    EXPECT_THROW(murk::read_binary(truncated), murk::StreamFormatError);

    std::string bad_pad = good;
    bad_pad[39] = 1;
    EXPECT_THROW(murk::read_binary(bad_pad), murk::StreamFormatError);

    std::string bad_version = good;
    bad_version[4] = 9;
    EXPECT_THROW(murk::read_binary(bad_version), murk::StreamFormatError);

    std::string bad_reserved = good;
    bad_reserved[12] = 1;
    EXPECT_THROW(murk::read_binary(bad_reserved), murk::StreamFormatError);
}

TEST(Roundtrip, RandomStreamsBothCodecs) {
    for (int trial = 0; trial < 20; ++trial) {
        const EventStream s = random_stream(1000 + trial, 1000);
        EXPECT_EQ(murk::read_binary(murk::write_binary(s)), s);
        EXPECT_EQ(murk::read_csv(murk::write_csv(s), s.width, s.height), s);
        EXPECT_EQ(murk::write_binary(s).size(), 24u + 16u * s.events.size());
        // Re-encoding is byte stable.
        EXPECT_EQ(murk::write_binary(s), murk::write_binary(s));
        EXPECT_EQ(murk::write_csv(s), murk::write_csv(s));
    }
}

TEST(Accumulate, HandCountedWindow) {
    EventStream s;
    s.width = 4;
    s.height = 2;
    s.events = {{5, 1, 0, 1}, {6, 1, 0, 1}, {7, 1, 0, -1}};
    const murk::EventFrame f = murk::accumulate(s, 0, 10);
    EXPECT_EQ(f.signed_counts[1], 1);
    EXPECT_EQ(f.total_counts[1], 3u);
    for (std::size_t i = 0; i < f.signed_counts.size(); ++i) {
        if (i == 1) continue;
        EXPECT_EQ(f.signed_counts[i], 0);
        EXPECT_EQ(f.total_counts[i], 0u);
    }
    const murk::EventFrame outside = murk::accumulate(s, 10, 20);
    for (std::uint32_t c : outside.total_counts) EXPECT_EQ(c, 0u);
}

TEST(Accumulate, WindowIsHalfOpen) {
    EventStream s;
    s.width = 2;
    s.height = 1;
    s.events = {{10, 0, 0, 1}, {19, 1, 0, 1}, {20, 1, 0, 1}};
    const murk::EventFrame f = murk::accumulate(s, 10, 20);
    EXPECT_EQ(f.total_counts[0], 1u);
    EXPECT_EQ(f.total_counts[1], 1u);
}

TEST(Accumulate, CountPlaneSumsToInWindowEvents) {
    const EventStream s = random_stream(5, 500, 16, 16);
    const murk::EventFrame f = murk::accumulate(s, 100000, 600000);
    std::size_t expected = 0;
    for (const Event& e : s.events)
        if (e.t >= 100000 && e.t < 600000) ++expected;
    const std::uint64_t sum =
        std::accumulate(f.total_counts.begin(), f.total_counts.end(), 0ull);
    EXPECT_EQ(sum, expected);
    for (std::size_t i = 0; i < f.total_counts.size(); ++i)
        EXPECT_LE(static_cast<std::uint32_t>(std::abs(f.signed_counts[i])),
                  f.total_counts[i]);
}

TEST(EventFrameImage, MidGrayGainAndClamp) {
    murk::EventFrame f;
    f.width = 3;
    f.height = 1;
    f.t_start_us = 0;
    f.t_end_us = 1;
    f.signed_counts = {0, 1, -3};
    f.total_counts = {0, 1, 3};
    const auto img = murk::event_frame_to_image(f, 64.0);
    EXPECT_EQ(img[0], 128);
    EXPECT_EQ(img[1], 192);
    EXPECT_EQ(img[2], 0);
}

}  // namespace
