#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "murk/config.hpp"
#include "murk/image.hpp"
#include "murk/parallel.hpp"
#include "murk/rng.hpp"

namespace murk {

struct Event {
    std::uint64_t t = 0;  // microseconds
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t polarity = 1;  // +1 ON, -1 OFF

    friend bool operator==(const Event&, const Event&) = default;
};

// Streams are kept sorted by (t, y, x, polarity), non-decreasing.
inline bool event_order(const Event& a, const Event& b) {
    return std::tie(a.t, a.y, a.x, a.polarity) < std::tie(b.t, b.y, b.x, b.polarity);
}

struct EventStream {
    int width = 0;
    int height = 0;
    std::vector<Event> events;

    friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct PixelState {
    double ref_level = 0.0;  // log-radiance the pixel last settled at
    std::int64_t last_event_us = -1;  // -1 = no event emitted yet
};

inline double log_intensity(double i, double log_eps) {
    return std::log(i + log_eps);
}

struct PixelEvent {
    std::uint64_t t = 0;
    std::int8_t polarity = 1;
};

namespace detail {

// The sensor model for one pixel over one frame interval. Log intensity is
// linear in time on [t0, t1]. Every crossing of ref_level +/- theta moves
// the reference by exactly theta (crossing at exactly theta counts); the
// event timestamp is the crossing time floored to whole microseconds.
// Crossings inside the refractory window are suppressed but still advance
// the reference level, so a resuming signal cannot burst.
template <typename Emit>
inline void scan_pixel_crossings(double l_prev, double l_next, PixelState& state,
                                 std::uint64_t t0_us, std::uint64_t t1_us,
                                 const DvsParams& params, Emit&& emit) {
    if (l_next == l_prev) return;
    const double dt = static_cast<double>(t1_us - t0_us);
    const double dl = l_next - l_prev;
    for (;;) {
        double target;
        std::int8_t polarity;
        if (l_next >= state.ref_level + params.theta_on) {
            target = state.ref_level + params.theta_on;
            polarity = 1;
        } else if (l_next <= state.ref_level - params.theta_off) {
            target = state.ref_level - params.theta_off;
            polarity = -1;
        } else {
            break;
        }
        double t_cross = static_cast<double>(t0_us) + dt * ((target - l_prev) / dl);
        if (t_cross < static_cast<double>(t0_us)) t_cross = static_cast<double>(t0_us);
        if (t_cross > static_cast<double>(t1_us)) t_cross = static_cast<double>(t1_us);
        const std::uint64_t ts = static_cast<std::uint64_t>(std::floor(t_cross));
        state.ref_level = target;
        const bool refractory_ok =
            state.last_event_us < 0 ||
            ts - static_cast<std::uint64_t>(state.last_event_us) >= params.refractory_us;
        if (refractory_ok) {
            emit(ts, polarity);
            state.last_event_us = static_cast<std::int64_t>(ts);
        }
    }
}

}  // namespace detail

inline std::vector<PixelEvent> pixel_crossings(double l_prev, double l_next,
                                               PixelState& state, std::uint64_t t0_us,
                                               std::uint64_t t1_us,
                                               const DvsParams& params) {
    if (t0_us >= t1_us)
        throw std::invalid_argument("pixel_crossings: t0_us must be < t1_us");
    std::vector<PixelEvent> out;
    detail::scan_pixel_crossings(l_prev, l_next, state, t0_us, t1_us, params,
                                 [&](std::uint64_t t, std::int8_t p) {
                                     out.push_back({t, p});
                                 });
    return out;
}

inline std::uint64_t frame_time_us(double timestamp_s) {
    return static_cast<std::uint64_t>(std::llround(timestamp_s * 1e6));
}

// Frame 0 only initializes the per-pixel reference levels; events start with
// the first frame pair. The merge is a total sort on (t, y, x, polarity), so
// the stream is independent of pixel iteration order and thread count.
inline EventStream frames_to_events(const std::vector<LuminanceFrame>& frames,
                                    const DvsParams& params, int threads = 1) {
    if (frames.size() < 2)
        throw std::invalid_argument("frames_to_events: need at least 2 frames");
    const int w = frames[0].width, h = frames[0].height;
    std::vector<std::uint64_t> t_us(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (frames[k].width != w || frames[k].height != h)
            throw std::invalid_argument("frames_to_events: frame dimension mismatch");
        t_us[k] = frame_time_us(frames[k].timestamp);
        if (k > 0 && t_us[k] <= t_us[k - 1])
            throw std::invalid_argument(
                "frames_to_events: frame timestamps must be strictly increasing");
    }

    const int n_threads = resolve_threads(threads);
    const int n_px = w * h;
    std::vector<std::vector<Event>> chunk_events(
        static_cast<std::size_t>(std::clamp(n_threads, 1, std::max(n_px, 1))));
    parallel_chunks(n_px, n_threads, [&](int p0, int p1, int chunk) {
        std::vector<Event>& out = chunk_events[static_cast<std::size_t>(chunk)];
        for (int p = p0; p < p1; ++p) {
            const std::uint16_t x = static_cast<std::uint16_t>(p % w);
            const std::uint16_t y = static_cast<std::uint16_t>(p / w);
            PixelState state;
            state.ref_level = log_intensity(frames[0].pixels[p], params.log_eps);
            double l_prev = state.ref_level;
            for (std::size_t k = 1; k < frames.size(); ++k) {
                const double l_next =
                    log_intensity(frames[k].pixels[p], params.log_eps);
                detail::scan_pixel_crossings(l_prev, l_next, state, t_us[k - 1],
                                             t_us[k], params,
                                             [&](std::uint64_t t, std::int8_t pol) {
                                                 out.push_back({t, x, y, pol});
                                             });
                l_prev = l_next;
            }
        }
    });

    EventStream stream;
    stream.width = w;
    stream.height = h;
    std::size_t total = 0;
    for (const auto& v : chunk_events) total += v.size();
    stream.events.reserve(total);
    for (const auto& v : chunk_events)
        stream.events.insert(stream.events.end(), v.begin(), v.end());
    std::sort(stream.events.begin(), stream.events.end(), event_order);
    return stream;
}

// Leak ON events as a per-pixel Poisson process: inter-arrival times are
// exponential draws from a counter stream keyed on (noise_seed, pixel), so
// the injection is reproducible and independent of pixel order.
inline EventStream inject_noise(const EventStream& stream, const DvsParams& params,
                                std::uint64_t t0_us, std::uint64_t t1_us) {
    if (!params.noise_enabled)
        throw std::invalid_argument("inject_noise: noise_enabled is false");
    if (t0_us >= t1_us)
        throw std::invalid_argument("inject_noise: t0_us must be < t1_us");
    EventStream out = stream;
    if (params.leak_rate_hz <= 0.0) return out;
    const double rate = params.leak_rate_hz;
    for (int y = 0; y < stream.height; ++y) {
        for (int x = 0; x < stream.width; ++x) {
            const std::uint64_t pixel_index =
                static_cast<std::uint64_t>(y) * stream.width + x;
            CounterRng rng(params.noise_seed, RngStream::kNoise, pixel_index);
            double t = static_cast<double>(t0_us);
            for (;;) {
                const double u = rng.next_u01();
                t += -std::log(1.0 - u) / rate * 1e6;
                if (t >= static_cast<double>(t1_us)) break;
                out.events.push_back({static_cast<std::uint64_t>(std::floor(t)),
                                      static_cast<std::uint16_t>(x),
                                      static_cast<std::uint16_t>(y), 1});
            }
        }
    }
    std::sort(out.events.begin(), out.events.end(), event_order);
    out.events.erase(std::unique(out.events.begin(), out.events.end()),
                     out.events.end());
    return out;
}

}  // namespace murk
