#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "murk/image.hpp"
#include "murk/render.hpp"
#include "murk/rng.hpp"
#include "murk/streamio.hpp"

namespace murk {

struct BBox {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;  // inclusive-exclusive

    double area() const { return (x_max - x_min) * (y_max - y_min); }

    friend bool operator==(const BBox&, const BBox&) = default;
};

inline BBox to_bbox(const GroundTruthBox& g) {
    return {static_cast<double>(g.x_min), static_cast<double>(g.y_min),
            static_cast<double>(g.x_max), static_cast<double>(g.y_max)};
}

inline double iou(const BBox& a, const BBox& b) {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

struct Detection {
    BBox bbox;
    double score = 0.0;
    int class_id = 0;  // single class: rock

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct ImageEval {
    std::string name;
    int tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
    double iou_threshold = 0.5;
    std::vector<double> ap_per_class;
    double map = 0.0;
    std::vector<ImageEval> per_image;
};

// Greedy score-ordered matching, then the all-point precision-envelope AP.
// A detection is a TP when it overlaps an unmatched ground truth at or above
// the threshold; ties go to the highest IoU, then the lowest GT index.
inline EvalReport evaluate_map(
    const std::map<std::string, std::vector<Detection>>& detections,
    const std::map<std::string, std::vector<BBox>>& ground_truths,
    double iou_threshold = 0.5) {
    EvalReport report;
    report.iou_threshold = iou_threshold;

    std::map<std::string, std::vector<bool>> matched;
    std::map<std::string, ImageEval> per_image;
    std::size_t total_gt = 0;
    for (const auto& [name, gts] : ground_truths) {
        matched[name].assign(gts.size(), false);
        per_image[name].name = name;
        total_gt += gts.size();
    }
    for (const auto& [name, dets] : detections) {
        (void)dets;
        if (!per_image.count(name)) per_image[name].name = name;
    }

    struct Flat {
        double score;
        std::string name;
        std::size_t index;
    };
    std::vector<Flat> flat;
    for (const auto& [name, dets] : detections)
        for (std::size_t i = 0; i < dets.size(); ++i)
            flat.push_back({dets[i].score, name, i});
    std::sort(flat.begin(), flat.end(), [](const Flat& a, const Flat& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.name != b.name) return a.name < b.name;
        return a.index < b.index;
    });

    std::vector<int> tp_flags;
    tp_flags.reserve(flat.size());
    for (const Flat& f : flat) {
        const Detection& det = detections.at(f.name)[f.index];
        const auto git = ground_truths.find(f.name);
        int best = -1;
        double best_iou = 0.0;
        if (git != ground_truths.end()) {
            const auto& gts = git->second;
            auto& used = matched[f.name];
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (used[g]) continue;
                const double v = iou(det.bbox, gts[g]);
                if (v < iou_threshold) continue;
                if (v > best_iou) {
                    best_iou = v;
                    best = static_cast<int>(g);
                }
            }
        }
        if (best >= 0) {
            matched[f.name][static_cast<std::size_t>(best)] = true;
            per_image[f.name].tp += 1;
            tp_flags.push_back(1);
        } else {
            per_image[f.name].fp += 1;
            tp_flags.push_back(0);
        }
    }
    for (const auto& [name, gts] : ground_truths)
        per_image[name].fn = static_cast<int>(gts.size()) - per_image[name].tp;

    double ap = 0.0;
    if (total_gt > 0 && !tp_flags.empty()) {
        std::vector<double> recall(tp_flags.size()), precision(tp_flags.size());
        int ctp = 0;
        for (std::size_t i = 0; i < tp_flags.size(); ++i) {
            ctp += tp_flags[i];
            recall[i] = static_cast<double>(ctp) / static_cast<double>(total_gt);
            precision[i] = static_cast<double>(ctp) / static_cast<double>(i + 1);
        }
        for (std::size_t i = precision.size(); i-- > 1;)
            precision[i - 1] = std::max(precision[i - 1], precision[i]);
        double prev_recall = 0.0;
        for (std::size_t i = 0; i < recall.size(); ++i) {
            if (recall[i] > prev_recall) ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    report.ap_per_class = {ap};
    report.map = ap;
    for (auto& [name, ie] : per_image) report.per_image.push_back(ie);
    return report;
}

inline std::string eval_report_to_text(const EvalReport& report) {
    char buf[64];
    std::string out;
    for (std::size_t c = 0; c < report.ap_per_class.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "class %zu %.6f\n", c, report.ap_per_class[c]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "map %.6f\n", report.map);
    out += buf;
    for (const ImageEval& ie : report.per_image) {
        out += ie.name + " " + std::to_string(ie.tp) + " " + std::to_string(ie.fp) +
               " " + std::to_string(ie.fn) + "\n";
    }
    return out;
}

// --- Blob detector -------------------------------------------------------------

// Thresholds the total-count plane, labels 4-connected components, and keeps
// those above the area floor. Score saturates at twice the threshold density.
inline std::vector<Detection> blob_detect(const EventFrame& frame,
                                          double density_threshold, int min_area) {
    const int w = frame.width, h = frame.height;
    std::vector<char> binary(frame.total_counts.size());
    for (std::size_t i = 0; i < frame.total_counts.size(); ++i)
        binary[i] = static_cast<double>(frame.total_counts[i]) >= density_threshold;

    std::vector<char> visited(binary.size(), 0);
    std::vector<Detection> out;
    std::deque<int> queue;
    for (int start = 0; start < w * h; ++start) {
        if (!binary[start] || visited[start]) continue;
        int x_min = w, y_min = h, x_max = -1, y_max = -1;
        long area = 0;
        unsigned long long count_sum = 0;
        visited[start] = 1;
        queue.push_back(start);
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            const int x = p % w, y = p / w;
            x_min = std::min(x_min, x);
            y_min = std::min(y_min, y);
            x_max = std::max(x_max, x);
            y_max = std::max(y_max, y);
            area += 1;
            count_sum += frame.total_counts[static_cast<std::size_t>(p)];
            const int nb[4] = {x > 0 ? p - 1 : -1, x + 1 < w ? p + 1 : -1,
                               y > 0 ? p - w : -1, y + 1 < h ? p + w : -1};
            for (int q : nb) {
                if (q < 0 || visited[q] || !binary[q]) continue;
                visited[q] = 1;
                queue.push_back(q);
            }
        }
        if (area < min_area) continue;
        Detection det;
        det.bbox = {static_cast<double>(x_min), static_cast<double>(y_min),
                    static_cast<double>(x_max + 1), static_cast<double>(y_max + 1)};
        const double mean_count = static_cast<double>(count_sum) / static_cast<double>(area);
        det.score = std::min(1.0, mean_count / (2.0 * density_threshold));
        out.push_back(det);
    }
    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.bbox.y_min != b.bbox.y_min) return a.bbox.y_min < b.bbox.y_min;
        return a.bbox.x_min < b.bbox.x_min;
    });
    return out;
}

// --- YOLO dataset export -------------------------------------------------------

struct DatasetEntry {
    std::string name;
    bool train = true;
};

inline std::string yolo_label_line(const BBox& box, int width, int height) {
    const double cx = (box.x_min + box.x_max) / 2.0 / width;
    const double cy = (box.y_min + box.y_max) / 2.0 / height;
    const double bw = (box.x_max - box.x_min) / width;
    const double bh = (box.y_max - box.y_min) / height;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "0 %.6f %.6f %.6f %.6f", cx, cy, bw, bh);
    return buf;
}

// Writes images/<name>.pgm and labels/<name>.txt plus a manifest of
// `name split` lines. The split is a seeded shuffle; empty label files are
// written for frames with no boxes.
inline std::vector<DatasetEntry> export_yolo(
    const std::vector<EventFrame>& frames,
    const std::vector<std::vector<GroundTruthBox>>& boxes,
    const std::filesystem::path& out_dir, double split_ratio, std::uint64_t seed,
    double image_gain = 64.0) {
    if (frames.empty()) throw std::invalid_argument("export_yolo: empty dataset");
    if (frames.size() != boxes.size())
        throw std::invalid_argument("export_yolo: frames/boxes size mismatch");
    const int w = frames[0].width, h = frames[0].height;
    for (const EventFrame& f : frames)
        if (f.width != w || f.height != h)
            throw std::invalid_argument("export_yolo: frame dimension mismatch");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "labels");

    // Fisher-Yates with a counter stream; train set = first round(n*ratio)
    // positions of the shuffled order.
    const std::size_t n = frames.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    CounterRng rng(seed, RngStream::kDatasetSplit, 0);
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
    }
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * split_ratio));
    std::vector<bool> is_train(n, false);
    for (std::size_t i = 0; i < n && i < n_train; ++i) is_train[order[i]] = true;

    std::vector<DatasetEntry> entries(n);
    std::string manifest;
    for (std::size_t i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "ev_%06zu", i);
        entries[i] = {name, is_train[i]};
        const auto image = event_frame_to_image(frames[i], image_gain);
        detail::write_file_bytes(out_dir / "images" / (std::string(name) + ".pgm"),
                                 encode_pgm8(w, h, image));
        std::string labels;
        for (const GroundTruthBox& g : boxes[i])
            labels += yolo_label_line(to_bbox(g), w, h) + "\n";
        detail::write_file_bytes(out_dir / "labels" / (std::string(name) + ".txt"),
                                 labels);
        manifest += std::string(name) + " " + (is_train[i] ? "train" : "val") + "\n";
    }
    detail::write_file_bytes(out_dir / "manifest.txt", manifest);
    return entries;
}

}  // namespace murk
