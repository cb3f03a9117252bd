#include "evrender/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace evrender {

std::vector<EventFrame> events_to_frames(std::span<const Event> events, int width, int height, int frames) {
    if (width < 1 || height < 1 || frames < 1) throw std::invalid_argument("events_to_frames: empty volume");
    std::vector<EventFrame> out(static_cast<std::size_t>(frames));
    for (EventFrame& f : out) {
        f.width = width;
        f.height = height;
        f.values.assign(static_cast<std::size_t>(width) * height, kNullValue);
    }
    for (const Event& e : events) {
        if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height || e.frame < 1 || e.frame > frames) {
            throw std::out_of_range("event (" + std::to_string(e.x) + ", " + std::to_string(e.y) + ", frame " +
                                    std::to_string(e.frame) + ") outside " + std::to_string(width) + "x" +
                                    std::to_string(height) + "x" + std::to_string(frames));
        }
        out[static_cast<std::size_t>(e.frame - 1)].values[static_cast<std::size_t>(e.y) * width + e.x] =
            e.polarity > 0 ? kPositiveValue : kNegativeValue;
    }
    return out;
}

FrameErrors rmse_psnr(std::span<const EventFrame> a, std::span<const EventFrame> b) {
    if (a.size() != b.size()) throw std::invalid_argument("rmse_psnr: frame counts differ");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].width != b[i].width || a[i].height != b[i].height || a[i].values.size() != b[i].values.size()) {
            throw std::invalid_argument("rmse_psnr: frame dimensions differ");
        }
        for (std::size_t k = 0; k < a[i].values.size(); ++k) {
            const double d = static_cast<double>(a[i].values[k]) - static_cast<double>(b[i].values[k]);
            sum += d * d;
        }
        count += a[i].values.size();
    }
    FrameErrors out;
    out.rmse = count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
    out.psnr = out.rmse > 0.0 ? 20.0 * std::log10(1.0 / out.rmse) : std::numeric_limits<double>::infinity();
    return out;
}

SignedPointCloud to_point_cloud(std::span<const Event> events, int width, int height, int frames) {
    SignedPointCloud cloud;
    cloud.width = width;
    cloud.height = height;
    cloud.frames = frames;
    cloud.points.reserve(events.size());
    for (const Event& e : events) {
        cloud.points.push_back({static_cast<double>(e.x), static_cast<double>(e.y), static_cast<double>(e.frame),
                                e.polarity > 0 ? 1 : -1});
    }
    return cloud;
}

NearestNeighborIndex::NearestNeighborIndex(std::vector<Point> points) : points_(std::move(points)) {
    build(0, points_.size(), 0);
}

void NearestNeighborIndex::build(std::size_t begin, std::size_t end, int depth) {
    if (end - begin < 2) return;
    const int axis = depth % 3;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + static_cast<std::ptrdiff_t>(begin),
                     points_.begin() + static_cast<std::ptrdiff_t>(mid),
                     points_.begin() + static_cast<std::ptrdiff_t>(end),
                     [axis](const Point& a, const Point& b) { return a.c[axis] < b.c[axis]; });
    build(begin, mid, depth + 1);
    build(mid + 1, end, depth + 1);
}

void NearestNeighborIndex::search(std::size_t begin, std::size_t end, int depth, const Point& q,
                                  double& best) const {
    if (begin >= end) return;
    const std::size_t mid = begin + (end - begin) / 2;
    const Point& p = points_[mid];
    const double dx = p.c[0] - q.c[0];
    const double dy = p.c[1] - q.c[1];
    const double dz = p.c[2] - q.c[2];
    best = std::min(best, dx * dx + dy * dy + dz * dz);
    const int axis = depth % 3;
    const double diff = q.c[axis] - p.c[axis];
    if (diff < 0.0) {
        search(begin, mid, depth + 1, q, best);
        if (diff * diff < best) search(mid + 1, end, depth + 1, q, best);
    } else {
        search(mid + 1, end, depth + 1, q, best);
        if (diff * diff < best) search(begin, mid, depth + 1, q, best);
    }
}

double NearestNeighborIndex::nearest_squared(const Point& query) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, points_.size(), 0, query, best);
    return best;
}

namespace {

struct PolarityIndex {
    NearestNeighborIndex positive;
    NearestNeighborIndex negative;

    const NearestNeighborIndex& of(int polarity) const { return polarity > 0 ? positive : negative; }
};

using ToPoint = NearestNeighborIndex::Point (*)(const SignedPoint&, const SignedPointCloud&);

NearestNeighborIndex::Point raw_point(const SignedPoint& p, const SignedPointCloud&) { return {{p.x, p.y, p.t}}; }

NearestNeighborIndex::Point normalized_point(const SignedPoint& p, const SignedPointCloud& c) {
    return {{p.x / c.width, p.y / c.height, p.t / c.frames}};
}

PolarityIndex index_cloud(const SignedPointCloud& cloud, ToPoint convert) {
    std::vector<NearestNeighborIndex::Point> pos, neg;
    for (const SignedPoint& p : cloud.points) (p.polarity > 0 ? pos : neg).push_back(convert(p, cloud));
    return {NearestNeighborIndex(std::move(pos)), NearestNeighborIndex(std::move(neg))};
}

double matched_fraction(const SignedPointCloud& from, const PolarityIndex& to, double tau) {
    std::size_t matched = 0;
    for (const SignedPoint& p : from.points) {
        if (std::sqrt(to.of(p.polarity).nearest_squared(raw_point(p, from))) <= tau) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(from.points.size());
}

double mean_nearest(const SignedPointCloud& from, const PolarityIndex& to) {
    const double absent = std::sqrt(3.0);
    double sum = 0.0;
    for (const SignedPoint& p : from.points) {
        const NearestNeighborIndex& idx = to.of(p.polarity);
        sum += idx.empty() ? absent : std::sqrt(idx.nearest_squared(normalized_point(p, from)));
    }
    return sum / static_cast<double>(from.points.size());
}

}  // namespace

double polarity_f1(const SignedPointCloud& a, const SignedPointCloud& b, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("polarity_f1: tau must be > 0");
    if (a.points.empty() && b.points.empty()) return 1.0;
    if (a.points.empty() || b.points.empty()) return 0.0;
    const double precision = matched_fraction(a, index_cloud(b, raw_point), tau);
    const double recall = matched_fraction(b, index_cloud(a, raw_point), tau);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double signed_chamfer(const SignedPointCloud& a, const SignedPointCloud& b) {
    if (a.points.empty() && b.points.empty()) return 0.0;
    if (a.points.empty() || b.points.empty()) return std::sqrt(3.0);
    const double ab = mean_nearest(a, index_cloud(b, normalized_point));
    const double ba = mean_nearest(b, index_cloud(a, normalized_point));
    return 0.5 * (ab + ba);
}

}  // namespace evrender
