#pragma once

#include <span>
#include <vector>

#include "evrender/eventsim.hpp"

namespace evrender {

/// One event frame: 0.0 negative, 0.5 no event, 1.0 positive.
struct EventFrame {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr float kNegativeValue = 0.0f;
inline constexpr float kNullValue = 0.5f;
inline constexpr float kPositiveValue = 1.0f;

/// Throws std::out_of_range for events outside the w x h x n volume.
std::vector<EventFrame> events_to_frames(std::span<const Event> events, int width, int height, int frames);

struct FrameErrors {
    double rmse = 0.0;
    double psnr = 0.0;  // dB, peak 1.0; +inf for identical inputs
};

/// Throws std::invalid_argument on dimension mismatch.
FrameErrors rmse_psnr(std::span<const EventFrame> a, std::span<const EventFrame> b);

struct SignedPoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
    int polarity = 1;
};

/// Events as (x, y, t) points with polarity, plus the extent of each axis
/// used for normalization (width, height, frame count).
struct SignedPointCloud {
    std::vector<SignedPoint> points;
    double width = 1.0;
    double height = 1.0;
    double frames = 1.0;
};

SignedPointCloud to_point_cloud(std::span<const Event> events, int width, int height, int frames);

inline constexpr double kDefaultMatchRadius = 2.0;

/// Polarity-aware F1: a point matches when a same-polarity point of the other
/// cloud lies within `tau` (pixel/pixel/frame units). Both empty -> 1; one
/// empty -> 0.
double polarity_f1(const SignedPointCloud& a, const SignedPointCloud& b, double tau = kDefaultMatchRadius);

/// Polarity-aware chamfer distance on axes normalized by (width, height,
/// frames). Points whose polarity class is absent from the other cloud
/// contribute sqrt(3). Both empty -> 0.
double signed_chamfer(const SignedPointCloud& a, const SignedPointCloud& b);

/// Exact nearest-neighbour distances over a fixed point set (k-d tree).
class NearestNeighborIndex {
public:
    struct Point {
        double c[3];
    };

    explicit NearestNeighborIndex(std::vector<Point> points);

    bool empty() const { return points_.empty(); }
    /// Squared Euclidean distance to the closest indexed point; +inf if empty.
    double nearest_squared(const Point& query) const;

private:
    void build(std::size_t begin, std::size_t end, int depth);
    void search(std::size_t begin, std::size_t end, int depth, const Point& q, double& best) const;

    std::vector<Point> points_;
};

}  // namespace evrender
