#pragma once

// Keyframe interpolation: a natural cubic spline per joint coordinate
// through user key poses, with the mean pose pinned to the first and last
// frames when the user has not keyed them.

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "sgt/skeleton.hpp"

namespace sgt {

struct KeyPose {
    int frame = 0;
    PoseFrame pose;
};

// Second derivatives of the natural cubic spline through (x[i], y[i]),
// solved with the Thomas algorithm.
inline std::vector<double> natural_spline_moments(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    // Sub-diagonal entry of row r is h_{r} = x[r+1] - x[r].
    for (std::size_t r = 1; r < k; ++r) {
        const double sub = x[r + 1] - x[r];
        const double w = sub / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t r = k - 1; r-- > 0;) m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    return m;
}

// Evaluates the spline on interval [x[i], x[i+1]]. At u = 0 this returns
// y[i] exactly.
inline double eval_spline_segment(std::span<const double> x, std::span<const double> y, std::span<const double> m,
                                  std::size_t i, double at) {
    const double h = x[i + 1] - x[i];
    const double u = (at - x[i]) / h;
    return y[i] + u * (y[i + 1] - y[i]) - h * h / 6.0 * u * (1.0 - u) * ((2.0 - u) * m[i] + (1.0 + u) * m[i + 1]);
}

namespace detail {

inline std::vector<KeyPose> knots_with_endpoints(std::span<const KeyPose> keys, int n, const PoseFrame& mean) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "interpolation needs at least 2 frames");
    std::vector<KeyPose> knots(keys.begin(), keys.end());
    for (const auto& k : knots) {
        if (k.frame < 0 || k.frame >= n) throw Error(ErrorCode::IndexOutOfRange, "key frame outside [0, N)");
    }
    std::stable_sort(knots.begin(), knots.end(), [](const KeyPose& a, const KeyPose& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (knots[i].frame == knots[i - 1].frame) {
            throw Error(ErrorCode::DuplicateKeyIndex, "two keys on frame " + std::to_string(knots[i].frame));
        }
    }
    if (knots.empty() || knots.front().frame != 0) knots.insert(knots.begin(), KeyPose{0, mean});
    if (knots.back().frame != n - 1) knots.push_back(KeyPose{n - 1, mean});
    return knots;
}

} // namespace detail

// Raw per-coordinate spline, without bone-length correction.
inline std::vector<PoseFrame> spline_raw(std::span<const KeyPose> keys, int n, const PoseFrame& mean) {
    const auto knots = detail::knots_with_endpoints(keys, n, mean);
    std::vector<double> x(knots.size()), y(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) x[i] = knots[i].frame;
    std::vector<PoseFrame> out(n);
    for (int j = 0; j < kNumJoints; ++j) {
        for (int c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < knots.size(); ++i) y[i] = knots[i].pose[j][c];
            const auto m = natural_spline_moments(x, y);
            std::size_t seg = 0;
            for (int f = 0; f < n; ++f) {
                while (seg + 2 < knots.size() && f >= knots[seg + 1].frame) ++seg;
                out[f][j][c] = eval_spline_segment(x, y, m, seg, f);
            }
        }
    }
    return out;
}

// Key frames are emitted verbatim. In-between frames whose bone lengths
// drift from the mean pose's skeleton are re-rendered on that skeleton.
inline MotionSequence interpolate(std::span<const KeyPose> keys, int n, const PoseFrame& mean) {
    auto frames = spline_raw(keys, n, mean);
    const auto knots = detail::knots_with_endpoints(keys, n, mean);
    const SkeletonSpec skel(bone_lengths_of(mean));
    std::size_t next = 0;
    for (int f = 0; f < n; ++f) {
        while (next < knots.size() && knots[next].frame < f) ++next;
        if (next < knots.size() && knots[next].frame == f) {
            frames[f] = knots[next].pose;
            continue;
        }
        const auto lens = bone_lengths_of(frames[f]);
        double drift = 0.0;
        for (int b = 0; b < kNumBones; ++b) drift = std::max(drift, std::abs(lens[b] - skel.bone_length(b)));
        if (drift <= 1e-12) continue;
        try {
            const Vec3 root = frames[f][kRootJoint];
            frames[f] = to_pose(to_dirvec(frames[f]), skel);
            for (auto& j : frames[f].joints) j += root;
        } catch (const Error&) {
            // Collapsed bone: keep the raw spline frame.
        }
    }
    MotionSequence seq;
    seq.frames = std::move(frames);
    return seq;
}

} // namespace sgt
