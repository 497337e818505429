#pragma once

// Style statistics: speed, space and handedness tracks of a motion.
//
// For frame i the statistics average over the window [i - w/2, i + w/2]
// clamped to the valid range. Speed averages per-joint displacement
// magnitudes over both the window and the joint set; space is the mean
// wrist separation; handedness compares left and right wrist speeds.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "sgt/error.hpp"
#include "sgt/skeleton.hpp"

namespace sgt {

inline constexpr int kStyleWindow = 30;
inline constexpr int kStyleDim = 3;
inline constexpr double kStyleClamp = 3.0;
// Below this wrist speed on both sides handedness is defined as 0.
inline constexpr double kHandednessEps = 1e-6;

enum StyleElement : int { kSpeed = 0, kSpace = 1, kHandedness = 2 };

struct StyleFrame {
    double speed = 0.0;
    double space = 0.0;
    double handedness = 0.0;
    bool normalized = false;

    double operator[](int k) const { return k == kSpeed ? speed : (k == kSpace ? space : handedness); }
    double& operator[](int k) { return k == kSpeed ? speed : (k == kSpace ? space : handedness); }
};

struct StyleNormStats {
    std::array<double, kStyleDim> mean{0.0, 0.0, 0.0};
    std::array<double, kStyleDim> stddev{1.0, 1.0, 1.0};

    void validate() const {
        for (double s : stddev) {
            if (!(s > 0.0) || !std::isfinite(s)) {
                throw Error(ErrorCode::InvalidArgument, "style std must be positive");
            }
        }
    }
    bool operator==(const StyleNormStats&) const = default;
};

namespace detail {

struct WindowRange {
    int lo;
    int hi; // inclusive
    int count() const { return hi - lo + 1; }
};

// Displacement terms exist for j in [1, n-1]; position terms for j in [0, n-1].
inline WindowRange displacement_window(int i, int n, int window) {
    const int half = window / 2;
    return {std::max(1, i - half), std::min(n - 1, i + half)};
}

inline WindowRange position_window(int i, int n, int window) {
    const int half = window / 2;
    return {std::max(0, i - half), std::min(n - 1, i + half)};
}

struct FrameTerms {
    std::vector<double> joint_speed; // mean over joints of |p_j - p_{j-1}|, index j
    std::vector<double> left_speed;
    std::vector<double> right_speed;
    std::vector<double> separation;  // |left wrist - right wrist|, index j
};

inline FrameTerms frame_terms(std::span<const PoseFrame> frames) {
    const int n = static_cast<int>(frames.size());
    FrameTerms t;
    t.joint_speed.assign(n, 0.0);
    t.left_speed.assign(n, 0.0);
    t.right_speed.assign(n, 0.0);
    t.separation.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        t.separation[j] = (frames[j][kLeftWrist] - frames[j][kRightWrist]).norm();
        if (j == 0) continue;
        double sum = 0.0;
        for (int k = 0; k < kNumJoints; ++k) sum += (frames[j][k] - frames[j - 1][k]).norm();
        t.joint_speed[j] = sum / kNumJoints;
        t.left_speed[j] = (frames[j][kLeftWrist] - frames[j - 1][kLeftWrist]).norm();
        t.right_speed[j] = (frames[j][kRightWrist] - frames[j - 1][kRightWrist]).norm();
    }
    return t;
}

inline std::vector<double> prefix(const std::vector<double>& v) {
    std::vector<double> p(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) p[i + 1] = p[i] + v[i];
    return p;
}

inline double window_mean(const std::vector<double>& pre, WindowRange r) {
    return (pre[r.hi + 1] - pre[r.lo]) / r.count();
}

inline double handedness(double left, double right) {
    if (left < kHandednessEps && right < kHandednessEps) return 0.0;
    if (right > left) return left / right - 1.0;
    return 1.0 - right / left;
}

inline void accumulate_unit(Vec3& grad, const Vec3& delta, double scale) {
    const double n = delta.norm();
    if (n > 0.0) grad += scale * delta / n;
}

} // namespace detail

inline std::vector<StyleFrame> style_track(std::span<const PoseFrame> frames, int window = kStyleWindow) {
    const int n = static_cast<int>(frames.size());
    if (n < 2) throw Error(ErrorCode::SequenceTooShort, "style statistics need at least 2 frames");
    if (window < 1) throw Error(ErrorCode::InvalidArgument, "style window must be positive");
    const auto terms = detail::frame_terms(frames);
    const auto speed_pre = detail::prefix(terms.joint_speed);
    const auto left_pre = detail::prefix(terms.left_speed);
    const auto right_pre = detail::prefix(terms.right_speed);
    const auto sep_pre = detail::prefix(terms.separation);

    std::vector<StyleFrame> out(n);
    for (int i = 0; i < n; ++i) {
        const auto dw = detail::displacement_window(i, n, window);
        const auto pw = detail::position_window(i, n, window);
        out[i].speed = detail::window_mean(speed_pre, dw);
        out[i].space = detail::window_mean(sep_pre, pw);
        out[i].handedness = detail::handedness(detail::window_mean(left_pre, dw),
                                               detail::window_mean(right_pre, dw));
    }
    return out;
}

inline std::vector<StyleFrame> style_track(const MotionSequence& seq, int window = kStyleWindow) {
    return style_track(std::span<const PoseFrame>(seq.frames), window);
}

// Reverse-mode derivative of style_track: given dL/d(style) per frame,
// returns dL/d(joint position) per frame. Exact-zero displacements and the
// handedness dead zone contribute zero gradient.
inline std::vector<PoseFrame> style_track_backward(std::span<const PoseFrame> frames,
                                                   std::span<const StyleFrame> grad,
                                                   int window = kStyleWindow) {
    const int n = static_cast<int>(frames.size());
    if (n < 2) throw Error(ErrorCode::SequenceTooShort, "style statistics need at least 2 frames");
    if (static_cast<int>(grad.size()) != n) throw Error(ErrorCode::ShapeMismatch, "gradient length mismatch");
    const auto terms = detail::frame_terms(frames);
    const auto left_pre = detail::prefix(terms.left_speed);
    const auto right_pre = detail::prefix(terms.right_speed);

    std::vector<double> d_joint(n, 0.0), d_left(n, 0.0), d_right(n, 0.0), d_sep(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto dw = detail::displacement_window(i, n, window);
        const auto pw = detail::position_window(i, n, window);
        const double gs = grad[i].speed / dw.count();
        for (int j = dw.lo; j <= dw.hi; ++j) d_joint[j] += gs;
        const double gp = grad[i].space / pw.count();
        for (int j = pw.lo; j <= pw.hi; ++j) d_sep[j] += gp;

        const double left = detail::window_mean(left_pre, dw);
        const double right = detail::window_mean(right_pre, dw);
        double dl = 0.0, dr = 0.0;
        if (!(left < kHandednessEps && right < kHandednessEps)) {
            if (right > left) {
                dl = 1.0 / right;
                dr = -left / (right * right);
            } else {
                dr = -1.0 / left;
                dl = right / (left * left);
            }
        }
        const double gh = grad[i].handedness / dw.count();
        for (int j = dw.lo; j <= dw.hi; ++j) {
            d_left[j] += gh * dl;
            d_right[j] += gh * dr;
        }
    }

    std::vector<PoseFrame> out(n);
    for (int j = 0; j < n; ++j) {
        const Vec3 sep = frames[j][kLeftWrist] - frames[j][kRightWrist];
        detail::accumulate_unit(out[j][kLeftWrist], sep, d_sep[j]);
        detail::accumulate_unit(out[j][kRightWrist], sep, -d_sep[j]);
        if (j == 0) continue;
        for (int k = 0; k < kNumJoints; ++k) {
            const Vec3 delta = frames[j][k] - frames[j - 1][k];
            double scale = d_joint[j] / kNumJoints;
            if (k == kLeftWrist) scale += d_left[j];
            if (k == kRightWrist) scale += d_right[j];
            Vec3 g = Vec3::Zero();
            detail::accumulate_unit(g, delta, scale);
            out[j][k] += g;
            out[j - 1][k] -= g;
        }
    }
    return out;
}

inline StyleFrame normalize_style(const StyleFrame& raw, const StyleNormStats& stats) {
    StyleFrame out;
    for (int k = 0; k < kStyleDim; ++k) {
        const double z = (raw[k] - stats.mean[k]) / stats.stddev[k];
        out[k] = std::clamp(z, -kStyleClamp, kStyleClamp);
    }
    out.normalized = true;
    return out;
}

inline std::vector<StyleFrame> normalize_style(std::span<const StyleFrame> raw, const StyleNormStats& stats) {
    stats.validate();
    std::vector<StyleFrame> out;
    out.reserve(raw.size());
    for (const auto& f : raw) out.push_back(normalize_style(f, stats));
    return out;
}

inline StyleFrame denormalize_style(const StyleFrame& z, const StyleNormStats& stats) {
    StyleFrame out;
    for (int k = 0; k < kStyleDim; ++k) out[k] = z[k] * stats.stddev[k] + stats.mean[k];
    return out;
}

inline StyleNormStats fit_norm_stats(std::span<const MotionSequence> dataset, int window = kStyleWindow) {
    std::array<double, kStyleDim> sum{}, sum_sq{};
    std::size_t count = 0;
    for (const auto& seq : dataset) {
        for (const auto& f : style_track(seq, window)) {
            for (int k = 0; k < kStyleDim; ++k) {
                sum[k] += f[k];
                sum_sq[k] += f[k] * f[k];
            }
            ++count;
        }
    }
    if (count < 2) throw Error(ErrorCode::EmptyDataset, "need at least 2 style frames");
    StyleNormStats stats;
    for (int k = 0; k < kStyleDim; ++k) {
        const double m = sum[k] / count;
        const double var = std::max(0.0, sum_sq[k] / count - m * m);
        stats.mean[k] = m;
        stats.stddev[k] = std::sqrt(var);
        if (stats.stddev[k] < 1e-8) {
            throw Error(ErrorCode::DegenerateVariance, "style element " + std::to_string(k) + " has no variance");
        }
    }
    return stats;
}

} // namespace sgt
