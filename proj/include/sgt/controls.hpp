#pragma once

// Pose and style control tracks. Each frame carries values plus mask bits;
// unmasked values are always exactly zero.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgt/error.hpp"
#include "sgt/motion_json.hpp"
#include "sgt/skeleton.hpp"
#include "sgt/stylestats.hpp"

namespace sgt {

using PoseRow = std::array<double, kPoseDim>;
using StyleRow = std::array<double, kStyleDim>;
using StyleMask = std::array<std::uint8_t, kStyleDim>;

struct PoseControlTrack {
    std::vector<PoseRow> poses;
    std::vector<std::uint8_t> mask;

    int size() const noexcept { return static_cast<int>(mask.size()); }
    int masked_count() const {
        int n = 0;
        for (auto m : mask) n += m;
        return n;
    }
    bool operator==(const PoseControlTrack&) const = default;
};

struct StyleControlTrack {
    std::vector<StyleRow> values;
    std::vector<StyleMask> masks;

    int size() const noexcept { return static_cast<int>(masks.size()); }
    int masked_count() const {
        int n = 0;
        for (const auto& m : masks) n += m[0] + m[1] + m[2];
        return n;
    }
    bool operator==(const StyleControlTrack&) const = default;
};

struct ControlSet {
    PoseControlTrack pose;
    StyleControlTrack style;

    int size() const noexcept { return pose.size(); }
    bool operator==(const ControlSet&) const = default;
};

inline PoseControlTrack empty_pose_controls(int t) {
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "control track needs at least one frame");
    PoseControlTrack track;
    track.poses.assign(t, PoseRow{});
    track.mask.assign(t, 0);
    return track;
}

inline StyleControlTrack empty_style_controls(int t) {
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "control track needs at least one frame");
    StyleControlTrack track;
    track.values.assign(t, StyleRow{});
    track.masks.assign(t, StyleMask{});
    return track;
}

inline ControlSet empty_controls(int t) { return {empty_pose_controls(t), empty_style_controls(t)}; }

inline PoseRow pose_row(const DirVecFrame& f) { return f.flat(); }

inline PoseControlTrack set_pose_control(PoseControlTrack track, int begin, int end,
                                         std::span<const DirVecFrame> frames) {
    if (begin < 0 || end > track.size() || begin >= end) {
        throw Error(ErrorCode::RangeOutOfBounds, "pose control range outside the track");
    }
    if (static_cast<int>(frames.size()) != end - begin) {
        throw Error(ErrorCode::LengthMismatch, "pose control motion length differs from range");
    }
    for (int i = begin; i < end; ++i) {
        track.poses[i] = pose_row(frames[i - begin]);
        track.mask[i] = 1;
    }
    return track;
}

inline PoseControlTrack set_pose_control(PoseControlTrack track, int begin, int end, const MotionSequence& motion) {
    if (static_cast<int>(motion.size()) != end - begin) {
        if (begin < 0 || end > track.size() || begin >= end) {
            throw Error(ErrorCode::RangeOutOfBounds, "pose control range outside the track");
        }
        throw Error(ErrorCode::LengthMismatch, "pose control motion length differs from range");
    }
    const auto dirs = to_dirvecs(motion);
    return set_pose_control(std::move(track), begin, end, std::span<const DirVecFrame>(dirs));
}

inline PoseControlTrack clear_pose_control(PoseControlTrack track, int begin, int end) {
    if (begin < 0 || end > track.size() || begin > end) {
        throw Error(ErrorCode::RangeOutOfBounds, "pose control range outside the track");
    }
    for (int i = begin; i < end; ++i) {
        track.poses[i] = PoseRow{};
        track.mask[i] = 0;
    }
    return track;
}

// Sets one style element over [begin, end). Values are normalized units.
inline StyleControlTrack set_style_control(StyleControlTrack track, int begin, int end, int element, double value) {
    if (begin < 0 || end > track.size() || begin >= end) {
        throw Error(ErrorCode::RangeOutOfBounds, "style control range outside the track");
    }
    if (element < 0 || element >= kStyleDim) throw Error(ErrorCode::InvalidArgument, "unknown style element");
    if (!(value >= -kStyleClamp && value <= kStyleClamp)) {
        throw Error(ErrorCode::InvalidArgument, "style control value outside [-3, 3]");
    }
    for (int i = begin; i < end; ++i) {
        track.values[i][element] = value;
        track.masks[i][element] = 1;
    }
    return track;
}

// Style control on every frame and element, taken from a normalized style track.
inline StyleControlTrack full_style_controls(std::span<const StyleFrame> normalized) {
    StyleControlTrack track = empty_style_controls(static_cast<int>(normalized.size()));
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        for (int k = 0; k < kStyleDim; ++k) {
            track.values[i][k] = normalized[i][k];
            track.masks[i][k] = 1;
        }
    }
    return track;
}

struct ControlDropout {
    double p_drop_all = 0.3;
    // Applied only when not all controls are dropped.
    double p_drop_pose = 0.3;
    double p_drop_style = 0.3;
    double p_drop_style_element = 0.5;
};

struct SimulatedControls {
    ControlSet controls;
    bool dropped_all = false;
    bool pose_kept = false;
    bool style_kept = false;
    int slice_begin = 0;
    int slice_length = 0;
};

// Simulated training-time controls drawn from a reference window.
// `reference` holds the reference dir-vecs and `reference_style` its
// normalized style track; both have length t.
template <class Rng>
SimulatedControls simulate_controls(std::span<const DirVecFrame> reference,
                                    std::span<const StyleFrame> reference_style,
                                    const ControlDropout& dropout, Rng& rng) {
    const int t = static_cast<int>(reference.size());
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "reference window is empty");
    if (static_cast<int>(reference_style.size()) != t) {
        throw Error(ErrorCode::LengthMismatch, "style track length differs from reference");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> length_dist(1, t);

    SimulatedControls out;
    out.controls = empty_controls(t);
    // Every draw is consumed regardless of branch so the rng stream has a
    // fixed stride per sample.
    const bool drop_all = unit(rng) < dropout.p_drop_all;
    const bool keep_pose = unit(rng) >= dropout.p_drop_pose;
    const bool keep_style = unit(rng) >= dropout.p_drop_style;
    const int length = length_dist(rng);
    std::uniform_int_distribution<int> begin_dist(0, t - length);
    const int begin = begin_dist(rng);
    StyleMask elements{};
    do {
        for (auto& e : elements) e = unit(rng) >= dropout.p_drop_style_element ? 1 : 0;
    } while (elements[0] + elements[1] + elements[2] == 0);

    out.slice_begin = begin;
    out.slice_length = length;
    if (drop_all) {
        out.dropped_all = true;
        return out;
    }
    if (keep_pose) {
        out.pose_kept = true;
        out.controls.pose = set_pose_control(std::move(out.controls.pose), begin, begin + length,
                                             reference.subspan(begin, length));
    }
    if (keep_style) {
        out.style_kept = true;
        for (int i = 0; i < t; ++i) {
            for (int k = 0; k < kStyleDim; ++k) {
                if (!elements[k]) continue;
                out.controls.style.values[i][k] = reference_style[i][k];
                out.controls.style.masks[i][k] = 1;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Service JSON schema
//
// {"pose_controls": [{"start": int, "frames": [frame, ...]}],
//  "style_controls": [{"start": int, "end": int,
//                      "speed": float|null, "space": float|null, "handedness": float|null}]}
//
// A pose frame is either 9 bone direction rows or 10 joint-position rows.
// Style segments cover [start, end). Later entries overwrite earlier ones.

inline ControlSet controls_from_json(const nlohmann::json& j, int n_frames) {
    using nlohmann::json;
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "controls must be an object");
    ControlSet set = empty_controls(n_frames);
    if (j.contains("pose_controls")) {
        const auto& list = j["pose_controls"];
        if (!list.is_array()) throw Error(ErrorCode::SchemaViolation, "pose_controls must be an array");
        for (const auto& entry : list) {
            if (!entry.is_object() || !entry.contains("start") || !entry["start"].is_number_integer() ||
                !entry.contains("frames") || !entry["frames"].is_array() || entry["frames"].empty()) {
                throw Error(ErrorCode::SchemaViolation, "pose control needs integer start and non-empty frames");
            }
            const int start = entry["start"].get<int>();
            std::vector<DirVecFrame> frames;
            for (const auto& f : entry["frames"]) {
                if (!f.is_array()) throw Error(ErrorCode::SchemaViolation, "pose frame must be an array");
                if (f.size() == kNumBones) {
                    frames.push_back(dirvec_from_json(f));
                } else if (f.size() == kNumJoints) {
                    try {
                        frames.push_back(to_dirvec(pose_from_json(f)));
                    } catch (const Error& e) {
                        if (e.code() == ErrorCode::SchemaViolation) throw;
                        throw Error(ErrorCode::SchemaViolation, e.what());
                    }
                } else {
                    throw Error(ErrorCode::SchemaViolation, "pose frame needs 9 or 10 rows");
                }
            }
            const int end = start + static_cast<int>(frames.size());
            if (start < 0 || end > n_frames) {
                throw Error(ErrorCode::SchemaViolation, "pose control outside the timeline");
            }
            set.pose = set_pose_control(std::move(set.pose), start, end, std::span<const DirVecFrame>(frames));
        }
    }
    if (j.contains("style_controls")) {
        const auto& list = j["style_controls"];
        if (!list.is_array()) throw Error(ErrorCode::SchemaViolation, "style_controls must be an array");
        static constexpr std::array<const char*, kStyleDim> keys = {"speed", "space", "handedness"};
        for (const auto& entry : list) {
            if (!entry.is_object() || !entry.contains("start") || !entry["start"].is_number_integer() ||
                !entry.contains("end") || !entry["end"].is_number_integer()) {
                throw Error(ErrorCode::SchemaViolation, "style control needs integer start and end");
            }
            const int start = entry["start"].get<int>();
            const int end = entry["end"].get<int>();
            if (start < 0 || end > n_frames || start >= end) {
                throw Error(ErrorCode::SchemaViolation, "style control outside the timeline");
            }
            for (int k = 0; k < kStyleDim; ++k) {
                if (!entry.contains(keys[k]) || entry[keys[k]].is_null()) continue;
                if (!entry[keys[k]].is_number()) {
                    throw Error(ErrorCode::SchemaViolation, std::string(keys[k]) + " must be a number or null");
                }
                const double v = entry[keys[k]].get<double>();
                if (!(v >= -kStyleClamp && v <= kStyleClamp)) {
                    throw Error(ErrorCode::SchemaViolation, std::string(keys[k]) + " outside [-3, 3]");
                }
                set.style = set_style_control(std::move(set.style), start, end, k, v);
            }
        }
    }
    return set;
}

// Emits masked pose runs as dir-vec segments and style runs as maximal
// segments of identical (value, mask) rows.
inline nlohmann::json controls_to_json(const ControlSet& set) {
    using nlohmann::json;
    json pose = json::array();
    const int n = set.size();
    for (int i = 0; i < n;) {
        if (!set.pose.mask[i]) {
            ++i;
            continue;
        }
        json frames = json::array();
        const int start = i;
        while (i < n && set.pose.mask[i]) {
            frames.push_back(dirvec_to_json(DirVecFrame::from_flat(set.pose.poses[i], false)));
            ++i;
        }
        pose.push_back(json{{"start", start}, {"frames", frames}});
    }
    json style = json::array();
    static constexpr std::array<const char*, kStyleDim> keys = {"speed", "space", "handedness"};
    const int ns = set.style.size();
    for (int i = 0; i < ns;) {
        const auto& m = set.style.masks[i];
        if (m[0] + m[1] + m[2] == 0) {
            ++i;
            continue;
        }
        const int start = i;
        while (i < ns && set.style.masks[i] == m && set.style.values[i] == set.style.values[start]) ++i;
        json seg{{"start", start}, {"end", i}};
        for (int k = 0; k < kStyleDim; ++k) {
            seg[keys[k]] = m[k] ? json(set.style.values[start][k]) : json(nullptr);
        }
        style.push_back(seg);
    }
    return json{{"pose_controls", pose}, {"style_controls", style}};
}

} // namespace sgt
