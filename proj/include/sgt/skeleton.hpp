#pragma once

// Upper-body skeleton: 10 joints, 9 bones, rooted at the spine.
//
// Axis convention: x is lateral (the character's left is +x), y is up,
// z points forward. Joint positions are root-relative, so the spine joint
// sits at the origin in every valid PoseFrame.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sgt/error.hpp"

namespace sgt {

using Vec3 = Eigen::Vector3d;

inline constexpr int kNumJoints = 10;
inline constexpr int kNumBones = 9;
inline constexpr int kPoseDim = kNumBones * 3;
inline constexpr double kFps = 15.0;

enum Joint : int {
    kNose = 0,
    kHeadTop = 1,
    kNeck = 2,
    kSpine = 3,
    kRightShoulder = 4,
    kLeftShoulder = 5,
    kRightElbow = 6,
    kLeftElbow = 7,
    kRightWrist = 8,
    kLeftWrist = 9,
};

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "nose", "head_top", "neck", "spine", "r_shoulder",
    "l_shoulder", "r_elbow", "l_elbow", "r_wrist", "l_wrist",
};

struct Bone {
    int parent;
    int child;
};

// Topological order: every bone's parent joint is placed by an earlier bone
// (or is the root).
inline constexpr std::array<Bone, kNumBones> kBones = {{
    {kSpine, kNeck},
    {kNeck, kNose},
    {kNose, kHeadTop},
    {kNeck, kRightShoulder},
    {kRightShoulder, kRightElbow},
    {kRightElbow, kRightWrist},
    {kNeck, kLeftShoulder},
    {kLeftShoulder, kLeftElbow},
    {kLeftElbow, kLeftWrist},
}};

inline constexpr int kRootJoint = kSpine;

// Left/right joint pairs and the matching bone pairs.
inline constexpr std::array<std::pair<int, int>, 3> kMirrorJoints = {{
    {kRightShoulder, kLeftShoulder},
    {kRightElbow, kLeftElbow},
    {kRightWrist, kLeftWrist},
}};
inline constexpr std::array<std::pair<int, int>, 3> kMirrorBones = {{{3, 6}, {4, 7}, {5, 8}}};

// Lengths in normalized skeleton units, roughly a shoulder-width of 0.36.
inline constexpr std::array<double, kNumBones> kDefaultBoneLengths = {
    0.45, 0.17, 0.14, 0.18, 0.28, 0.25, 0.18, 0.28, 0.25,
};

class SkeletonSpec {
public:
    SkeletonSpec() : SkeletonSpec(kDefaultBoneLengths) {}

    explicit SkeletonSpec(const std::array<double, kNumBones>& bone_lengths)
        : lengths_(bone_lengths) {
        for (double len : lengths_) {
            if (!(len > 0.0) || !std::isfinite(len)) {
                throw Error(ErrorCode::InvalidArgument, "bone lengths must be finite and positive");
            }
        }
    }

    const std::array<double, kNumBones>& bone_lengths() const noexcept { return lengths_; }
    double bone_length(int bone) const { return lengths_.at(bone); }

    bool operator==(const SkeletonSpec&) const = default;

private:
    std::array<double, kNumBones> lengths_;
};

struct PoseFrame {
    std::array<Vec3, kNumJoints> joints;

    PoseFrame() { joints.fill(Vec3::Zero()); }

    Vec3& operator[](int j) { return joints[j]; }
    const Vec3& operator[](int j) const { return joints[j]; }

    bool operator==(const PoseFrame& o) const {
        for (int j = 0; j < kNumJoints; ++j) {
            if (joints[j] != o.joints[j]) return false;
        }
        return true;
    }
};

struct DirVecFrame {
    std::array<Vec3, kNumBones> dirs;

    DirVecFrame() { dirs.fill(Vec3::UnitY()); }

    Vec3& operator[](int b) { return dirs[b]; }
    const Vec3& operator[](int b) const { return dirs[b]; }

    // Flattened bone-major layout: [b0.x, b0.y, b0.z, b1.x, ...].
    std::array<double, kPoseDim> flat() const {
        std::array<double, kPoseDim> out{};
        for (int b = 0; b < kNumBones; ++b) {
            for (int k = 0; k < 3; ++k) out[b * 3 + k] = dirs[b][k];
        }
        return out;
    }

    static DirVecFrame from_flat(std::span<const double> v, bool renormalize = true) {
        if (v.size() != kPoseDim) throw Error(ErrorCode::ShapeMismatch, "dir-vec frame needs 27 values");
        DirVecFrame f;
        for (int b = 0; b < kNumBones; ++b) {
            Vec3 d(v[b * 3], v[b * 3 + 1], v[b * 3 + 2]);
            if (renormalize) {
                const double n = d.norm();
                d = n > 1e-12 ? Vec3(d / n) : Vec3(Vec3::UnitY());
            }
            f.dirs[b] = d;
        }
        return f;
    }

    bool operator==(const DirVecFrame& o) const {
        for (int b = 0; b < kNumBones; ++b) {
            if (dirs[b] != o.dirs[b]) return false;
        }
        return true;
    }
};

struct MotionSequence {
    std::vector<PoseFrame> frames;
    double fps = kFps;

    std::size_t size() const noexcept { return frames.size(); }
    bool empty() const noexcept { return frames.empty(); }
    bool operator==(const MotionSequence&) const = default;
};

inline DirVecFrame to_dirvec(const PoseFrame& pose) {
    DirVecFrame out;
    for (int b = 0; b < kNumBones; ++b) {
        const Vec3& p = pose[kBones[b].parent];
        const Vec3& c = pose[kBones[b].child];
        if (!p.allFinite() || !c.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "pose contains non-finite coordinates");
        }
        const Vec3 d = c - p;
        const double n = d.norm();
        if (n < 1e-9) {
            throw Error(ErrorCode::DegeneratePose,
                        "bone " + std::to_string(b) + " has coincident endpoints");
        }
        out[b] = d / n;
    }
    return out;
}

// The skeleton argument is accepted for symmetry with to_pose; direction
// vectors do not depend on bone lengths.
inline DirVecFrame to_dirvec(const PoseFrame& pose, const SkeletonSpec&) { return to_dirvec(pose); }

inline PoseFrame to_pose(const DirVecFrame& dirs, const SkeletonSpec& skel) {
    PoseFrame out;
    out[kRootJoint] = Vec3::Zero();
    for (int b = 0; b < kNumBones; ++b) {
        out[kBones[b].child] = out[kBones[b].parent] + skel.bone_length(b) * dirs[b];
    }
    return out;
}

// Per-bone lengths measured on a pose.
inline std::array<double, kNumBones> bone_lengths_of(const PoseFrame& pose) {
    std::array<double, kNumBones> out{};
    for (int b = 0; b < kNumBones; ++b) {
        out[b] = (pose[kBones[b].child] - pose[kBones[b].parent]).norm();
    }
    return out;
}

inline PoseFrame mirror(const PoseFrame& pose) {
    PoseFrame out = pose;
    for (auto [r, l] : kMirrorJoints) std::swap(out.joints[r], out.joints[l]);
    for (auto& j : out.joints) j.x() = -j.x();
    return out;
}

inline DirVecFrame mirror(const DirVecFrame& frame) {
    DirVecFrame out = frame;
    for (auto [r, l] : kMirrorBones) std::swap(out.dirs[r], out.dirs[l]);
    for (auto& d : out.dirs) d.x() = -d.x();
    return out;
}

inline MotionSequence mirror(const MotionSequence& seq) {
    MotionSequence out;
    out.fps = seq.fps;
    out.frames.reserve(seq.size());
    for (const auto& f : seq.frames) out.frames.push_back(mirror(f));
    return out;
}

inline PoseFrame mean_pose(std::span<const MotionSequence> dataset) {
    std::array<Vec3, kNumJoints> sum;
    sum.fill(Vec3::Zero());
    std::size_t count = 0;
    for (const auto& seq : dataset) {
        for (const auto& f : seq.frames) {
            for (int j = 0; j < kNumJoints; ++j) sum[j] += f[j];
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorCode::EmptyDataset, "mean_pose needs at least one frame");
    PoseFrame out;
    for (int j = 0; j < kNumJoints; ++j) out[j] = sum[j] / static_cast<double>(count);
    const Vec3 root = out[kRootJoint];
    for (auto& j : out.joints) j -= root;
    return out;
}

// Canonical skeleton: mean bone length over every frame of the dataset.
inline SkeletonSpec skeleton_from_dataset(std::span<const MotionSequence> dataset) {
    std::array<double, kNumBones> sum{};
    std::size_t count = 0;
    for (const auto& seq : dataset) {
        for (const auto& f : seq.frames) {
            const auto lens = bone_lengths_of(f);
            for (int b = 0; b < kNumBones; ++b) sum[b] += lens[b];
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorCode::EmptyDataset, "skeleton_from_dataset needs frames");
    for (auto& s : sum) s /= static_cast<double>(count);
    return SkeletonSpec(sum);
}

// Rebuilds every frame on the given skeleton, keeping bone directions.
inline MotionSequence renormalize(const MotionSequence& seq, const SkeletonSpec& skel) {
    MotionSequence out;
    out.fps = seq.fps;
    out.frames.reserve(seq.size());
    for (const auto& f : seq.frames) out.frames.push_back(to_pose(to_dirvec(f), skel));
    return out;
}

inline std::vector<DirVecFrame> to_dirvecs(const MotionSequence& seq) {
    std::vector<DirVecFrame> out;
    out.reserve(seq.size());
    for (const auto& f : seq.frames) out.push_back(to_dirvec(f));
    return out;
}

inline MotionSequence to_motion(std::span<const DirVecFrame> dirs, const SkeletonSpec& skel) {
    MotionSequence out;
    out.frames.reserve(dirs.size());
    for (const auto& d : dirs) out.frames.push_back(to_pose(d, skel));
    return out;
}

} // namespace sgt
