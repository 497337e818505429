#pragma once

#include <random>
#include <vector>

#include "sgt/skeleton.hpp"

namespace sgt::test {

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v;
    do {
        v = Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-3);
    return v.normalized();
}

inline DirVecFrame random_dirvec(std::mt19937_64& rng) {
    DirVecFrame f;
    for (auto& d : f.dirs) d = random_unit(rng);
    return f;
}

inline PoseFrame random_pose(std::mt19937_64& rng, const SkeletonSpec& skel = {}) {
    return to_pose(random_dirvec(rng), skel);
}

// Smooth random motion: bone directions drift by small random steps.
inline MotionSequence random_sequence(std::mt19937_64& rng, int n, const SkeletonSpec& skel = {},
                                      double step = 0.08) {
    std::normal_distribution<double> g(0.0, step);
    DirVecFrame cur = random_dirvec(rng);
    MotionSequence seq;
    for (int i = 0; i < n; ++i) {
        for (auto& d : cur.dirs) d = (d + Vec3(g(rng), g(rng), g(rng))).normalized();
        seq.frames.push_back(to_pose(cur, skel));
    }
    return seq;
}

inline double max_abs_diff(const PoseFrame& a, const PoseFrame& b) {
    double m = 0.0;
    for (int j = 0; j < kNumJoints; ++j) m = std::max(m, (a[j] - b[j]).cwiseAbs().maxCoeff());
    return m;
}

} // namespace sgt::test
