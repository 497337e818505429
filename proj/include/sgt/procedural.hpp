#pragma once

// Low-dimensional body parameterization used to author procedural motion.
// Every pose built here is rigid by construction because it is assembled
// from unit bone directions.

#include <cmath>
#include <numbers>

#include "sgt/skeleton.hpp"

namespace sgt {

// Arm angles. lift is measured from hanging straight down (0) through
// horizontal (pi/2) to straight up (pi); azimuth rotates the raised arm from
// lateral (0) toward the front (pi/2); bend folds the forearm forward.
struct ArmParams {
    double lift = 0.25;
    double azimuth = 0.6;
    double bend = 0.9;
};

struct BodyParams {
    double lean_x = 0.0;
    double lean_z = 0.0;
    double head_pitch = 0.0;
    double head_yaw = 0.0;
    double shrug = 0.0;
    ArmParams right;
    ArmParams left;
};

inline ArmParams lerp(const ArmParams& a, const ArmParams& b, double w) {
    return {a.lift + w * (b.lift - a.lift), a.azimuth + w * (b.azimuth - a.azimuth), a.bend + w * (b.bend - a.bend)};
}

inline BodyParams lerp(const BodyParams& a, const BodyParams& b, double w) {
    BodyParams out;
    out.lean_x = a.lean_x + w * (b.lean_x - a.lean_x);
    out.lean_z = a.lean_z + w * (b.lean_z - a.lean_z);
    out.head_pitch = a.head_pitch + w * (b.head_pitch - a.head_pitch);
    out.head_yaw = a.head_yaw + w * (b.head_yaw - a.head_yaw);
    out.shrug = a.shrug + w * (b.shrug - a.shrug);
    out.right = lerp(a.right, b.right, w);
    out.left = lerp(a.left, b.left, w);
    return out;
}

namespace detail {

// Elevation above the horizontal plane and yaw from the +z (front) axis.
inline Vec3 spherical(double elevation, double yaw) {
    return {std::cos(elevation) * std::sin(yaw), std::sin(elevation), std::cos(elevation) * std::cos(yaw)};
}

// side = -1 for the right arm (character's right is -x), +1 for the left.
inline Vec3 arm_direction(double lift, double azimuth, double side) {
    return {side * std::sin(lift) * std::cos(azimuth), -std::cos(lift), std::sin(lift) * std::sin(azimuth)};
}

} // namespace detail

inline DirVecFrame body_dirvec(const BodyParams& p) {
    DirVecFrame f;
    f[0] = Vec3(p.lean_x, 1.0, p.lean_z).normalized();
    f[1] = detail::spherical(0.45 + p.head_pitch, p.head_yaw);
    f[2] = detail::spherical(1.25 + p.head_pitch, p.head_yaw);
    f[3] = Vec3(-1.0, -0.12 + p.shrug, 0.0).normalized();
    f[6] = Vec3(1.0, -0.12 + p.shrug, 0.0).normalized();
    auto arm = [&](const ArmParams& a, double side, int upper, int lower) {
        f[upper] = detail::arm_direction(a.lift, a.azimuth, side);
        f[lower] = detail::arm_direction(a.lift + 0.6 * a.bend, a.azimuth + 0.8 * a.bend, side);
    };
    arm(p.right, -1.0, 4, 5);
    arm(p.left, 1.0, 7, 8);
    return f;
}

inline PoseFrame body_pose(const BodyParams& p, const SkeletonSpec& skel = {}) { return to_pose(body_dirvec(p), skel); }

inline BodyParams rest_body() { return {}; }

inline BodyParams point_right_body() {
    BodyParams b;
    b.right = {std::numbers::pi / 2, 0.0, 0.0};
    return b;
}

inline BodyParams point_left_body() {
    BodyParams b;
    b.left = {std::numbers::pi / 2, 0.0, 0.0};
    return b;
}

inline BodyParams raise_hands_body() {
    BodyParams b;
    b.right = {2.7, 0.25, 0.2};
    b.left = {2.7, 0.25, 0.2};
    b.head_pitch = 0.15;
    return b;
}

// Smooth bump on [0, 1]: 0 at both ends, 1 at the centre, zero slope at the
// ends.
inline double bump(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double s = std::sin(std::numbers::pi * u);
    return s * s;
}

} // namespace sgt
