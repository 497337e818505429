#include <gtest/gtest.h>

#include <random>

#include "sgt/controls.hpp"
#include "support.hpp"

using namespace sgt;

namespace {

std::vector<DirVecFrame> random_frames(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<DirVecFrame> out;
    for (int i = 0; i < n; ++i) out.push_back(test::random_dirvec(rng));
    return out;
}

std::vector<StyleFrame> random_style(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<StyleFrame> out(n);
    for (auto& s : out) s = {g(rng), g(rng), g(rng)};
    return out;
}

} // namespace

TEST(Controls, EmptyTracksAreUnmasked) {
    const auto c = empty_controls(12);
    EXPECT_EQ(c.size(), 12);
    EXPECT_EQ(c.pose.masked_count(), 0);
    EXPECT_EQ(c.style.masked_count(), 0);
    EXPECT_THROW(empty_controls(0), Error);
}

TEST(Controls, SetAndClearPoseRange) {
    const auto frames = random_frames(4, 1);
    auto track = set_pose_control(empty_pose_controls(10), 3, 7, std::span<const DirVecFrame>(frames));
    EXPECT_EQ(track.masked_count(), 4);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(track.poses[3 + i], frames[i].flat());
    track = clear_pose_control(track, 4, 6);
    EXPECT_EQ(track.masked_count(), 2);
    EXPECT_EQ(track.mask[3], 1);
    EXPECT_EQ(track.mask[4], 0);
    EXPECT_EQ(track.mask[6], 1);
    EXPECT_THROW(set_pose_control(empty_pose_controls(10), 8, 12, std::span<const DirVecFrame>(frames)), Error);
}

TEST(Controls, StyleElementsAreIndependent) {
    auto track = set_style_control(empty_style_controls(8), 2, 5, 0, 1.5);
    track = set_style_control(track, 0, 8, 2, -0.5);
    EXPECT_EQ(track.masked_count(), 3 + 8);
    EXPECT_EQ(track.masks[2][0], 1);
    EXPECT_EQ(track.masks[2][1], 0);
    EXPECT_DOUBLE_EQ(track.values[3][0], 1.5);
    EXPECT_DOUBLE_EQ(track.values[7][2], -0.5);
    EXPECT_EQ(track.masks[5][0], 0);
}

TEST(Controls, JsonRoundTripIsExact) {
    const auto frames = random_frames(5, 2);
    ControlSet c = empty_controls(30);
    c.pose = set_pose_control(c.pose, 10, 15, std::span<const DirVecFrame>(frames));
    c.pose = set_pose_control(c.pose, 20, 22, std::span<const DirVecFrame>(frames).first(2));
    c.style = set_style_control(c.style, 0, 30, 0, 0.75);
    c.style = set_style_control(c.style, 5, 9, 1, -1.25);
    const auto j = controls_to_json(c);
    EXPECT_EQ(controls_from_json(j, 30), c);
    EXPECT_EQ(controls_to_json(controls_from_json(j, 30)).dump(), j.dump());
}

TEST(Controls, JointPositionFramesConvertToDirections) {
    std::mt19937_64 rng(3);
    const auto pose = test::random_pose(rng);
    json frame = json::array();
    for (int k = 0; k < kNumJoints; ++k) frame.push_back({pose[k].x(), pose[k].y(), pose[k].z()});
    const json doc = {{"pose_controls", {{{"start", 2}, {"frames", {frame}}}}}};
    const auto c = controls_from_json(doc, 5);
    ASSERT_EQ(c.pose.mask[2], 1);
    const auto expect = to_dirvec(pose).flat();
    for (int k = 0; k < kPoseDim; ++k) EXPECT_NEAR(c.pose.poses[2][k], expect[k], 1e-12);
}

TEST(Controls, SchemaViolationsAreRejected) {
    const json bad[] = {
        json::array(),
        {{"pose_controls", 3}},
        {{"pose_controls", {{{"start", 0}, {"frames", json::array()}}}}},
        {{"pose_controls", {{{"start", 4}, {"frames", {json::array({{0, 1, 0}})}}}}}},
        {{"style_controls", {{{"start", 0}, {"end", 0}, {"speed", 1.0}}}}},
        {{"style_controls", {{{"start", 0}, {"end", 11}, {"speed", 1.0}}}}},
        {{"style_controls", {{{"start", 0}, {"end", 5}, {"speed", 4.0}}}}},
        {{"style_controls", {{{"start", 0}, {"end", 5}, {"space", "fast"}}}}},
        {{"style_controls", {{{"start", 0.5}, {"end", 5}}}}},
    };
    for (const auto& j : bad) {
        try {
            controls_from_json(j, 10);
            ADD_FAILURE() << "accepted " << j.dump();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::SchemaViolation) << j.dump();
        }
    }
}

TEST(Controls, NullStyleValuesStayUnmasked) {
    const json doc = {{"style_controls", {{{"start", 1}, {"end", 3}, {"speed", nullptr}, {"space", 0.5}}}}};
    const auto c = controls_from_json(doc, 4);
    EXPECT_EQ(c.style.masked_count(), 2);
    EXPECT_EQ(c.style.masks[1][0], 0);
    EXPECT_EQ(c.style.masks[1][1], 1);
}

TEST(Controls, SimulatedControlsCopyReferenceWhereMasked) {
    const int t = 30;
    const auto ref = random_frames(t, 4);
    const auto style = random_style(t, 5);
    std::mt19937_64 rng(6);
    int dropped = 0, pose_kept = 0, style_kept = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto s = simulate_controls(std::span<const DirVecFrame>(ref), std::span<const StyleFrame>(style),
                                         ControlDropout{}, rng);
        ASSERT_EQ(s.controls.size(), t);
        dropped += s.dropped_all;
        pose_kept += s.pose_kept;
        style_kept += s.style_kept;
        if (s.dropped_all) {
            EXPECT_EQ(s.controls.pose.masked_count() + s.controls.style.masked_count(), 0);
            continue;
        }
        for (int i = 0; i < t; ++i) {
            const bool in_slice = i >= s.slice_begin && i < s.slice_begin + s.slice_length;
            EXPECT_EQ(s.controls.pose.mask[i], s.pose_kept && in_slice ? 1 : 0);
            if (s.controls.pose.mask[i]) {
                EXPECT_EQ(s.controls.pose.poses[i], ref[i].flat());
            }
            for (int k = 0; k < kStyleDim; ++k) {
                if (s.controls.style.masks[i][k]) {
                    EXPECT_EQ(s.controls.style.values[i][k], style[i][k]);
                }
                // Style controls cover the whole window when kept.
                EXPECT_EQ(s.controls.style.masks[i][k], s.controls.style.masks[0][k]);
            }
        }
        if (s.style_kept) {
            EXPECT_GT(s.controls.style.masked_count(), 0);
        }
    }
    EXPECT_NEAR(dropped / 400.0, 0.3, 0.08);
    EXPECT_NEAR(pose_kept / 400.0, 0.7 * 0.7, 0.08);
    EXPECT_NEAR(style_kept / 400.0, 0.7 * 0.7, 0.08);
}

TEST(Controls, SimulationIsSeedDeterministic) {
    const auto ref = random_frames(20, 7);
    const auto style = random_style(20, 8);
    std::mt19937_64 a(9), b(9);
    for (int i = 0; i < 20; ++i) {
        const auto x = simulate_controls(std::span<const DirVecFrame>(ref), std::span<const StyleFrame>(style),
                                         ControlDropout{}, a);
        const auto y = simulate_controls(std::span<const DirVecFrame>(ref), std::span<const StyleFrame>(style),
                                         ControlDropout{}, b);
        EXPECT_EQ(x.controls, y.controls);
    }
}
