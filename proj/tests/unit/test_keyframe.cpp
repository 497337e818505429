#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <optional>
#include <random>

#include "sgt/keyframe.hpp"
#include "support.hpp"

using namespace sgt;

namespace {

// Natural cubic spline in coefficient form: on segment i,
// s_i(x) = a_i + b_i dx + c_i dx^2 + d_i dx^3, solved as one dense system of
// interpolation, C1, C2 and natural boundary equations.
struct DenseSpline {
    std::vector<double> x;
    Eigen::VectorXd coef;

    DenseSpline(const std::vector<double>& xs, const std::vector<double>& ys) : x(xs) {
        const int s = static_cast<int>(xs.size()) - 1;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * s, 4 * s);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4 * s);
        int row = 0;
        for (int i = 0; i < s; ++i) {
            const double h = xs[i + 1] - xs[i];
            a(row, 4 * i) = 1;
            rhs[row++] = ys[i];
            a(row, 4 * i) = 1;
            a(row, 4 * i + 1) = h;
            a(row, 4 * i + 2) = h * h;
            a(row, 4 * i + 3) = h * h * h;
            rhs[row++] = ys[i + 1];
            if (i + 1 < s) {
                a(row, 4 * i + 1) = 1;
                a(row, 4 * i + 2) = 2 * h;
                a(row, 4 * i + 3) = 3 * h * h;
                a(row++, 4 * (i + 1) + 1) = -1;
                a(row, 4 * i + 2) = 2;
                a(row, 4 * i + 3) = 6 * h;
                a(row++, 4 * (i + 1) + 2) = -2;
            }
        }
        a(row++, 2) = 2;
        a(row, 4 * (s - 1) + 2) = 2;
        a(row++, 4 * (s - 1) + 3) = 6 * (xs[s] - xs[s - 1]);
        coef = a.fullPivLu().solve(rhs);
    }

    double operator()(double at) const {
        std::size_t i = 0;
        while (i + 2 < x.size() && at >= x[i + 1]) ++i;
        const double dx = at - x[i];
        return coef[4 * i] + dx * (coef[4 * i + 1] + dx * (coef[4 * i + 2] + dx * coef[4 * i + 3]));
    }

    double second_derivative(std::size_t seg, double dx) const { return 2 * coef[4 * seg + 2] + 6 * coef[4 * seg + 3] * dx; }
};

std::vector<KeyPose> random_keys(std::mt19937_64& rng, std::vector<int> frames) {
    std::vector<KeyPose> keys;
    for (int f : frames) keys.push_back({f, test::random_pose(rng)});
    return keys;
}

} // namespace

TEST(Keyframe, MomentsMatchDenseOracle) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::vector<double> x{0, 3, 4, 9, 15, 16, 29};
    std::vector<double> y;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(u(rng));
    const DenseSpline oracle(x, y);
    const auto m = natural_spline_moments(x, y);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) EXPECT_NEAR(m[i], oracle.second_derivative(i, 0.0), 1e-9);
    EXPECT_EQ(m.front(), 0.0);
    EXPECT_EQ(m.back(), 0.0);
}

TEST(Keyframe, RawSplineMatchesDenseOracle) {
    std::mt19937_64 rng(2);
    const int n = 60;
    const auto keys = random_keys(rng, {7, 18, 19, 33, 50});
    const auto mean = test::random_pose(rng);
    const auto raw = spline_raw(keys, n, mean);
    std::vector<double> x{0};
    for (const auto& k : keys) x.push_back(k.frame);
    x.push_back(n - 1);
    for (int j = 0; j < kNumJoints; ++j) {
        for (int c = 0; c < 3; ++c) {
            std::vector<double> y{mean[j][c]};
            for (const auto& k : keys) y.push_back(k.pose[j][c]);
            y.push_back(mean[j][c]);
            const DenseSpline oracle(x, y);
            for (int f = 0; f < n; ++f) EXPECT_NEAR(raw[f][j][c], oracle(f), 1e-9) << j << "," << c << " @" << f;
        }
    }
}

TEST(Keyframe, KnotsAreReproducedExactly) {
    std::mt19937_64 rng(3);
    const auto keys = random_keys(rng, {0, 5, 6, 20, 44});
    const auto mean = test::random_pose(rng);
    const auto seq = interpolate(keys, 45, mean);
    ASSERT_EQ(seq.size(), 45u);
    for (const auto& k : keys) {
        for (int j = 0; j < kNumJoints; ++j) EXPECT_EQ(seq.frames[k.frame][j], k.pose[j]);
    }
    const auto raw = spline_raw(keys, 45, mean);
    for (const auto& k : keys) {
        for (int j = 0; j < kNumJoints; ++j) EXPECT_LT((raw[k.frame][j] - k.pose[j]).norm(), 1e-12);
    }
}

TEST(Keyframe, UnkeyedEndsArePinnedToTheMeanPose) {
    std::mt19937_64 rng(4);
    const auto keys = random_keys(rng, {10});
    const auto mean = test::random_pose(rng);
    const auto seq = interpolate(keys, 25, mean);
    for (int j = 0; j < kNumJoints; ++j) {
        EXPECT_EQ(seq.frames.front()[j], mean[j]);
        EXPECT_EQ(seq.frames.back()[j], mean[j]);
    }
}

TEST(Keyframe, MeanOnlyInputIsConstant) {
    std::mt19937_64 rng(5);
    const auto mean = test::random_pose(rng);
    const auto seq = interpolate({}, 40, mean);
    for (const auto& f : seq.frames) {
        for (int j = 0; j < kNumJoints; ++j) EXPECT_EQ(f[j], mean[j]);
    }
}

TEST(Keyframe, InBetweensKeepBoneLengths) {
    std::mt19937_64 rng(6);
    const auto keys = random_keys(rng, {8, 16, 30});
    const auto mean = test::random_pose(rng);
    const auto seq = interpolate(keys, 40, mean);
    const auto target = bone_lengths_of(mean);
    const auto raw = spline_raw(keys, 40, mean);
    for (int f = 0; f < 40; ++f) {
        const auto lens = bone_lengths_of(seq.frames[f]);
        for (int b = 0; b < kNumBones; ++b) EXPECT_NEAR(lens[b], target[b], 1e-9) << f;
        EXPECT_LT((seq.frames[f][kRootJoint] - raw[f][kRootJoint]).norm(), 1e-12);
    }
}

TEST(Keyframe, SplineIsTwiceContinuous) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<double> x{0, 4, 9, 12, 20};
    std::vector<double> y;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(u(rng));
    const auto m = natural_spline_moments(x, y);
    // First derivative from each side of every interior knot.
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
        const double left = (y[i] - y[i - 1]) / hl + hl * (2 * m[i] + m[i - 1]) / 6.0;
        const double right = (y[i + 1] - y[i]) / hr - hr * (2 * m[i] + m[i + 1]) / 6.0;
        EXPECT_NEAR(left, right, 1e-12);
    }
}

TEST(Keyframe, InvalidKeysAreRejected) {
    std::mt19937_64 rng(8);
    const auto mean = test::random_pose(rng);
    const auto dup = random_keys(rng, {3, 3});
    const auto out_of_range = random_keys(rng, {12});
    const auto negative = random_keys(rng, {-1});
    auto code_of = [&](auto&& fn) -> std::optional<ErrorCode> {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return std::nullopt;
    };
    EXPECT_EQ(code_of([&] { interpolate(dup, 10, mean); }), ErrorCode::DuplicateKeyIndex);
    EXPECT_EQ(code_of([&] { interpolate(out_of_range, 12, mean); }), ErrorCode::IndexOutOfRange);
    EXPECT_EQ(code_of([&] { interpolate(negative, 12, mean); }), ErrorCode::IndexOutOfRange);
    EXPECT_EQ(code_of([&] { interpolate({}, 1, mean); }), ErrorCode::InvalidArgument);
}
