#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "sgt/evaluation.hpp"
#include "sgt/metrics.hpp"
#include "support.hpp"

using namespace sgt;

namespace {

Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

// Trace of (S1 S2)^(1/2) from the eigenvalues of the non-symmetric product.
double product_root_trace(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(s1 * s2);
    double tr = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) tr += std::sqrt(std::max(0.0, es.eigenvalues()[i].real()));
    return tr;
}

std::vector<DirVecFrame> smooth_window(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return to_dirvecs(test::random_sequence(rng, n));
}

} // namespace

TEST(Metrics, FitGaussianUsesPopulationCovariance) {
    Eigen::MatrixXd x(2, 4);
    x << 1, 2, 3, 4, 0, 0, 2, 2;
    const auto g = fit_gaussian(x);
    EXPECT_DOUBLE_EQ(g.mean[0], 2.5);
    EXPECT_DOUBLE_EQ(g.cov(0, 0), 1.25);
    EXPECT_DOUBLE_EQ(g.cov(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(g.cov(0, 1), 1.0);
    EXPECT_THROW(fit_gaussian(Eigen::MatrixXd(3, 0)), Error);
}

TEST(Metrics, FrechetIdentity) {
    std::mt19937_64 rng(1);
    GaussianStats g{Eigen::VectorXd::Random(8), random_spd(8, rng)};
    EXPECT_NEAR(frechet_distance(g, g), 0.0, 1e-8);
}

TEST(Metrics, FrechetMeanShift) {
    std::mt19937_64 rng(2);
    const auto cov = random_spd(6, rng);
    const Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
    const GaussianStats a{Eigen::VectorXd::Zero(6), cov}, b{m, cov};
    EXPECT_NEAR(frechet_distance(a, b), m.squaredNorm(), 1e-8);
}

TEST(Metrics, FrechetScaledIdentity) {
    for (int d : {1, 4, 32}) {
        const GaussianStats a{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
        const GaussianStats b{Eigen::VectorXd::Zero(d), 4.0 * Eigen::MatrixXd::Identity(d, d)};
        EXPECT_NEAR(frechet_distance(a, b), static_cast<double>(d), 1e-6);
    }
}

TEST(Metrics, FrechetMatchesNonSymmetricRoute) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto s1 = random_spd(7, rng), s2 = random_spd(7, rng);
        const GaussianStats a{Eigen::VectorXd::Random(7), s1}, b{Eigen::VectorXd::Random(7), s2};
        const double expect =
            (a.mean - b.mean).squaredNorm() + s1.trace() + s2.trace() - 2.0 * product_root_trace(s1, s2);
        EXPECT_NEAR(frechet_distance(a, b), expect, 1e-8 * (1.0 + expect));
        EXPECT_NEAR(frechet_distance(a, b), frechet_distance(b, a), 1e-8 * (1.0 + expect));
    }
}

TEST(Metrics, FrechetHandlesSingularCovariance) {
    const GaussianStats a{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(3, 3)};
    const GaussianStats b{Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Zero(3, 3)};
    EXPECT_NEAR(frechet_distance(a, b), 3.0, 1e-8);
    EXPECT_GE(frechet_distance(a, a), 0.0);
    const GaussianStats c{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    EXPECT_THROW(frechet_distance(a, c), Error);
}

TEST(Metrics, PcsIsZeroForPassThroughAndMeasuresOffsets) {
    const auto ref = smooth_window(30, 4);
    const auto c = pcs_protocol_controls(ref);
    EXPECT_EQ(c.pose.masked_count(), kPcsEnd - kPcsBegin);
    EXPECT_EQ(pcs(c.pose, ref), 0.0);

    auto shifted = ref;
    shifted[12][4] = -shifted[12][4];
    const double expect = 2.0 * ref[12][4].cwiseAbs().sum() / (5.0 * kPoseDim);
    EXPECT_NEAR(pcs(c.pose, shifted), expect, 1e-15);
    EXPECT_THROW(pcs(empty_pose_controls(30), ref), Error);
    EXPECT_THROW(pcs(c.pose, std::span<const DirVecFrame>(ref).first(20)), Error);
    EXPECT_THROW(pcs_protocol_controls(std::span<const DirVecFrame>(ref).first(14)), Error);
}

TEST(Metrics, ScsIsZeroForPassThroughAndMeasuresOffsets) {
    const auto ref = smooth_window(30, 5);
    const SkeletonSpec skel;
    StyleNormStats norm;
    norm.mean = {0.05, 0.8, 0.0};
    norm.stddev = {0.02, 0.2, 0.5};
    auto c = scs_protocol_controls(ref, skel, norm);
    EXPECT_EQ(c.style.masked_count(), 30 * kStyleDim);
    EXPECT_EQ(scs(c.style, ref, skel, norm), 0.0);

    // Shift one element's control by a constant; the score is that
    // constant averaged over all controlled entries.
    for (auto& v : c.style.values) v[kSpace] += 0.3;
    EXPECT_NEAR(scs(c.style, ref, skel, norm), 0.3 / kStyleDim, 1e-12);
    EXPECT_THROW(scs(empty_style_controls(30), ref, skel, norm), Error);
}

TEST(Metrics, WindowStartsCoverTheTail) {
    EXPECT_EQ(window_starts(90, 30, 10), (std::vector<int>{0, 10, 20, 30, 40, 50, 60}));
    EXPECT_EQ(window_starts(95, 30, 10), (std::vector<int>{0, 10, 20, 30, 40, 50, 60, 65}));
    EXPECT_EQ(window_starts(30, 30, 10), (std::vector<int>{0}));
    EXPECT_TRUE(window_starts(29, 30, 10).empty());
}

TEST(Metrics, FgdOfASetWithItselfIsZero) {
    ExtractorConfig cfg;
    cfg.channels = 8;
    cfg.latent = 4;
    cfg.window = 30;
    FeatureExtractorNet<double> fe(cfg);
    std::vector<std::vector<DirVecFrame>> a, b;
    for (int i = 0; i < 20; ++i) {
        a.push_back(smooth_window(30, 100 + i));
        b.push_back(smooth_window(30, 200 + i));
    }
    using S = std::span<const std::vector<DirVecFrame>>;
    EXPECT_NEAR(fgd(S(a), S(a), fe), 0.0, 1e-8);
    EXPECT_GT(fgd(S(a), S(b), fe), 0.0);
    EXPECT_THROW(fgd(S(a), S{}, fe), Error);
}

TEST(Evaluation, LongestIncreasingSubsequence) {
    const std::vector<double> up{1, 2, 3, 4, 5}, dip{1, 2, 1.5, 4, 5}, flat{1, 1, 1, 1, 1}, down{5, 4, 3, 2, 1};
    EXPECT_EQ(longest_increasing_subsequence(up), 5);
    EXPECT_EQ(longest_increasing_subsequence(dip), 4);
    EXPECT_EQ(longest_increasing_subsequence(flat), 1);
    EXPECT_EQ(longest_increasing_subsequence(down), 1);
}

TEST(Evaluation, ReportCsvListsEveryMetric) {
    EvalReport r;
    r.fgd_no_controls = 0.5;
    r.n_windows = 12;
    const auto csv = report_to_csv(r);
    EXPECT_EQ(csv.rfind("metric,value\n", 0), 0u);
    EXPECT_NE(csv.find("fgd_no_controls,0.5\n"), std::string::npos);
    EXPECT_NE(csv.find("n_windows,12\n"), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
}
