#pragma once

// Evaluation metrics: Frechet gesture distance over extractor features,
// pose compliance (PCS) and style compliance (SCS), plus the fixed
// evaluation protocols and the static mean-pose baseline.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sgt/controls.hpp"
#include "sgt/extractor.hpp"
#include "sgt/skeleton.hpp"
#include "sgt/stylestats.hpp"

namespace sgt {

inline constexpr double kEigenFloor = 1e-10;

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int dim() const { return static_cast<int>(mean.size()); }
};

// Fits mean and (population) covariance to the columns of `features`.
inline GaussianStats fit_gaussian(const Eigen::MatrixXd& features) {
    if (features.cols() == 0) throw Error(ErrorCode::EmptySet, "no feature vectors");
    GaussianStats g;
    g.mean = features.rowwise().mean();
    const Eigen::MatrixXd centred = features.colwise() - g.mean;
    g.cov = centred * centred.transpose() / static_cast<double>(features.cols());
    return g;
}

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eigen(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym);
}

// Symmetrized covariance with eigenvalues floored at kEigenFloor.
inline Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& cov, Eigen::MatrixXd* sqrt_out = nullptr) {
    const auto es = sym_eigen(cov);
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(kEigenFloor);
    if (sqrt_out) *sqrt_out = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace detail

// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2)). The trace of the product
// root is taken as the trace of (S1^(1/2) S2 S1^(1/2))^(1/2), which is
// symmetric and has the same eigenvalues.
inline double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    if (a.dim() != b.dim() || a.cov.rows() != a.dim() || b.cov.rows() != b.dim() || a.cov.cols() != a.dim() ||
        b.cov.cols() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "Gaussian dimensions differ");
    }
    Eigen::MatrixXd s1_sqrt;
    const Eigen::MatrixXd s1 = detail::floor_psd(a.cov, &s1_sqrt);
    const Eigen::MatrixXd s2 = detail::floor_psd(b.cov);
    const auto es = detail::sym_eigen(s1_sqrt * s2 * s1_sqrt);
    const double tr_root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double d = (a.mean - b.mean).squaredNorm() + s1.trace() + s2.trace() - 2.0 * tr_root;
    return std::max(d, 0.0);
}

template <class T>
Eigen::MatrixXd extract_features(const FeatureExtractorNet<T>& extractor,
                                 std::span<const std::vector<DirVecFrame>> windows, int chunk = 256) {
    if (windows.empty()) throw Error(ErrorCode::EmptySet, "no motion windows");
    Eigen::MatrixXd out(extractor.config().latent, static_cast<Eigen::Index>(windows.size()));
    for (std::size_t at = 0; at < windows.size(); at += chunk) {
        const auto n = std::min<std::size_t>(chunk, windows.size() - at);
        const auto z = extractor.encode(pack_motion<T>(windows.subspan(at, n)));
        out.middleCols(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(n)) = z.template cast<double>();
    }
    return out;
}

template <class T>
double fgd(std::span<const std::vector<DirVecFrame>> real, std::span<const std::vector<DirVecFrame>> generated,
           const FeatureExtractorNet<T>& extractor) {
    if (real.empty() || generated.empty()) throw Error(ErrorCode::EmptySet, "FGD needs two non-empty sets");
    return frechet_distance(fit_gaussian(extract_features(extractor, real)),
                            fit_gaussian(extract_features(extractor, generated)));
}

// Mean absolute element difference between pose controls and generated
// direction vectors over the controlled frames.
inline double pcs(const PoseControlTrack& controls, std::span<const DirVecFrame> generated) {
    if (static_cast<int>(generated.size()) != controls.size()) {
        throw Error(ErrorCode::LengthMismatch, "generated motion and controls differ in length");
    }
    double sum = 0.0;
    long count = 0;
    for (int t = 0; t < controls.size(); ++t) {
        if (!controls.mask[t]) continue;
        const auto g = generated[t].flat();
        for (int k = 0; k < kPoseDim; ++k) sum += std::abs(controls.poses[t][k] - g[k]);
        count += kPoseDim;
    }
    if (count == 0) throw Error(ErrorCode::NoMaskedFrames, "no pose-controlled frames");
    return sum / static_cast<double>(count);
}

// Normalized style track of a dir-vec window rendered on `skel`.
inline std::vector<StyleFrame> normalized_style_of(std::span<const DirVecFrame> motion, const SkeletonSpec& skel,
                                                   const StyleNormStats& norm, int window = kStyleWindow) {
    std::vector<PoseFrame> poses;
    poses.reserve(motion.size());
    for (const auto& f : motion) poses.push_back(to_pose(f, skel));
    const auto raw = style_track(std::span<const PoseFrame>(poses), window);
    return normalize_style(std::span<const StyleFrame>(raw), norm);
}

// Mean absolute difference between style controls and the generated
// motion's normalized style over controlled entries.
inline double scs(const StyleControlTrack& controls, std::span<const DirVecFrame> generated, const SkeletonSpec& skel,
                  const StyleNormStats& norm, int window = kStyleWindow) {
    if (static_cast<int>(generated.size()) != controls.size()) {
        throw Error(ErrorCode::LengthMismatch, "generated motion and controls differ in length");
    }
    double sum = 0.0;
    long count = 0;
    std::vector<StyleFrame> style;
    for (int t = 0; t < controls.size(); ++t) {
        for (int k = 0; k < kStyleDim; ++k) {
            if (!controls.masks[t][k]) continue;
            if (style.empty()) style = normalized_style_of(generated, skel, norm, window);
            sum += std::abs(controls.values[t][k] - style[t][k]);
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorCode::NoMaskedFrames, "no style-controlled entries");
    return sum / static_cast<double>(count);
}

// Pose-compliance protocol: reference poses on frames [10, 15).
inline constexpr int kPcsBegin = 10;
inline constexpr int kPcsEnd = 15;

inline ControlSet pcs_protocol_controls(std::span<const DirVecFrame> reference) {
    const int t = static_cast<int>(reference.size());
    if (t < kPcsEnd) throw Error(ErrorCode::SequenceTooShort, "PCS protocol needs at least 15 frames");
    ControlSet c = empty_controls(t);
    c.pose = set_pose_control(std::move(c.pose), kPcsBegin, kPcsEnd, reference.subspan(kPcsBegin, kPcsEnd - kPcsBegin));
    return c;
}

// Style-compliance protocol: every element controlled on every frame with
// the reference window's own normalized style.
inline ControlSet scs_protocol_controls(std::span<const DirVecFrame> reference, const SkeletonSpec& skel,
                                        const StyleNormStats& norm) {
    const int t = static_cast<int>(reference.size());
    const auto style = normalized_style_of(reference, skel, norm);
    ControlSet c = empty_controls(t);
    c.style = full_style_controls(std::span<const StyleFrame>(style));
    return c;
}

// Evaluation windows: every `stride` frames, each `window` frames long.
inline std::vector<int> window_starts(int n_frames, int window, int stride) {
    std::vector<int> out;
    for (int s = 0; s + window <= n_frames; s += stride) out.push_back(s);
    if (!out.empty() && out.back() + window < n_frames) out.push_back(n_frames - window);
    return out;
}

} // namespace sgt
