#pragma once

// Long-form synthesis by sliding windows.
//
// Emission k covers frames [k*stride, (k+1)*stride). The first call sees
// just that span. Every later call spans `overlap + stride` frames starting
// `overlap` frames earlier; the overlap frames carry the previous emission
// as pose controls wherever the user has not set a pose control, so the new
// chunk continues from what was already emitted.

#include <algorithm>
#include <span>
#include <vector>

#include "sgt/controls.hpp"
#include "sgt/genmodel.hpp"
#include "sgt/skeleton.hpp"
#include "sgt/speech.hpp"

namespace sgt {

struct SynthesisConfig {
    int stride = 30;
    int overlap = 30;

    void validate() const {
        if (stride < 1 || overlap < 0) throw Error(ErrorCode::InvalidArgument, "invalid synthesis windowing");
    }
};

// Controls for global frames [begin, begin + length); frames past the end
// of the global tracks are uncontrolled.
inline ControlSet slice_controls(const ControlSet& global, int begin, int length) {
    ControlSet out = empty_controls(length);
    for (int i = 0; i < length; ++i) {
        const int src = begin + i;
        if (src < 0 || src >= global.size()) continue;
        out.pose.poses[i] = global.pose.poses[src];
        out.pose.mask[i] = global.pose.mask[src];
        out.style.values[i] = global.style.values[src];
        out.style.masks[i] = global.style.masks[src];
    }
    return out;
}

// Window slice of the user controls with seam poses injected on the first
// seam.size() frames that carry no user pose control.
inline ControlSet merge_controls(const ControlSet& global, int begin, int length,
                                 std::span<const DirVecFrame> seam = {}) {
    if (static_cast<int>(seam.size()) > length) throw Error(ErrorCode::LengthMismatch, "seam longer than window");
    ControlSet out = slice_controls(global, begin, length);
    for (std::size_t i = 0; i < seam.size(); ++i) {
        if (out.pose.mask[i]) continue;
        out.pose.poses[i] = seam[i].flat();
        out.pose.mask[i] = 1;
    }
    return out;
}

struct SeamReport {
    int frame = 0;               // first newly emitted frame of the chunk
    double overlap_deviation = 0; // max joint-direction change over the overlap
    double jump = 0;              // max bone-direction change across the seam
};

struct LongResult {
    std::vector<DirVecFrame> frames;
    std::vector<SeamReport> seams;
    int calls = 0;
};

inline LongResult generate_long_dirvecs(const WindowGenerator* model, const SpeechContext& ctx,
                                        const ControlSet& controls, const SynthesisConfig& cfg = {}) {
    if (!model) throw Error(ErrorCode::ModelNotLoaded, "no generation model is loaded");
    cfg.validate();
    const int n = ctx.n_frames();
    if (n < 1) throw Error(ErrorCode::SequenceTooShort, "speech has no frames");
    if (controls.size() != n) throw Error(ErrorCode::LengthMismatch, "controls must span the speech");
    const double silence = model->silence_feature();

    LongResult out;
    out.frames.reserve(n + cfg.stride);
    for (int emit = 0; emit < n; emit += cfg.stride) {
        const int context = std::min(cfg.overlap, emit);
        const int begin = emit - context;
        const int length = context + cfg.stride;
        const std::span<const DirVecFrame> seam(out.frames.data() + begin, static_cast<std::size_t>(context));
        const auto window_controls = merge_controls(controls, begin, length, seam);
        const auto chunk = model->generate(ctx.window(begin, length, silence), window_controls);
        ++out.calls;
        if (static_cast<int>(chunk.size()) != length) {
            throw Error(ErrorCode::ShapeMismatch, "generator returned a window of the wrong length");
        }
        if (context > 0) {
            SeamReport s;
            s.frame = emit;
            for (int i = 0; i < context; ++i) {
                for (int b = 0; b < kNumBones; ++b) {
                    s.overlap_deviation = std::max(s.overlap_deviation, (chunk[i][b] - seam[i][b]).norm());
                }
            }
            for (int b = 0; b < kNumBones; ++b) {
                s.jump = std::max(s.jump, (chunk[context][b] - out.frames[emit - 1][b]).norm());
            }
            out.seams.push_back(s);
        }
        out.frames.insert(out.frames.end(), chunk.begin() + context, chunk.end());
    }
    out.frames.resize(n);
    return out;
}

inline MotionSequence generate_long(const SpeechContext& ctx, const ControlSet& controls, const WindowGenerator* model,
                                    const SkeletonSpec& skel, const SynthesisConfig& cfg = {}) {
    return to_motion(generate_long_dirvecs(model, ctx, controls, cfg).frames, skel);
}

} // namespace sgt
