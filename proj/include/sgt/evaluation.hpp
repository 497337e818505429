#pragma once

// Held-out evaluation: FGD without controls, with pose controls and with
// style controls, PCS and SCS, alongside the static mean-pose baseline.

#include <algorithm>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgt/corpus.hpp"
#include "sgt/genmodel.hpp"
#include "sgt/metrics.hpp"
#include "sgt/synthesis.hpp"

namespace sgt {

// A clip converted to model-ready streams.
struct PreparedClip {
    std::string id;
    SpeechContext speech;
    std::vector<DirVecFrame> dirvecs;
};

inline PreparedClip prepare_clip(const Clip& clip, const Dictionary& dict, const AudioFeatureConfig& audio = {}) {
    PreparedClip out;
    out.id = clip.id;
    const int n = static_cast<int>(clip.motion.size());
    out.speech = make_speech_context(clip.wave, clip.timings, dict, n, audio);
    out.speech.text = clip.text;
    out.dirvecs = to_dirvecs(clip.motion);
    return out;
}

inline std::vector<PreparedClip> prepare_clips(const Dataset& ds, const Dictionary& dict) {
    std::vector<PreparedClip> out;
    out.reserve(ds.size());
    for (const auto& c : ds.clips) out.push_back(prepare_clip(c, dict));
    return out;
}

struct EvalWindow {
    SpeechContext speech;
    std::vector<DirVecFrame> reference;
};

inline std::vector<EvalWindow> make_windows(std::span<const PreparedClip> clips, int window, int stride,
                                            double silence_value) {
    std::vector<EvalWindow> out;
    for (const auto& c : clips) {
        for (int s : window_starts(static_cast<int>(c.dirvecs.size()), window, stride)) {
            EvalWindow w;
            w.speech = c.speech.window(s, window, silence_value);
            w.reference.assign(c.dirvecs.begin() + s, c.dirvecs.begin() + s + window);
            out.push_back(std::move(w));
        }
    }
    return out;
}

struct EvalReport {
    double fgd_no_controls = 0.0;
    double fgd_pose_controls = 0.0;
    double fgd_style_controls = 0.0;
    double pcs = 0.0;
    double scs = 0.0;
    double static_fgd = 0.0;
    double static_pcs = 0.0;
    double static_scs = 0.0;
    int n_windows = 0;
};

template <class T>
std::vector<std::vector<DirVecFrame>> generate_windows(const BasicGeneratorModel<T>& model,
                                                       std::span<const EvalWindow> windows,
                                                       std::span<const ControlSet> controls, int chunk = 128) {
    std::vector<std::vector<DirVecFrame>> out;
    out.reserve(windows.size());
    std::vector<SpeechContext> speech;
    for (std::size_t at = 0; at < windows.size(); at += chunk) {
        const auto n = std::min<std::size_t>(chunk, windows.size() - at);
        speech.clear();
        for (std::size_t i = at; i < at + n; ++i) speech.push_back(windows[i].speech);
        auto batch = model.generate_batch(speech, controls.subspan(at, n));
        for (auto& g : batch) out.push_back(std::move(g));
    }
    return out;
}

// Which parts of the report to compute; validation during training only
// needs the no-control FGD and the two compliance scores.
struct EvalOptions {
    bool with_controls_fgd = true;
    bool with_static = true;
};

template <class T>
EvalReport evaluate(const BasicGeneratorModel<T>& model, std::span<const EvalWindow> windows,
                    const EvalOptions& opts = {}) {
    if (windows.empty()) throw Error(ErrorCode::EmptySet, "no evaluation windows");
    if (!model.extractor) throw Error(ErrorCode::ModelNotLoaded, "model has no feature extractor");
    const auto& extractor = *model.extractor;
    const int t = static_cast<int>(windows.front().reference.size());
    EvalReport r;
    r.n_windows = static_cast<int>(windows.size());

    std::vector<std::vector<DirVecFrame>> real;
    std::vector<ControlSet> none, pose, style;
    for (const auto& w : windows) {
        real.push_back(w.reference);
        none.push_back(empty_controls(t));
        pose.push_back(pcs_protocol_controls(w.reference));
        style.push_back(scs_protocol_controls(w.reference, model.skeleton, model.style_norm));
    }
    const auto real_features = fit_gaussian(extract_features(extractor, std::span<const std::vector<DirVecFrame>>(real)));
    auto fgd_to_real = [&](const std::vector<std::vector<DirVecFrame>>& gen) {
        return frechet_distance(real_features,
                                fit_gaussian(extract_features(extractor, std::span<const std::vector<DirVecFrame>>(gen))));
    };

    const auto gen_none = generate_windows(model, windows, none);
    const auto gen_pose = generate_windows(model, windows, pose);
    const auto gen_style = generate_windows(model, windows, style);
    r.fgd_no_controls = fgd_to_real(gen_none);
    if (opts.with_controls_fgd) {
        r.fgd_pose_controls = fgd_to_real(gen_pose);
        r.fgd_style_controls = fgd_to_real(gen_style);
    }
    double pcs_sum = 0.0, scs_sum = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        pcs_sum += pcs(pose[i].pose, gen_pose[i]);
        scs_sum += scs(style[i].style, gen_style[i], model.skeleton, model.style_norm);
    }
    r.pcs = pcs_sum / static_cast<double>(windows.size());
    r.scs = scs_sum / static_cast<double>(windows.size());

    if (opts.with_static) {
        const auto still = model.mean_pose_window(t);
        const std::vector<std::vector<DirVecFrame>> gen_static(windows.size(), still);
        r.static_fgd = fgd_to_real(gen_static);
        double sp = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            sp += pcs(pose[i].pose, still);
            ss += scs(style[i].style, still, model.skeleton, model.style_norm);
        }
        r.static_pcs = sp / static_cast<double>(windows.size());
        r.static_scs = ss / static_cast<double>(windows.size());
    }
    return r;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
    return {{"fgd_no_controls", r.fgd_no_controls},
            {"fgd_pose_controls", r.fgd_pose_controls},
            {"fgd_style_controls", r.fgd_style_controls},
            {"pcs", r.pcs},
            {"scs", r.scs},
            {"static_fgd", r.static_fgd},
            {"static_pcs", r.static_pcs},
            {"static_scs", r.static_scs},
            {"n_windows", r.n_windows}};
}

// Two-column metric,value table in report order.
inline std::string report_to_csv(const EvalReport& r) {
    const std::pair<const char*, double> rows[] = {
        {"fgd_no_controls", r.fgd_no_controls}, {"fgd_pose_controls", r.fgd_pose_controls},
        {"fgd_style_controls", r.fgd_style_controls}, {"pcs", r.pcs}, {"scs", r.scs},
        {"static_fgd", r.static_fgd}, {"static_pcs", r.static_pcs}, {"static_scs", r.static_scs},
        {"n_windows", static_cast<double>(r.n_windows)}};
    std::string out = "metric,value\n";
    char buf[96];
    for (const auto& [k, v] : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.9g\n", k, v);
        out += buf;
    }
    return out;
}

struct StyleSweep {
    int element = kSpeed;
    std::vector<double> levels;
    // Median over clips of the clip-mean raw style value, one per level.
    std::vector<double> median_raw;
    // Longest strictly increasing run of median_raw, taken as a subsequence.
    int increasing_points = 0;
};

inline int longest_increasing_subsequence(std::span<const double> v) {
    std::vector<int> best(v.size(), 1);
    int top = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (v[j] < v[i]) best[i] = std::max(best[i], best[j] + 1);
        }
        top = std::max(top, best[i]);
    }
    return top;
}

// Holds one style element at each level over whole clips, the other elements
// unmasked, and measures the raw statistic of the generated motion.
template <class T>
StyleSweep style_sweep(const BasicGeneratorModel<T>& model, std::span<const PreparedClip> clips, int element,
                       std::vector<double> levels, const SynthesisConfig& synth = {}) {
    if (clips.empty()) throw Error(ErrorCode::EmptySet, "no clips to sweep");
    if (element < 0 || element >= kStyleDim) throw Error(ErrorCode::InvalidArgument, "style element out of range");
    StyleSweep out;
    out.element = element;
    out.levels = std::move(levels);
    for (double level : out.levels) {
        std::vector<double> per_clip;
        for (const auto& c : clips) {
            const int n = static_cast<int>(c.dirvecs.size());
            ControlSet controls = empty_controls(n);
            controls.style = set_style_control(controls.style, 0, n, element, level);
            const auto motion = generate_long(c.speech, controls, &model, model.skeleton, synth);
            double sum = 0.0;
            for (const auto& s : style_track(motion)) sum += s[element];
            per_clip.push_back(sum / n);
        }
        const auto mid = per_clip.begin() + static_cast<std::ptrdiff_t>(per_clip.size() / 2);
        std::nth_element(per_clip.begin(), mid, per_clip.end());
        double median = *mid;
        if (per_clip.size() % 2 == 0) median = 0.5 * (median + *std::max_element(per_clip.begin(), mid));
        out.median_raw.push_back(median);
    }
    out.increasing_points = longest_increasing_subsequence(out.median_raw);
    return out;
}

} // namespace sgt
