#pragma once

// Speech-gesture clips, dataset directories and the synthetic toy corpus.
//
// In the synthetic corpus motion is a known function of speech: every word
// produces a beat whose amplitude follows the word's loudness, and the
// trigger words "left", "right" and "up" drive the body into canonical
// point-left, point-right and raise-hands poses at the word centre. Each
// clip also draws hidden gain, handedness and spread factors, so style
// statistics vary across clips in ways speech alone does not reveal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sgt/motion_json.hpp"
#include "sgt/procedural.hpp"
#include "sgt/speech.hpp"

namespace sgt {

struct Clip {
    std::string id;
    Waveform wave;
    std::string text;
    std::vector<WordTiming> timings;
    MotionSequence motion;
};

struct Dataset {
    std::vector<Clip> clips;
    bool empty() const noexcept { return clips.empty(); }
    std::size_t size() const noexcept { return clips.size(); }
};

inline const std::vector<std::string>& corpus_filler_words() {
    static const std::vector<std::string> words{
        "so",    "we",   "think", "this",  "is",    "really", "about", "people", "and",
        "the",   "idea", "that",  "you",   "can",   "make",   "it",    "work",   "every",
        "day",   "now",  "look",  "at",    "world", "change", "maybe"};
    return words;
}

inline const std::vector<std::string>& corpus_trigger_words() {
    static const std::vector<std::string> words{"left", "right", "up"};
    return words;
}

inline BodyParams trigger_body(const std::string& word) {
    if (word == "left") return point_left_body();
    if (word == "right") return point_right_body();
    if (word == "up") return raise_hands_body();
    throw Error(ErrorCode::InvalidArgument, "not a trigger word: " + word);
}

struct CorpusConfig {
    double clip_seconds = 6.0;
    int sample_rate = kDefaultSampleRate;
    double trigger_probability = 0.12;
    // Scales the spread of the hidden per-clip factors around their means.
    double hidden_scale = 0.5;
};

namespace detail {

struct WordEvent {
    std::string word;
    double start;
    double end;
    double level;
    bool trigger;
};

struct ClipFactors {
    double tempo;      // seconds per word
    double loudness;   // audible
    double gain;       // hidden beat amplitude multiplier
    double hand_bias;  // hidden, >0 favours the left hand
    double spread;     // hidden azimuth offset
    double sway_phase; // hidden
    double sway;       // sway amplitude multiplier
};

inline BodyParams beat_body(const ClipFactors& f, const std::vector<WordEvent>& words, double t) {
    BodyParams p = rest_body();
    const double w_right = std::clamp(1.0 - f.hand_bias, 0.15, 1.0);
    const double w_left = std::clamp(1.0 + f.hand_bias, 0.15, 1.0);
    double beat = 0.0, stroke = 0.0;
    for (std::size_t k = 0; k < words.size(); ++k) {
        const auto& w = words[k];
        if (w.trigger || t <= w.start || t >= w.end) continue;
        const double b = w.level * bump((t - w.start) / (w.end - w.start));
        beat += b;
        stroke += (k % 2 == 0 ? 1.0 : -1.0) * b;
    }
    const double g = f.gain;
    p.right.lift += g * w_right * (1.1 * beat + 0.25);
    p.left.lift += g * w_left * (1.1 * beat + 0.25);
    p.right.bend += g * w_right * 0.5 * beat;
    p.left.bend += g * w_left * 0.5 * beat;
    p.right.azimuth += f.spread + 0.25 * g * w_right * stroke;
    p.left.azimuth += f.spread - 0.25 * g * w_left * stroke;
    p.head_pitch = -0.12 * beat;
    p.lean_x = 0.03 * f.sway * std::sin(0.9 * t + f.sway_phase);
    p.lean_z = 0.04 * beat;
    return p;
}

} // namespace detail

// Deterministic synthetic corpus of n_clips clips.
inline Dataset make_synthetic_corpus(int n_clips, std::uint64_t seed, const CorpusConfig& cfg = {}) {
    if (n_clips < 10) throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs at least 10 clips");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    const auto& fillers = corpus_filler_words();
    const auto& triggers = corpus_trigger_words();
    const int n_frames = static_cast<int>(std::lround(cfg.clip_seconds * kFps));

    Dataset ds;
    for (int c = 0; c < n_clips; ++c) {
        detail::ClipFactors f{};
        f.tempo = uniform(0.28, 0.5);
        f.loudness = uniform(0.5, 1.0);
        const double h = cfg.hidden_scale;
        f.gain = 1.0 + h * uniform(-0.45, 0.45);
        f.hand_bias = h * uniform(-0.8, 0.8);
        f.spread = h * uniform(-0.35, 0.35);
        f.sway_phase = uniform(0.0, 2.0 * std::numbers::pi);
        f.sway = h;

        std::vector<detail::WordEvent> words;
        double t = uniform(0.1, 0.4);
        while (true) {
            const bool trig = unit(rng) < cfg.trigger_probability;
            const std::string w = trig ? triggers[static_cast<std::size_t>(unit(rng) * triggers.size())]
                                       : fillers[static_cast<std::size_t>(unit(rng) * fillers.size())];
            const double dur = trig ? std::max(0.6, 1.4 * f.tempo) : f.tempo * uniform(0.75, 1.25);
            const double level = f.loudness * uniform(0.35, 1.0);
            const double gap = uniform(0.04, 0.16);
            if (t + dur > cfg.clip_seconds - 0.05) break;
            words.push_back({w, t, t + dur, level, trig});
            t += dur + gap;
        }

        Clip clip;
        clip.id = "clip" + std::string(c < 10 ? "00" : (c < 100 ? "0" : "")) + std::to_string(c);
        clip.wave.sample_rate = cfg.sample_rate;
        clip.wave.samples.assign(static_cast<std::size_t>(std::lround(cfg.clip_seconds * cfg.sample_rate)), 0.0f);
        for (const auto& w : words) {
            render_word_tone(clip.wave.samples, cfg.sample_rate, w.start, w.end, w.word, w.level);
            clip.timings.push_back({w.word, w.start, w.end});
            if (!clip.text.empty()) clip.text += ' ';
            clip.text += w.word;
        }
        // Quantize so that the stored wav decodes to exactly these samples.
        for (auto& s : clip.wave.samples) s = quantize_pcm16(s);

        // Triggers peak exactly on a frame so the canonical pose is hit.
        std::vector<std::pair<double, BodyParams>> peaks;
        for (auto& w : words) {
            if (!w.trigger) continue;
            const double centre = std::round(0.5 * (w.start + w.end) * kFps) / kFps;
            peaks.push_back({centre, trigger_body(w.word)});
        }
        const double half_width = 0.45;
        clip.motion.fps = kFps;
        for (int i = 0; i < n_frames; ++i) {
            const double time = static_cast<double>(i) / kFps;
            BodyParams p = detail::beat_body(f, words, time);
            for (const auto& [centre, target] : peaks) {
                const double u = (time - centre) / half_width;
                if (std::abs(u) >= 1.0) continue;
                const double c = std::cos(0.5 * std::numbers::pi * u);
                p = lerp(p, target, u == 0.0 ? 1.0 : c * c);
            }
            clip.motion.frames.push_back(body_pose(p));
        }
        ds.clips.push_back(std::move(clip));
    }
    return ds;
}

// Dataset directory: index.json plus per-clip <id>.wav and <id>.motion.json.
inline void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    json clips = json::array();
    for (const auto& c : ds.clips) {
        const std::string wav = c.id + ".wav", motion = c.id + ".motion.json";
        write_wav(dir / wav, c.wave);
        save_motion(dir / motion, c.motion);
        clips.push_back({{"id", c.id}, {"wav", wav}, {"motion", motion}, {"text", c.text},
                         {"timings", timings_to_json(c.timings)}});
    }
    const int sr = ds.clips.empty() ? kDefaultSampleRate : ds.clips.front().wave.sample_rate;
    write_text_file(dir / "index.json",
                    json{{"version", 1}, {"fps", kFps}, {"sample_rate", sr}, {"clips", clips}}.dump(1));
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    const json index = read_json_file(dir / "index.json");
    try {
        if (index.at("version").get<int>() != 1) throw Error(ErrorCode::VersionMismatch, "dataset index version");
        if (index.at("fps").get<int>() != kFps) throw Error(ErrorCode::SchemaViolation, "dataset fps must be 15");
        Dataset ds;
        for (const auto& c : index.at("clips")) {
            Clip clip;
            clip.id = c.at("id");
            clip.text = c.at("text");
            clip.timings = timings_from_json(c.at("timings"));
            clip.wave = read_wav(dir / c.at("wav").get<std::string>());
            clip.motion = load_motion(dir / c.at("motion").get<std::string>());
            ds.clips.push_back(std::move(clip));
        }
        if (ds.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no clips");
        return ds;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("dataset index: ") + e.what());
    }
}

} // namespace sgt
