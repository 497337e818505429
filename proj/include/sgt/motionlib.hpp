#pragma once

// Library of unit gestures usable as pose controls. Ships a procedurally
// authored starter set and can import further gestures from a directory
// holding index.json and motion JSON files.

#include <algorithm>
#include <filesystem>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "sgt/motion_json.hpp"
#include "sgt/procedural.hpp"

namespace sgt {

struct UnitGesture {
    std::string id;
    std::string name;
    std::vector<std::string> tags;
    std::string anchor;
    MotionSequence motion;

    bool has_tag(std::string_view tag) const { return std::find(tags.begin(), tags.end(), tag) != tags.end(); }
};

struct GestureInfo {
    std::string id;
    std::string name;
    std::vector<std::string> tags;
    std::string anchor;
    int n_frames = 0;
};

inline json gesture_info_to_json(const GestureInfo& g) {
    return {{"id", g.id}, {"name", g.name}, {"tags", g.tags}, {"anchor", g.anchor}, {"n_frames", g.n_frames}};
}

// Frames between consecutive (frame, pose) keys are eased with a smoothstep
// blend in body-parameter space.
inline MotionSequence author_gesture(const std::vector<std::pair<int, BodyParams>>& keys,
                                     const SkeletonSpec& skel = {}) {
    if (keys.empty()) throw Error(ErrorCode::InvalidArgument, "gesture needs keys");
    MotionSequence seq;
    const int last = keys.back().first;
    std::size_t seg = 0;
    for (int f = 0; f <= last; ++f) {
        while (seg + 1 < keys.size() && f > keys[seg + 1].first) ++seg;
        BodyParams p = keys[seg].second;
        if (seg + 1 < keys.size() && f > keys[seg].first) {
            const double u = static_cast<double>(f - keys[seg].first) / (keys[seg + 1].first - keys[seg].first);
            p = lerp(keys[seg].second, keys[seg + 1].second, u * u * (3.0 - 2.0 * u));
        }
        seq.frames.push_back(body_pose(p, skel));
    }
    return seq;
}

inline std::vector<UnitGesture> builtin_gestures() {
    const BodyParams rest = rest_body();
    auto with = [&](auto fn) {
        BodyParams b = rest;
        fn(b);
        return b;
    };
    const BodyParams right_up = with([](BodyParams& b) { b.right = {2.85, 0.35, 0.05}; });
    const BodyParams left_up = with([](BodyParams& b) { b.left = {2.85, 0.35, 0.05}; });
    const BodyParams both_up = raise_hands_body();
    const BodyParams point_sky = with([](BodyParams& b) {
        b.right = {2.95, 0.9, 0.0};
        b.head_pitch = 0.3;
    });
    const BodyParams bow = with([](BodyParams& b) {
        b.lean_z = 0.55;
        b.head_pitch = -0.45;
    });
    const BodyParams frame_in = with([](BodyParams& b) {
        b.right = {1.25, 1.35, 0.3};
        b.left = {1.25, 1.35, 0.3};
    });
    const BodyParams frame_out = with([](BodyParams& b) {
        b.right = {1.3, 0.8, 0.3};
        b.left = {1.3, 0.8, 0.3};
    });
    const BodyParams beat_up = with([](BodyParams& b) { b.right = {1.0, 0.9, 1.0}; });
    const BodyParams beat_down = with([](BodyParams& b) { b.right = {0.55, 0.8, 1.1}; });
    const BodyParams palms = with([](BodyParams& b) {
        b.right = {0.95, 0.45, 0.75};
        b.left = {0.95, 0.45, 0.75};
    });
    const BodyParams nod_down = with([](BodyParams& b) { b.head_pitch = -0.35; });
    const BodyParams nod_up = with([](BodyParams& b) { b.head_pitch = 0.1; });
    const BodyParams shrug = with([](BodyParams& b) {
        b.shrug = 0.35;
        b.right = {0.7, 0.3, 1.3};
        b.left = {0.7, 0.3, 1.3};
        b.head_pitch = -0.1;
    });
    const BodyParams shake_l = with([](BodyParams& b) { b.head_yaw = 0.4; });
    const BodyParams shake_r = with([](BodyParams& b) { b.head_yaw = -0.4; });

    auto there_and_back = [&](const BodyParams& peak, int in, int hold, int out) {
        return author_gesture({{0, rest}, {in, peak}, {in + hold, peak}, {in + hold + out, rest}});
    };
    std::vector<UnitGesture> g;
    g.push_back({"point_left", "Point left", {"deictic", "one-hand"}, "stroke at frame 10",
                 there_and_back(point_left_body(), 10, 8, 10)});
    g.push_back({"point_right", "Point right", {"deictic", "one-hand"}, "stroke at frame 10",
                 there_and_back(point_right_body(), 10, 8, 10)});
    g.push_back({"point_up", "Point up", {"deictic", "one-hand"}, "stroke at frame 12",
                 there_and_back(point_sky, 12, 6, 10)});
    g.push_back({"raise_right_hand", "Raise right hand", {"emblem", "one-hand"}, "apex at frame 12",
                 there_and_back(right_up, 12, 6, 12)});
    g.push_back({"raise_left_hand", "Raise left hand", {"emblem", "one-hand"}, "apex at frame 12",
                 there_and_back(left_up, 12, 6, 12)});
    g.push_back({"raise_both_hands", "Raise both hands", {"emblem", "two-hand"}, "apex at frame 12",
                 there_and_back(both_up, 12, 6, 12)});
    g.push_back({"bow", "Bow", {"emblem", "torso"}, "lowest at frame 12", there_and_back(bow, 12, 4, 12)});
    g.push_back({"framing", "Framing", {"metaphoric", "two-hand"}, "hands apart at frame 18",
                 author_gesture({{0, rest}, {10, frame_in}, {18, frame_out}, {22, frame_out}, {32, rest}})});
    g.push_back({"beat", "Beat", {"beat", "one-hand"}, "strokes at frames 8 and 16",
                 author_gesture({{0, rest}, {5, beat_up}, {8, beat_down}, {12, beat_up}, {16, beat_down},
                                 {26, rest}})});
    g.push_back({"open_palm", "Open palm", {"metaphoric", "two-hand"}, "palms open at frame 10",
                 there_and_back(palms, 10, 8, 10)});
    g.push_back({"head_nod", "Head nod", {"emblem", "head"}, "nods at frames 5 and 13",
                 author_gesture({{0, rest}, {5, nod_down}, {9, nod_up}, {13, nod_down}, {20, rest}})});
    g.push_back({"head_shake", "Head shake", {"emblem", "head"}, "turns at frames 5, 11 and 17",
                 author_gesture({{0, rest}, {5, shake_l}, {11, shake_r}, {17, shake_l}, {24, rest}})});
    g.push_back({"shrug", "Shrug", {"emblem", "two-hand"}, "apex at frame 9", there_and_back(shrug, 9, 5, 10)});
    g.push_back({"rest", "Rest", {"neutral"}, "any frame", author_gesture({{0, rest}, {14, rest}})});
    return g;
}

inline constexpr int kMaxSpeedLevel = 3;

// Temporal resampling to ceil(L / speed) frames. Sample j reads source time
// j * (L - 1) / (M - 1), so both endpoints are copied exactly; interpolated
// frames are re-rendered on the first frame's bone lengths.
inline MotionSequence resample_speed(const MotionSequence& src, int speed) {
    if (speed < 1 || speed > kMaxSpeedLevel) {
        throw Error(ErrorCode::InvalidSpeedLevel, "speed level must be 1, 2 or 3");
    }
    const int l = static_cast<int>(src.size());
    if (l == 0) throw Error(ErrorCode::SequenceTooShort, "gesture has no frames");
    const int m = (l + speed - 1) / speed;
    MotionSequence out;
    out.fps = src.fps;
    if (speed == 1 || m == 1) {
        out.frames.assign(src.frames.begin(), src.frames.begin() + m);
        return out;
    }
    const SkeletonSpec skel(bone_lengths_of(src.frames.front()));
    for (int j = 0; j < m; ++j) {
        if (j == m - 1) {
            out.frames.push_back(src.frames.back());
            continue;
        }
        const long num = static_cast<long>(j) * (l - 1);
        const int i0 = static_cast<int>(num / (m - 1));
        const double frac = static_cast<double>(num % (m - 1)) / (m - 1);
        if (frac == 0.0) {
            out.frames.push_back(src.frames[i0]);
            continue;
        }
        PoseFrame p;
        for (int k = 0; k < kNumJoints; ++k) {
            p[k] = (1.0 - frac) * src.frames[i0][k] + frac * src.frames[i0 + 1][k];
        }
        const Vec3 root = p[kRootJoint];
        try {
            p = to_pose(to_dirvec(p), skel);
            for (auto& q : p.joints) q += root;
        } catch (const Error&) {
        }
        out.frames.push_back(p);
    }
    return out;
}

class MotionLibrary {
public:
    MotionLibrary() : items_(std::make_shared<const std::vector<UnitGesture>>()) {}
    MotionLibrary(const MotionLibrary& o) : items_(o.snapshot()) {}
    MotionLibrary& operator=(const MotionLibrary& o) {
        if (this != &o) {
            std::lock_guard lock(write_mu_);
            publish(o.snapshot());
        }
        return *this;
    }
    explicit MotionLibrary(std::vector<UnitGesture> gestures) {
        for (const auto& g : gestures) validate(g);
        std::sort(gestures.begin(), gestures.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < gestures.size(); ++i) {
            if (gestures[i].id == gestures[i - 1].id) {
                throw Error(ErrorCode::InvalidArgument, "duplicate gesture id " + gestures[i].id);
            }
        }
        items_ = std::make_shared<const std::vector<UnitGesture>>(std::move(gestures));
    }

    static MotionLibrary builtin() { return MotionLibrary(builtin_gestures()); }

    // Metadata sorted by id; a non-empty tag keeps only entries carrying it.
    std::vector<GestureInfo> list(std::string_view tag = {}) const {
        const auto items = snapshot();
        std::vector<GestureInfo> out;
        for (const auto& g : *items) {
            if (!tag.empty() && !g.has_tag(tag)) continue;
            out.push_back({g.id, g.name, g.tags, g.anchor, static_cast<int>(g.motion.size())});
        }
        return out;
    }

    std::size_t size() const { return snapshot()->size(); }

    UnitGesture get(std::string_view id) const {
        const auto items = snapshot();
        for (const auto& g : *items) {
            if (g.id == id) return g;
        }
        throw Error(ErrorCode::UnknownGesture, "unknown gesture '" + std::string(id) + "'");
    }

    MotionSequence instantiate(std::string_view id, int speed, bool flip) const {
        if (speed < 1 || speed > kMaxSpeedLevel) {
            throw Error(ErrorCode::InvalidSpeedLevel, "speed level must be 1, 2 or 3");
        }
        auto seq = resample_speed(get(id).motion, speed);
        return flip ? mirror(seq) : seq;
    }

    // Loads <dir>/index.json ([{id, name, tags, file, anchor}]) and merges
    // the gestures, replacing entries with the same id. Either every entry
    // loads and the library switches at once, or nothing changes.
    void import_directory(const std::filesystem::path& dir) {
        const json index = read_json_file(dir / "index.json");
        std::vector<UnitGesture> incoming;
        try {
            for (const auto& e : index.at("gestures")) {
                UnitGesture g;
                g.id = e.at("id");
                g.name = e.value("name", g.id);
                g.tags = e.value("tags", std::vector<std::string>{});
                g.anchor = e.value("anchor", std::string{});
                g.motion = load_motion(dir / e.at("file").get<std::string>());
                validate(g);
                incoming.push_back(std::move(g));
            }
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::SchemaViolation, std::string("gesture index: ") + ex.what());
        }
        std::lock_guard lock(write_mu_);
        auto merged = *snapshot();
        for (auto& g : incoming) {
            auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& x) { return x.id == g.id; });
            if (it != merged.end()) {
                *it = std::move(g);
            } else {
                merged.push_back(std::move(g));
            }
        }
        std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        publish(std::make_shared<const std::vector<UnitGesture>>(std::move(merged)));
    }

    void save_directory(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        const auto items = snapshot();
        json entries = json::array();
        for (const auto& g : *items) {
            const std::string file = g.id + ".motion.json";
            save_motion(dir / file, g.motion);
            entries.push_back({{"id", g.id}, {"name", g.name}, {"tags", g.tags}, {"anchor", g.anchor}, {"file", file}});
        }
        write_text_file(dir / "index.json", json{{"version", 1}, {"gestures", entries}}.dump(1));
    }

private:
    static void validate(const UnitGesture& g) {
        if (g.id.empty()) throw Error(ErrorCode::InvalidArgument, "gesture id is empty");
        if (g.motion.empty()) throw Error(ErrorCode::SequenceTooShort, "gesture '" + g.id + "' has no frames");
        for (const auto& f : g.motion.frames) to_dirvec(f);
    }

    std::shared_ptr<const std::vector<UnitGesture>> snapshot() const {
        std::lock_guard lock(read_mu_);
        return items_;
    }
    void publish(std::shared_ptr<const std::vector<UnitGesture>> next) {
        std::lock_guard lock(read_mu_);
        items_ = std::move(next);
    }

    mutable std::mutex read_mu_;
    std::mutex write_mu_;
    std::shared_ptr<const std::vector<UnitGesture>> items_;
};

} // namespace sgt
