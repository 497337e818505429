#include <gtest/gtest.h>

#include <filesystem>

#include "sgt/corpus.hpp"
#include "sgt/stylestats.hpp"

using namespace sgt;
namespace fs = std::filesystem;

TEST(Corpus, IsDeterministicPerSeed) {
    const auto a = make_synthetic_corpus(12, 3), b = make_synthetic_corpus(12, 3), c = make_synthetic_corpus(12, 4);
    ASSERT_EQ(a.size(), 12u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.clips[i].wave, b.clips[i].wave);
        EXPECT_EQ(a.clips[i].text, b.clips[i].text);
    }
    EXPECT_NE(a.clips[0].text, c.clips[0].text);
    EXPECT_THROW(make_synthetic_corpus(9, 1), Error);
}

TEST(Corpus, ClipsAreConsistent) {
    const auto ds = make_synthetic_corpus(15, 8);
    for (const auto& clip : ds.clips) {
        EXPECT_EQ(clip.motion.size(), 90u);
        EXPECT_EQ(clip.wave.samples.size(), 96000u);
        EXPECT_NO_THROW(validate_timings(clip.timings));
        EXPECT_EQ(tokenize(clip.text).size(), clip.timings.size());
        EXPECT_FALSE(clip.timings.empty());
        const auto base = bone_lengths_of(clip.motion.frames.front());
        for (const auto& f : clip.motion.frames) {
            const auto lens = bone_lengths_of(f);
            for (int b = 0; b < kNumBones; ++b) EXPECT_NEAR(lens[b], base[b], 1e-9);
        }
    }
}

TEST(Corpus, TriggerWordsHitTheirCanonicalPose) {
    const auto ds = make_synthetic_corpus(60, 2);
    int checked = 0;
    for (const auto& clip : ds.clips) {
        for (std::size_t w = 0; w < clip.timings.size(); ++w) {
            const auto& t = clip.timings[w];
            if (t.word != "left" && t.word != "right" && t.word != "up") continue;
            const int peak = static_cast<int>(std::lround(0.5 * (t.start + t.end) * kFps));
            // Overlapping trigger blends are left out.
            bool isolated = true;
            for (std::size_t v = 0; v < clip.timings.size(); ++v) {
                const auto& o = clip.timings[v];
                if (v == w || (o.word != "left" && o.word != "right" && o.word != "up")) continue;
                if (std::abs(0.5 * (o.start + o.end) - 0.5 * (t.start + t.end)) < 1.0) isolated = false;
            }
            if (!isolated) continue;
            const auto expect = body_pose(trigger_body(t.word));
            for (int j = 0; j < kNumJoints; ++j) {
                EXPECT_LT((clip.motion.frames[peak][j] - expect[j]).norm(), 1e-9) << clip.id << " " << t.word;
            }
            ++checked;
        }
    }
    EXPECT_GT(checked, 10);
}

TEST(Corpus, HiddenScaleZeroRemovesPerClipStyleSpread) {
    CorpusConfig none;
    none.hidden_scale = 0.0;
    CorpusConfig full;
    full.hidden_scale = 1.0;
    const auto a = make_synthetic_corpus(40, 6, none), b = make_synthetic_corpus(40, 6, full);
    auto handedness_spread = [](const Dataset& ds) {
        std::vector<MotionSequence> ms;
        for (const auto& c : ds.clips) ms.push_back(c.motion);
        return fit_norm_stats(ms).stddev[kHandedness];
    };
    EXPECT_LT(handedness_spread(a), 0.5 * handedness_spread(b));
    // Speech is identical; only the hidden factors change.
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.clips[i].wave, b.clips[i].wave);
}

TEST(Corpus, DatasetDirectoryRoundTrip) {
    const auto dir = fs::temp_directory_path() / ("sgt-corpus-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    const auto ds = make_synthetic_corpus(10, 9);
    save_dataset(dir, ds);
    const auto back = load_dataset(dir);
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(back.clips[i].id, ds.clips[i].id);
        EXPECT_EQ(back.clips[i].wave, ds.clips[i].wave);
        EXPECT_EQ(back.clips[i].timings, ds.clips[i].timings);
        EXPECT_EQ(back.clips[i].text, ds.clips[i].text);
        ASSERT_EQ(back.clips[i].motion.size(), ds.clips[i].motion.size());
        for (std::size_t f = 0; f < ds.clips[i].motion.size(); ++f) {
            EXPECT_EQ(back.clips[i].motion.frames[f].joints, ds.clips[i].motion.frames[f].joints);
        }
    }
    fs::remove(dir / "index.json");
    EXPECT_THROW(load_dataset(dir), Error);
    fs::remove_all(dir);
}
