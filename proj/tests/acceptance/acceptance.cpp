// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//
//   acceptance [--out DIR] [--skip-training]
//
// DIR receives the training history, the held-out report and the style sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgt/checkpoint.hpp"
#include "sgt/evaluation.hpp"
#include "sgt/keyframe.hpp"
#include "sgt/training.hpp"
#include "style_oracle.hpp"
#include "support.hpp"

using namespace sgt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(const std::string& name, bool pass, const std::string& detail) {
    g_outcomes.push_back({name, pass, false, detail});
    std::printf("%s %-22s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

void skip(const std::string& name, const std::string& why) {
    g_outcomes.push_back({name, false, true, why});
    std::printf("SKIP %-22s %s\n", name.c_str(), why.c_str());
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Smooth random motion whose root also drifts, so no joint is ever still.
MotionSequence moving_sequence(std::mt19937_64& rng, int n) {
    auto seq = test::random_sequence(rng, n, SkeletonSpec{}, 0.1);
    std::normal_distribution<double> g(0.0, 0.05);
    Vec3 root = Vec3::Zero();
    for (auto& f : seq.frames) {
        root += Vec3(g(rng), g(rng), g(rng));
        for (auto& j : f.joints) j += root;
    }
    return seq;
}

// ---------------------------------------------------------------------------

void style_oracle_check() {
    std::mt19937_64 rng(101);
    std::vector<MotionSequence> seqs;
    for (int i = 0; i < 100; ++i) seqs.push_back(moving_sequence(rng, 60));
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& s : seqs) {
        const auto fast = style_track(s);
        const auto slow = test::brute_force_style(s.frames);
        for (std::size_t i = 0; i < fast.size(); ++i) {
            for (int k = 0; k < kStyleDim; ++k) worst = std::max(worst, std::abs(fast[i][k] - slow[i][k]));
        }
    }
    const double t = seconds_since(t0);
    report("style-oracle", worst <= 1e-9 && t < 5.0, fmt("max |diff| %.3g (<= 1e-9), %.3f s (< 5 s)", worst, t));
}

void style_gradient_check() {
    std::mt19937_64 rng(202);
    const double h = 1e-5;
    double worst = 0.0;
    int points = 0;
    for (int point = 0; point < 20; ++point) {
        auto s = moving_sequence(rng, 16);
        for (int k = 0; k < kStyleDim; ++k) {
            std::vector<StyleFrame> w(s.size());
            for (auto& f : w) f[k] = 1.0 / static_cast<double>(s.size());
            auto loss = [&](const std::vector<PoseFrame>& p) {
                double l = 0.0;
                for (const auto& f : style_track(std::span<const PoseFrame>(p))) l += f[k] / static_cast<double>(p.size());
                return l;
            };
            const auto grad = style_track_backward(s.frames, w);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                for (int j = 0; j < kNumJoints; ++j) {
                    for (int c = 0; c < 3; ++c) {
                        const double orig = s.frames[i][j][c];
                        s.frames[i][j][c] = orig + h;
                        const double lp = loss(s.frames);
                        s.frames[i][j][c] = orig - h;
                        const double lm = loss(s.frames);
                        s.frames[i][j][c] = orig;
                        const double fd = (lp - lm) / (2 * h);
                        num += (grad[i][j][c] - fd) * (grad[i][j][c] - fd);
                        den += fd * fd;
                    }
                }
            }
            worst = std::max(worst, std::sqrt(num / den));
        }
        ++points;
    }
    report("style-gradient", worst <= 1e-3,
           fmt("%d points x 3 statistics, max relative error %.3g (<= 1e-3)", points, worst));
}

void frechet_check() {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> g(0.0, 1.0);
    const int d = 32;
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    GaussianStats p;
    p.mean = Eigen::VectorXd::NullaryExpr(d, [&] { return g(rng); });
    p.cov = a * a.transpose() / d + Eigen::MatrixXd::Identity(d, d);
    const double self = frechet_distance(p, p);

    GaussianStats q = p;
    const Eigen::VectorXd m = Eigen::VectorXd::NullaryExpr(d, [&] { return g(rng); });
    q.mean += m;
    const double shift = frechet_distance(p, q) - m.squaredNorm();

    GaussianStats i1{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
    GaussianStats i4{Eigen::VectorXd::Zero(d), 4.0 * Eigen::MatrixXd::Identity(d, d)};
    const double scaled = frechet_distance(i1, i4) - d;

    report("frechet-closed-forms",
           std::abs(self) <= 1e-8 && std::abs(shift) <= 1e-8 && std::abs(scaled) <= 1e-6,
           fmt("self %.2g (1e-8), mean shift err %.2g (1e-8), I vs 4I err %.2g (1e-6), d=%d", self, shift, scaled, d));
}

void compliance_zero_check() {
    const auto ds = make_synthetic_corpus(20, 404);
    std::vector<MotionSequence> motions;
    for (const auto& c : ds.clips) motions.push_back(c.motion);
    const auto skel = skeleton_from_dataset(motions);
    const auto norm = fit_norm_stats(motions);
    double pcs_max = 0.0, scs_max = 0.0;
    int windows = 0;
    for (const auto& m : motions) {
        const auto dv = to_dirvecs(m);
        for (int s : window_starts(static_cast<int>(dv.size()), 30, 10)) {
            const std::vector<DirVecFrame> ref(dv.begin() + s, dv.begin() + s + 30);
            // The pass-through stub returns the reference it was conditioned on.
            const auto& generated = ref;
            pcs_max = std::max(pcs_max, pcs(pcs_protocol_controls(ref).pose, generated));
            scs_max = std::max(scs_max, scs(scs_protocol_controls(ref, skel, norm).style, generated, skel, norm));
            ++windows;
        }
    }
    report("compliance-zeros", pcs_max == 0.0 && scs_max == 0.0,
           fmt("max PCS %.3g, max SCS %.3g over %d windows (both exactly 0)", pcs_max, scs_max, windows));
}

// Natural cubic spline through (x, y) by the Thomas algorithm, evaluated at t.
struct TridiagonalSpline {
    std::vector<double> x, y, m;

    TridiagonalSpline(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        m.assign(n, 0.0);
        if (n < 3) return;
        const std::size_t k = n - 2;
        std::vector<double> sub(k), diag(k), sup(k), rhs(k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            sub[i - 1] = h0;
            diag[i - 1] = 2.0 * (h0 + h1);
            sup[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < k; ++i) {
            const double f = sub[i] / diag[i - 1];
            diag[i] -= f * sup[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
    }

    double operator()(double t) const {
        std::size_t i = 0;
        while (i + 2 < x.size() && t > x[i + 1]) ++i;
        const double h = x[i + 1] - x[i];
        const double a = (x[i + 1] - t) / h, b = (t - x[i]) / h;
        return a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    }
};

void spline_check() {
    std::mt19937_64 rng(505);
    double knot_err = 0.0, oracle_err = 0.0, const_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40 + trial * 3;
        std::vector<int> frames;
        for (int f = 0; f < n; ++f) {
            if (rng() % 6 == 0) frames.push_back(f);
        }
        std::vector<KeyPose> keys;
        for (int f : frames) keys.push_back({f, test::random_pose(rng)});
        const auto mean = test::random_pose(rng);
        const auto seq = interpolate(keys, n, mean);
        const auto raw = spline_raw(keys, n, mean);
        for (const auto& k : keys) {
            for (int j = 0; j < kNumJoints; ++j) knot_err = std::max(knot_err, (seq.frames[k.frame][j] - k.pose[j]).norm());
        }
        std::vector<double> x;
        if (frames.empty() || frames.front() != 0) x.push_back(0);
        for (int f : frames) x.push_back(f);
        if (x.back() != n - 1) x.push_back(n - 1);
        for (int j = 0; j < kNumJoints; ++j) {
            for (int c = 0; c < 3; ++c) {
                std::vector<double> y;
                for (double xf : x) {
                    const auto it = std::find(frames.begin(), frames.end(), static_cast<int>(xf));
                    y.push_back(it == frames.end() ? mean[j][c] : keys[it - frames.begin()].pose[j][c]);
                }
                const TridiagonalSpline oracle(x, y);
                for (int f = 0; f < n; ++f) oracle_err = std::max(oracle_err, std::abs(raw[f][j][c] - oracle(f)));
            }
        }
        const auto flat = interpolate({}, n, mean);
        for (const auto& f : flat.frames) {
            for (int j = 0; j < kNumJoints; ++j) const_err = std::max(const_err, (f[j] - mean[j]).norm());
        }
    }
    report("spline-baseline", knot_err == 0.0 && oracle_err <= 1e-9 && const_err == 0.0,
           fmt("knot error %.3g (0), oracle error %.3g (<= 1e-9), mean-only deviation %.3g (0)", knot_err, oracle_err,
               const_err));
}

// Pose is a pure function of the absolute frame index carried in audio
// feature 0; pose controls pass through.
class PassThroughStub final : public WindowGenerator {
public:
    std::vector<DirVecFrame> generate(const SpeechContext& window, const ControlSet& controls) const override {
        std::vector<DirVecFrame> out;
        for (int t = 0; t < window.n_frames(); ++t) {
            if (controls.pose.mask[t]) {
                out.push_back(DirVecFrame::from_flat(controls.pose.poses[t], false));
                continue;
            }
            const double i = window.audio_features(t, 0);
            DirVecFrame f;
            for (int b = 0; b < kNumBones; ++b) f[b] = Vec3(std::sin(0.1 * i + b), std::cos(0.07 * i - b), 0.5).normalized();
            out.push_back(f);
        }
        return out;
    }
    double silence_feature() const override { return -1.0; }
};

void long_form_check() {
    PassThroughStub stub;
    bool ok = true;
    double worst_seam = 0.0;
    std::string lengths;
    for (int n : {1, 29, 30, 31, 75, 300}) {
        SpeechContext s;
        s.audio_features = Eigen::MatrixXd(n, 2);
        for (int i = 0; i < n; ++i) s.audio_features.row(i) << i, 0.0;
        s.word_indices.assign(n, 0);
        const auto dv = generate_long_dirvecs(&stub, s, empty_controls(n));
        const auto motion = generate_long(s, empty_controls(n), &stub, SkeletonSpec{});
        ok = ok && static_cast<int>(dv.frames.size()) == n && static_cast<int>(motion.size()) == n;
        for (const auto& seam : dv.seams) worst_seam = std::max(worst_seam, seam.overlap_deviation);
        lengths += (lengths.empty() ? "" : ",") + std::to_string(motion.size());
    }
    report("long-form-synthesis", ok && worst_seam == 0.0,
           fmt("lengths {%s} for N {1,29,30,31,75,300}; max seam discontinuity %.3g (0)", lengths.c_str(), worst_seam));
}

TrainConfig reduced_config() {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 32;
    cfg.model.audio_hidden = 8;
    cfg.model.audio_layers = 2;
    cfg.model.word_embedding_dim = 8;
    cfg.model.word_hidden = 16;
    cfg.model.decoder_hidden = 32;
    cfg.model.critic_channels = 8;
    cfg.model.critic_layers = 2;
    cfg.extractor.channels = 8;
    cfg.extractor.latent = 8;
    cfg.extractor.epochs = 2;
    return cfg;
}

bool bit_identical(const std::vector<std::vector<DirVecFrame>>& a, const std::vector<std::vector<DirVecFrame>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t t = 0; t < a[i].size(); ++t) {
            for (int k = 0; k < kNumBones; ++k) {
                for (int c = 0; c < 3; ++c) {
                    const double x = a[i][t][k][c], y = b[i][t][k][c];
                    if (std::memcmp(&x, &y, sizeof x) != 0) return false;
                }
            }
        }
    }
    return true;
}

void determinism_check(const GeneratorModel* full_model, std::span<const EvalWindow> windows, const fs::path& out) {
    const auto split = split_dataset(make_synthetic_corpus(30, 606), 606);
    const auto cfg = reduced_config();
    const auto a = train(split.train, split.val, cfg);
    const auto b = train(split.train, split.val, cfg);
    const auto csv_a = history_csv(a.history), csv_b = history_csv(b.history);
    const bool csv_same = csv_a == csv_b;

    const GeneratorModel& model = full_model ? *full_model : a.model;
    std::vector<EvalWindow> probe(windows.begin(), windows.end());
    if (probe.empty()) {
        const auto clips = prepare_clips(split.test, model.dictionary);
        probe = make_windows(clips, model.config.window, 10, model.silence_feature());
    }
    const auto path = out / "roundtrip.ckpt";
    save_checkpoint(path, model);
    const auto loaded = load_checkpoint(path);
    std::vector<ControlSet> none, pose;
    for (const auto& w : probe) {
        none.push_back(empty_controls(static_cast<int>(w.reference.size())));
        pose.push_back(pcs_protocol_controls(w.reference));
    }
    const bool fwd_same = bit_identical(generate_windows(model, probe, none), generate_windows(loaded, probe, none)) &&
                          bit_identical(generate_windows(model, probe, pose), generate_windows(loaded, probe, pose));
    const bool bytes_same = encode_checkpoint(loaded) == encode_checkpoint(model);
    fs::remove(path);
    report("determinism", csv_same && fwd_same && bytes_same,
           fmt("history CSV %s across two %d-epoch runs (%zu bytes); checkpoint round trip %s on %zu windows%s",
               csv_same ? "identical" : "DIFFERS", cfg.epochs, csv_a.size(), fwd_same ? "bit-identical" : "DIFFERS",
               probe.size(), bytes_same ? "" : ", re-encoded bytes differ"));
}

} // namespace

int main(int argc, char** argv) {
    fs::path out = "acceptance_out";
    bool skip_training = false;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) {
            out = argv[++i];
        } else if (a == "--skip-training") {
            skip_training = true;
        } else {
            std::fprintf(stderr, "usage: %s [--out DIR] [--skip-training]\n", argv[0]);
            return 2;
        }
    }
    fs::create_directories(out);

    style_oracle_check();
    style_gradient_check();
    frechet_check();
    compliance_zero_check();
    spline_check();

    std::optional<TrainResult> trained;
    std::vector<EvalWindow> test_windows;
    if (skip_training) {
        skip("toy-training", "--skip-training");
        skip("style-sweep", "--skip-training");
    } else {
        const auto ds = make_synthetic_corpus(200, 7);
        const auto split = split_dataset(ds, 7);
        TrainConfig cfg;
        std::printf("     training %zu/%zu/%zu clips, %d epochs\n", split.train.size(), split.val.size(),
                    split.test.size(), cfg.epochs);
        std::fflush(stdout);
        trained = train(split.train, split.val, cfg, [](const EpochRecord& r, double s) {
            if (r.epoch % 10 == 0) {
                std::printf("     epoch %2d %6.1fs val fgd %.4f pcs %.4f scs %.4f\n", r.epoch, s, r.fgd, r.pcs, r.scs);
                std::fflush(stdout);
            }
        });
        const auto& model = trained->model;
        write_text_file(out / "history.csv", history_csv(trained->history));

        const auto test_clips = prepare_clips(split.test, model.dictionary);
        test_windows = make_windows(test_clips, model.config.window, 10, model.silence_feature());
        const auto r = evaluate(model, test_windows);
        write_text_file(out / "report.csv", report_to_csv(r));
        const bool a = r.pcs < 0.5 * r.static_pcs, b = r.scs < 0.5 * r.static_scs;
        const bool c = r.fgd_no_controls < 0.1 * r.static_fgd, d = r.fgd_pose_controls <= r.fgd_no_controls;
        const bool fast = trained->seconds < 900.0;
        report("toy-training", a && b && c && d && fast,
               fmt("%.0f s (< 900); (a) PCS %.4f < %.4f %s; (b) SCS %.4f < %.4f %s; (c) FGD %.4f < %.4f %s; "
                   "(d) FGD pose %.4f <= %.4f %s; best epoch %d, %d test windows",
                   trained->seconds, r.pcs, 0.5 * r.static_pcs, a ? "ok" : "MISS", r.scs, 0.5 * r.static_scs,
                   b ? "ok" : "MISS", r.fgd_no_controls, 0.1 * r.static_fgd, c ? "ok" : "MISS", r.fgd_pose_controls,
                   r.fgd_no_controls, d ? "ok" : "MISS", trained->best_epoch, r.n_windows));

        const std::vector<PreparedClip> sweep_clips(test_clips.begin(),
                                                    test_clips.begin() + std::min<std::size_t>(20, test_clips.size()));
        const auto sweep = style_sweep(model, sweep_clips, kSpeed, {-2.0, -1.0, 0.0, 1.0, 2.0});
        std::string medians;
        for (double v : sweep.median_raw) medians += (medians.empty() ? "" : ", ") + fmt("%.5f", v);
        write_text_file(out / "sweep.json", json{{"levels", sweep.levels},
                                                 {"median_raw_speed", sweep.median_raw},
                                                 {"increasing_points", sweep.increasing_points},
                                                 {"clips", sweep_clips.size()}}
                                                .dump(1));
        report("style-sweep", sweep.increasing_points >= 4 && sweep_clips.size() == 20,
               fmt("median raw speed at -2..+2 over %zu clips: [%s]; %d of 5 strictly increasing (>= 4)",
                   sweep_clips.size(), medians.c_str(), sweep.increasing_points));
    }

    long_form_check();
    determinism_check(trained ? &trained->model : nullptr, test_windows, out);

    int pass = 0, fail = 0, skipped = 0;
    for (const auto& o : g_outcomes) (o.skipped ? skipped : (o.pass ? pass : fail))++;
    std::printf("%d passed, %d failed, %d skipped\n", pass, fail, skipped);
    return fail == 0 ? 0 : 1;
}
