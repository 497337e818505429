#pragma once

// Adversarial training with simulated controls.
//
// Generator objective: alpha * Huber(output, reference)
//                    + beta  * non-saturating GAN term
//                    + gamma * L1(style(output), style(reference)).
// One critic update precedes every generator update. After each epoch the
// model is evaluated on the validation windows and the parameters with the
// lowest no-control FGD are kept.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sgt/corpus.hpp"
#include "sgt/evaluation.hpp"
#include "sgt/genmodel.hpp"

namespace sgt {

struct TrainConfig {
    double alpha = 500.0;
    double beta = 5.0;
    double gamma = 0.05;
    int epochs = 80;
    double learning_rate = 5e-4;
    int batch_size = 128;
    std::uint64_t seed = 1;
    ControlDropout dropout;
    int window = 30;
    int window_stride = 10;
    int eval_stride = 10;
    double huber_delta = 1.0;
    ModelConfig model;
    ExtractorConfig extractor;

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "loss weights must be positive");
        }
        if (epochs < 1 || batch_size < 1 || window < 2 || window_stride < 1 || eval_stride < 1 ||
            !(learning_rate > 0.0) || !(huber_delta > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
        }
    }

    nlohmann::json to_json() const {
        return {{"alpha", alpha},
                {"beta", beta},
                {"gamma", gamma},
                {"epochs", epochs},
                {"learning_rate", learning_rate},
                {"batch_size", batch_size},
                {"seed", seed},
                {"dropout",
                 {{"all", dropout.p_drop_all},
                  {"pose", dropout.p_drop_pose},
                  {"style", dropout.p_drop_style},
                  {"style_element", dropout.p_drop_style_element}}},
                {"window", window},
                {"window_stride", window_stride},
                {"eval_stride", eval_stride},
                {"huber_delta", huber_delta},
                {"model", model.to_json()},
                {"extractor", extractor.to_json()}};
    }

    // Every key is optional; missing keys keep their defaults.
    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        try {
            c.alpha = j.value("alpha", c.alpha);
            c.beta = j.value("beta", c.beta);
            c.gamma = j.value("gamma", c.gamma);
            c.epochs = j.value("epochs", c.epochs);
            c.learning_rate = j.value("learning_rate", c.learning_rate);
            c.batch_size = j.value("batch_size", c.batch_size);
            c.seed = j.value("seed", c.seed);
            c.window = j.value("window", c.window);
            c.window_stride = j.value("window_stride", c.window_stride);
            c.eval_stride = j.value("eval_stride", c.eval_stride);
            c.huber_delta = j.value("huber_delta", c.huber_delta);
            if (j.contains("dropout")) {
                const auto& d = j["dropout"];
                c.dropout.p_drop_all = d.value("all", c.dropout.p_drop_all);
                c.dropout.p_drop_pose = d.value("pose", c.dropout.p_drop_pose);
                c.dropout.p_drop_style = d.value("style", c.dropout.p_drop_style);
                c.dropout.p_drop_style_element = d.value("style_element", c.dropout.p_drop_style_element);
            }
            if (j.contains("model")) {
                nlohmann::json m = c.model.to_json();
                m.update(j["model"]);
                c.model = ModelConfig::from_json(m);
            }
            if (j.contains("extractor")) {
                nlohmann::json e = c.extractor.to_json();
                e.update(j["extractor"]);
                c.extractor = ExtractorConfig::from_json(e);
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::SchemaViolation, std::string("training config: ") + e.what());
        }
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// Loss terms

// Mean Huber loss over all elements; optionally writes dL/dpred.
template <class T>
double huber_loss(const nn::Mat<T>& pred, const nn::Mat<T>& ref, nn::Mat<T>* grad = nullptr, double delta = 1.0) {
    if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "Huber loss operands differ in shape");
    }
    const auto n = static_cast<double>(pred.size());
    if (grad) grad->resize(pred.rows(), pred.cols());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double r = static_cast<double>(pred.data()[i]) - static_cast<double>(ref.data()[i]);
        const double a = std::abs(r);
        sum += a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
        if (grad) grad->data()[i] = static_cast<T>((a <= delta ? r : delta * (r > 0 ? 1.0 : -1.0)) / n);
    }
    return sum / n;
}

// Joint positions from (possibly unnormalized) direction vectors:
// child = parent + length * direction.
inline PoseFrame forward_kinematics_raw(std::span<const double> raw, const SkeletonSpec& skel) {
    PoseFrame p;
    for (int b = 0; b < kNumBones; ++b) {
        const auto& bone = kBones[b];
        p[bone.child] = p[bone.parent] + skel.bone_length(b) * Vec3(raw[b * 3], raw[b * 3 + 1], raw[b * 3 + 2]);
    }
    return p;
}

// Reverse of forward_kinematics_raw: joint gradients to direction gradients.
inline std::array<double, kPoseDim> forward_kinematics_raw_backward(PoseFrame joint_grad, const SkeletonSpec& skel) {
    std::array<double, kPoseDim> out{};
    for (int b = kNumBones - 1; b >= 0; --b) {
        const auto& bone = kBones[b];
        const Vec3 g = joint_grad[bone.child];
        for (int k = 0; k < 3; ++k) out[b * 3 + k] = skel.bone_length(b) * g[k];
        joint_grad[bone.parent] += g;
    }
    return out;
}

// Mean L1 distance between the normalized style of the raw generator output
// (27 x steps*batch) and the reference normalized style tracks. Optionally
// writes dL/draw.
template <class T>
double style_loss(const nn::Mat<T>& raw, int steps, int batch,
                  std::span<const std::vector<StyleFrame>> reference_style, const SkeletonSpec& skel,
                  const StyleNormStats& norm, nn::Mat<T>* grad = nullptr) {
    if (raw.rows() != kPoseDim || raw.cols() != static_cast<Eigen::Index>(steps) * batch ||
        static_cast<int>(reference_style.size()) != batch) {
        throw Error(ErrorCode::ShapeMismatch, "style loss operands differ in shape");
    }
    if (grad) grad->setZero(raw.rows(), raw.cols());
    const double scale = 1.0 / (static_cast<double>(steps) * kStyleDim * batch);
    double sum = 0.0;
    std::vector<PoseFrame> poses(steps);
    std::vector<StyleFrame> dstyle(steps);
    for (int b = 0; b < batch; ++b) {
        if (static_cast<int>(reference_style[b].size()) != steps) {
            throw Error(ErrorCode::ShapeMismatch, "reference style length differs from window");
        }
        for (int t = 0; t < steps; ++t) {
            std::array<double, kPoseDim> v{};
            const auto col = static_cast<Eigen::Index>(t) * batch + b;
            for (int k = 0; k < kPoseDim; ++k) v[k] = static_cast<double>(raw(k, col));
            poses[t] = forward_kinematics_raw(v, skel);
        }
        const auto style = style_track(std::span<const PoseFrame>(poses));
        for (int t = 0; t < steps; ++t) {
            for (int k = 0; k < kStyleDim; ++k) {
                const double z = (style[t][k] - norm.mean[k]) / norm.stddev[k];
                const double zc = std::clamp(z, -kStyleClamp, kStyleClamp);
                const double d = zc - reference_style[b][t][k];
                sum += std::abs(d);
                const bool clamped = z < -kStyleClamp || z > kStyleClamp;
                dstyle[t][k] = clamped || d == 0.0 ? 0.0 : (d > 0 ? scale : -scale) / norm.stddev[k];
            }
        }
        if (!grad) continue;
        const auto djoint = style_track_backward(std::span<const PoseFrame>(poses), std::span<const StyleFrame>(dstyle));
        for (int t = 0; t < steps; ++t) {
            const auto draw = forward_kinematics_raw_backward(djoint[t], skel);
            const auto col = static_cast<Eigen::Index>(t) * batch + b;
            for (int k = 0; k < kPoseDim; ++k) (*grad)(k, col) = static_cast<T>(draw[k]);
        }
    }
    return sum * scale;
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

struct GanTerms {
    double generator = 0.0;
    double critic = 0.0;
};

// Non-saturating GAN terms from critic logits (means over items):
// critic = BCE(real -> 1) + BCE(fake -> 0), generator = BCE(fake -> 1).
inline GanTerms gan_losses(std::span<const double> real_logits, std::span<const double> fake_logits) {
    if (real_logits.empty() || fake_logits.empty()) throw Error(ErrorCode::ShapeMismatch, "empty logit batch");
    GanTerms g;
    double r = 0.0, f = 0.0, gen = 0.0;
    for (double x : real_logits) r += softplus(-x);
    for (double x : fake_logits) {
        f += softplus(x);
        gen += softplus(-x);
    }
    g.critic = r / real_logits.size() + f / fake_logits.size();
    g.generator = gen / fake_logits.size();
    return g;
}

template <class T>
GanTerms gan_losses(const CriticNet<T>& critic, const nn::SeqBatch<T>& real, const nn::SeqBatch<T>& fake) {
    if (real.steps != fake.steps || real.features() != fake.features()) {
        throw Error(ErrorCode::ShapeMismatch, "real and fake batches differ in shape");
    }
    const nn::Mat<T> lr = critic.forward(real), lf = critic.forward(fake);
    const std::vector<double> r(lr.data(), lr.data() + lr.size()), f(lf.data(), lf.data() + lf.size());
    return gan_losses(r, f);
}

// ---------------------------------------------------------------------------
// Samples and batches

struct TrainingSample {
    SpeechContext speech;
    std::vector<DirVecFrame> reference;
    std::vector<StyleFrame> reference_style; // normalized
};

inline std::vector<TrainingSample> make_samples(std::span<const PreparedClip> clips, int window, int stride,
                                                const SkeletonSpec& skel, const StyleNormStats& norm,
                                                double silence_value) {
    std::vector<TrainingSample> out;
    for (const auto& w : make_windows(clips, window, stride, silence_value)) {
        TrainingSample s;
        s.reference_style = normalized_style_of(w.reference, skel, norm);
        s.speech = w.speech;
        s.reference = w.reference;
        out.push_back(std::move(s));
    }
    return out;
}

struct LossTerms {
    double huber = 0.0;
    double gan_generator = 0.0;
    double gan_critic = 0.0;
    double style = 0.0;
    double total = 0.0;
};

template <class T>
struct TrainBatch {
    GeneratorInputs<T> inputs;
    nn::SeqBatch<T> real;
    std::vector<std::vector<StyleFrame>> reference_style;
};

template <class T>
TrainBatch<T> make_batch(const BasicGeneratorModel<T>& model, std::span<const TrainingSample* const> samples,
                         std::span<const ControlSet> controls) {
    TrainBatch<T> b;
    std::vector<SpeechContext> speech;
    std::vector<std::vector<DirVecFrame>> refs;
    for (const auto* s : samples) {
        speech.push_back(s->speech);
        refs.push_back(s->reference);
        b.reference_style.push_back(s->reference_style);
    }
    b.inputs = model.inputs_for(speech, controls);
    b.real = pack_motion<T>(refs);
    return b;
}

// Generator objective on a batch with the critic frozen. Accumulates
// generator gradients when `backward` is set.
template <class T>
LossTerms generator_objective(BasicGeneratorModel<T>& model, const TrainBatch<T>& batch, const TrainConfig& cfg,
                              bool backward) {
    typename GeneratorNet<T>::Cache gcache;
    const nn::Mat<T> raw = model.generator.forward(batch.inputs, gcache);
    const int steps = batch.inputs.steps, n = batch.inputs.batch;
    LossTerms loss;
    nn::Mat<T> dhuber, dstyle;
    loss.huber = huber_loss<T>(raw, batch.real.data, backward ? &dhuber : nullptr, cfg.huber_delta);
    loss.style = style_loss<T>(raw, steps, n, batch.reference_style, model.skeleton, model.style_norm,
                               backward ? &dstyle : nullptr);
    typename CriticNet<T>::Cache ccache;
    const nn::SeqBatch<T> fake(raw, steps, n);
    const nn::Mat<T> logits = model.critic.forward(fake, ccache);
    nn::Mat<T> dlogits(1, n);
    for (int b = 0; b < n; ++b) {
        const double x = static_cast<double>(logits(0, b));
        loss.gan_generator += softplus(-x) / n;
        dlogits(0, b) = static_cast<T>((sigmoid(x) - 1.0) / n);
    }
    loss.total = cfg.alpha * loss.huber + cfg.beta * loss.gan_generator + cfg.gamma * loss.style;
    if (backward) {
        const nn::Mat<T> dgan = model.critic.backward(ccache, dlogits);
        const nn::Mat<T> draw = static_cast<T>(cfg.alpha) * dhuber + static_cast<T>(cfg.beta) * dgan +
                                static_cast<T>(cfg.gamma) * dstyle;
        model.generator.backward(gcache, batch.inputs, draw);
    }
    return loss;
}

// Critic objective for given real and (detached) fake motion; accumulates
// critic gradients and returns the critic loss.
template <class T>
double critic_objective(CriticNet<T>& critic, const nn::SeqBatch<T>& real, const nn::SeqBatch<T>& fake) {
    typename CriticNet<T>::Cache rc, fc;
    const nn::Mat<T> lr = critic.forward(real, rc), lf = critic.forward(fake, fc);
    const int n = real.batch;
    nn::Mat<T> dr(1, n), df(1, fake.batch);
    double loss = 0.0;
    for (int b = 0; b < n; ++b) {
        const double x = static_cast<double>(lr(0, b));
        loss += softplus(-x) / n;
        dr(0, b) = static_cast<T>((sigmoid(x) - 1.0) / n);
    }
    for (int b = 0; b < fake.batch; ++b) {
        const double x = static_cast<double>(lf(0, b));
        loss += softplus(x) / fake.batch;
        df(0, b) = static_cast<T>(sigmoid(x) / fake.batch);
    }
    critic.backward(rc, dr);
    critic.backward(fc, df);
    return loss;
}

// ---------------------------------------------------------------------------
// Splits

struct DatasetSplit {
    Dataset train, val, test;
};

// Order-independent fingerprint of a clip set.
inline std::string dataset_fingerprint(const Dataset& ds) {
    std::vector<std::string> ids;
    for (const auto& c : ds.clips) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    std::uint64_t h = fnv1a("");
    for (const auto& id : ids) h = fnv1a(id + "\n", h);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// 80/10/10 by clip after a seeded shuffle.
inline DatasetSplit split_dataset(const Dataset& ds, std::uint64_t seed) {
    if (ds.size() < 10) throw Error(ErrorCode::EmptyDataset, "need at least 10 clips to split 80/10/10");
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_val = ds.size() / 10, n_test = ds.size() / 10;
    const std::size_t n_train = ds.size() - n_val - n_test;
    DatasetSplit s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& dst = i < n_train ? s.train : (i < n_train + n_val ? s.val : s.test);
        dst.clips.push_back(ds.clips[order[i]]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Training loop

struct EpochRecord {
    int epoch = 0;
    double fgd = 0.0;
    double pcs = 0.0;
    double scs = 0.0;
    LossTerms loss;
};

struct TrainResult {
    GeneratorModel model;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    std::vector<double> extractor_history;
    std::string train_fingerprint;
    std::string val_fingerprint;
    double seconds = 0.0;
};

inline std::string history_csv(std::span<const EpochRecord> history) {
    std::ostringstream out;
    out << "epoch,fgd,pcs,scs,huber,gan_generator,gan_critic,style,total\n";
    char buf[512];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.fgd, r.pcs, r.scs,
                      r.loss.huber, r.loss.gan_generator, r.loss.gan_critic, r.loss.style, r.loss.total);
        out << buf;
    }
    return out.str();
}

using EpochCallback = std::function<void(const EpochRecord&, double elapsed_seconds)>;

// Trains on `train_set`, validating on `val_set` after every epoch.
inline TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
    using T = float;
    cfg.validate();
    if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    if (val_set.empty()) throw Error(ErrorCode::EmptyDataset, "validation set is empty");
    const auto started = std::chrono::steady_clock::now();

    std::vector<std::string> texts;
    std::vector<MotionSequence> motions;
    for (const auto& c : train_set.clips) {
        texts.push_back(c.text);
        motions.push_back(c.motion);
    }
    const Dictionary dict = Dictionary::build(texts);

    ModelConfig mc = cfg.model;
    mc.window = cfg.window;
    mc.vocab_size = dict.size();
    mc.seed = cfg.seed;
    TrainResult result;
    result.train_fingerprint = dataset_fingerprint(train_set);
    result.val_fingerprint = dataset_fingerprint(val_set);
    GeneratorModel& model = result.model;
    model = GeneratorModel(mc);
    model.dictionary = dict;
    model.skeleton = skeleton_from_dataset(motions);
    model.mean_pose = mean_pose(motions);
    model.style_norm = fit_norm_stats(motions);

    const auto train_clips = prepare_clips(train_set, dict);
    const auto val_clips = prepare_clips(val_set, dict);
    std::vector<Eigen::MatrixXd> audio;
    for (const auto& c : train_clips) audio.push_back(c.speech.audio_features);
    model.audio_norm = AudioNorm::fit(audio);
    const double silence = model.silence_feature();

    const auto samples =
        make_samples(train_clips, cfg.window, cfg.window_stride, model.skeleton, model.style_norm, silence);
    const auto val_windows = make_windows(val_clips, cfg.window, cfg.eval_stride, silence);

    ExtractorConfig ec = cfg.extractor;
    ec.window = cfg.window;
    model.extractor.emplace(ec);
    {
        std::vector<std::vector<DirVecFrame>> refs;
        for (const auto& s : samples) refs.push_back(s.reference);
        result.extractor_history = train_extractor<T>(*model.extractor, refs);
    }

    auto gparams = model.generator_params();
    auto cparams = model.critic_params();
    nn::Adam<T> gopt(nn::AdamConfig{cfg.learning_rate});
    nn::Adam<T> copt(nn::AdamConfig{cfg.learning_rate});
    std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    double best_fgd = std::numeric_limits<double>::infinity();
    std::vector<nn::Mat<T>> best_values;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        LossTerms sum;
        int batches = 0;
        for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
            const auto n = std::min<std::size_t>(cfg.batch_size, order.size() - at);
            std::vector<const TrainingSample*> picked;
            std::vector<ControlSet> controls;
            for (std::size_t i = at; i < at + n; ++i) {
                const auto& s = samples[order[i]];
                picked.push_back(&s);
                controls.push_back(simulate_controls(std::span<const DirVecFrame>(s.reference),
                                                     std::span<const StyleFrame>(s.reference_style), cfg.dropout,
                                                     rng)
                                       .controls);
            }
            const auto batch = make_batch<T>(model, picked, controls);

            // Critic step on detached generator output.
            const nn::SeqBatch<T> fake(model.generator.forward(batch.inputs), batch.inputs.steps, batch.inputs.batch);
            nn::zero_grads(cparams);
            const double dloss = critic_objective(model.critic, batch.real, fake);
            copt.step(cparams);

            nn::zero_grads(gparams);
            auto loss = generator_objective(model, batch, cfg, true);
            loss.gan_critic = dloss;
            if (!std::isfinite(loss.total) || !std::isfinite(dloss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << " batch " << batches << ": huber=" << loss.huber
                    << " gan_g=" << loss.gan_generator << " gan_d=" << dloss << " style=" << loss.style
                    << " grad_norm=" << nn::grad_norm(gparams);
                throw Error(ErrorCode::NonFiniteLoss, msg.str());
            }
            gopt.step(gparams);
            sum.huber += loss.huber;
            sum.gan_generator += loss.gan_generator;
            sum.gan_critic += loss.gan_critic;
            sum.style += loss.style;
            sum.total += loss.total;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = {sum.huber / batches, sum.gan_generator / batches, sum.gan_critic / batches, sum.style / batches,
                    sum.total / batches};
        const auto report = evaluate(model, val_windows, EvalOptions{false, false});
        rec.fgd = report.fgd_no_controls;
        rec.pcs = report.pcs;
        rec.scs = report.scs;
        result.history.push_back(rec);
        if (rec.fgd < best_fgd) {
            best_fgd = rec.fgd;
            result.best_epoch = epoch;
            best_values.clear();
            for (const auto* p : gparams) best_values.push_back(p->value);
            for (const auto* p : cparams) best_values.push_back(p->value);
        }
        if (on_epoch) {
            on_epoch(rec, std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        }
    }

    std::size_t k = 0;
    for (auto* p : gparams) p->value = best_values[k++];
    for (auto* p : cparams) p->value = best_values[k++];
    for (auto* p : model.all_params()) p->grad.setZero();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

} // namespace sgt
