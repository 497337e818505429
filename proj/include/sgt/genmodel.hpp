#pragma once

// Conditional gesture generator and adversarial critic.
//
// Per frame the decoder consumes [audio code; word code; pose control (27
// values + mask); style control (3 values + 3 masks)]. A bidirectional GRU
// runs over the fused frames and a linear head, which also sees the fused
// frame, emits 27 raw direction-vector values per frame.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "sgt/controls.hpp"
#include "sgt/extractor.hpp"
#include "sgt/nn.hpp"
#include "sgt/skeleton.hpp"
#include "sgt/speech.hpp"
#include "sgt/stylestats.hpp"

namespace sgt {

inline constexpr int kPoseControlDim = kPoseDim + 1;
inline constexpr int kStyleControlDim = 2 * kStyleDim;

struct ModelConfig {
    int window = 30;
    int audio_dim = 26;
    int vocab_size = 1;
    int word_embedding_dim = 50;
    int audio_hidden = 32;
    int audio_layers = 4;
    int kernel = 3;
    int word_hidden = 64;
    int decoder_hidden = 256;
    int critic_channels = 64;
    int critic_layers = 3;
    std::uint64_t seed = 1;

    int fused_dim() const { return audio_hidden + word_hidden + kPoseControlDim + kStyleControlDim; }

    nlohmann::json to_json() const {
        return {{"window", window},
                {"audio_dim", audio_dim},
                {"vocab_size", vocab_size},
                {"word_embedding_dim", word_embedding_dim},
                {"audio_hidden", audio_hidden},
                {"audio_layers", audio_layers},
                {"kernel", kernel},
                {"word_hidden", word_hidden},
                {"decoder_hidden", decoder_hidden},
                {"critic_channels", critic_channels},
                {"critic_layers", critic_layers},
                {"pose_dim", kPoseDim},
                {"seed", seed}};
    }

    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        c.window = j.at("window");
        c.audio_dim = j.at("audio_dim");
        c.vocab_size = j.at("vocab_size");
        c.word_embedding_dim = j.at("word_embedding_dim");
        c.audio_hidden = j.at("audio_hidden");
        c.audio_layers = j.at("audio_layers");
        c.kernel = j.at("kernel");
        c.word_hidden = j.at("word_hidden");
        c.decoder_hidden = j.at("decoder_hidden");
        c.critic_channels = j.at("critic_channels");
        c.critic_layers = j.at("critic_layers");
        c.seed = j.at("seed");
        if (j.at("pose_dim").get<int>() != kPoseDim) throw Error(ErrorCode::ShapeMismatch, "pose_dim must be 27");
        return c;
    }

    bool operator==(const ModelConfig&) const = default;
};

// Per-dimension standardization of the log-mel rows.
struct AudioNorm {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;

    static AudioNorm identity(int dim) { return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}; }

    static AudioNorm fit(std::span<const Eigen::MatrixXd> features) {
        if (features.empty()) throw Error(ErrorCode::EmptyDataset, "no audio features");
        const auto dim = features.front().cols();
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim), sq = Eigen::VectorXd::Zero(dim);
        double n = 0;
        for (const auto& f : features) {
            sum += f.colwise().sum().transpose();
            sq += f.array().square().matrix().colwise().sum().transpose();
            n += static_cast<double>(f.rows());
        }
        AudioNorm out;
        out.mean = sum / n;
        out.stddev = (sq / n - out.mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt().cwiseMax(1e-6);
        return out;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const {
        return (rows.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array();
    }

    nlohmann::json to_json() const {
        return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
                {"stddev", std::vector<double>(stddev.data(), stddev.data() + stddev.size())}};
    }
    static AudioNorm from_json(const nlohmann::json& j) {
        const auto m = j.at("mean").get<std::vector<double>>();
        const auto s = j.at("stddev").get<std::vector<double>>();
        AudioNorm out;
        out.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
        out.stddev = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
        return out;
    }
    bool operator==(const AudioNorm& o) const { return mean == o.mean && stddev == o.stddev; }
};

// One generator input item: normalized audio rows (t x A), word indices
// and controls, all of length t.
struct GeneratorItem {
    const Eigen::MatrixXd* audio = nullptr;
    const std::vector<int>* words = nullptr;
    const ControlSet* controls = nullptr;
};

template <class T>
struct GeneratorInputs {
    nn::SeqBatch<T> audio;
    std::vector<int> words;
    nn::SeqBatch<T> pose;
    nn::SeqBatch<T> style;
    int steps = 0;
    int batch = 0;
};

// Builds the batched conditioning tensors. Control values are multiplied by
// their mask bits, so unmasked rows reach the network as exact zeros.
template <class T>
GeneratorInputs<T> assemble_inputs(std::span<const GeneratorItem> items) {
    if (items.empty()) throw Error(ErrorCode::ShapeMismatch, "empty generator batch");
    const int steps = static_cast<int>(items.front().words->size());
    const int batch = static_cast<int>(items.size());
    const auto audio_dim = items.front().audio->cols();
    const auto cols = static_cast<Eigen::Index>(steps) * batch;
    GeneratorInputs<T> in;
    in.steps = steps;
    in.batch = batch;
    nn::Mat<T> audio(audio_dim, cols), pose = nn::Mat<T>::Zero(kPoseControlDim, cols),
        style = nn::Mat<T>::Zero(kStyleControlDim, cols);
    in.words.assign(static_cast<std::size_t>(cols), 0);
    for (int b = 0; b < batch; ++b) {
        const auto& item = items[b];
        if (static_cast<int>(item.words->size()) != steps || item.audio->rows() != steps ||
            item.audio->cols() != audio_dim || item.controls->pose.size() != steps ||
            item.controls->style.size() != steps) {
            throw Error(ErrorCode::ShapeMismatch, "every conditioning stream must have t rows");
        }
        for (int t = 0; t < steps; ++t) {
            const auto col = static_cast<Eigen::Index>(t) * batch + b;
            audio.col(col) = item.audio->row(t).transpose().template cast<T>();
            in.words[col] = (*item.words)[t];
            const double pm = item.controls->pose.mask[t] ? 1.0 : 0.0;
            for (int k = 0; k < kPoseDim; ++k) pose(k, col) = static_cast<T>(item.controls->pose.poses[t][k] * pm);
            pose(kPoseDim, col) = static_cast<T>(pm);
            for (int k = 0; k < kStyleDim; ++k) {
                const double sm = item.controls->style.masks[t][k] ? 1.0 : 0.0;
                style(k, col) = static_cast<T>(item.controls->style.values[t][k] * sm);
                style(kStyleDim + k, col) = static_cast<T>(sm);
            }
        }
    }
    in.audio = nn::SeqBatch<T>(std::move(audio), steps, batch);
    in.pose = nn::SeqBatch<T>(std::move(pose), steps, batch);
    in.style = nn::SeqBatch<T>(std::move(style), steps, batch);
    return in;
}

template <class T>
class GeneratorNet {
public:
    GeneratorNet() = default;

    template <class Rng>
    GeneratorNet(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
        int in = cfg.audio_dim;
        for (int l = 0; l < cfg.audio_layers; ++l) {
            audio_convs_.emplace_back("gen.audio" + std::to_string(l), in, cfg.audio_hidden, cfg.kernel, rng);
            in = cfg.audio_hidden;
        }
        word_emb_ = nn::Embedding<T>("gen.word_emb", cfg.vocab_size, cfg.word_embedding_dim, rng);
        word_gru_ = nn::Gru<T>("gen.word_gru", cfg.word_embedding_dim, cfg.word_hidden, false, rng);
        decoder_ = nn::BiGru<T>("gen.decoder", cfg.fused_dim(), cfg.decoder_hidden, rng);
        head_ = nn::Linear<T>("gen.head", decoder_.out_features() + cfg.fused_dim(), kPoseDim, rng);
    }

    struct Cache {
        std::vector<typename nn::Conv1d<T>::Cache> convs;
        std::vector<nn::Mat<T>> conv_pre;
        typename nn::Gru<T>::Cache word_gru;
        typename nn::BiGru<T>::Cache decoder;
        typename nn::Linear<T>::Cache head;
    };

    nn::Mat<T> forward(const GeneratorInputs<T>& in) const { return run(in, nullptr); }
    nn::Mat<T> forward(const GeneratorInputs<T>& in, Cache& cache) const { return run(in, &cache); }

    // Accumulates parameter gradients given dL/d(raw output).
    void backward(const Cache& cache, const GeneratorInputs<T>& in, const nn::Mat<T>& dout) {
        const nn::Mat<T> dhead = head_.backward(cache.head, dout);
        const int dec = decoder_.out_features();
        nn::Mat<T> dfused = dhead.bottomRows(cfg_.fused_dim());
        dfused += decoder_.backward(cache.decoder, dhead.topRows(dec)).data;
        const nn::Mat<T> dword = word_gru_.backward(cache.word_gru, dfused.middleRows(cfg_.audio_hidden,
                                                                                        cfg_.word_hidden))
                                     .data;
        word_emb_.backward(in.words, dword);
        nn::Mat<T> da = dfused.topRows(cfg_.audio_hidden);
        for (int l = static_cast<int>(audio_convs_.size()) - 1; l >= 0; --l) {
            da = audio_convs_[l].backward(cache.convs[l], nn::leaky_relu_backward<T>(cache.conv_pre[l], da)).data;
        }
    }

    void collect(nn::ParamList<T>& out) {
        for (auto& c : audio_convs_) c.collect(out);
        word_emb_.collect(out);
        word_gru_.collect(out);
        decoder_.collect(out);
        head_.collect(out);
    }

    const ModelConfig& config() const { return cfg_; }

private:
    nn::Mat<T> run(const GeneratorInputs<T>& in, Cache* cache) const {
        if (in.audio.features() != cfg_.audio_dim) throw Error(ErrorCode::ShapeMismatch, "audio feature width");
        nn::SeqBatch<T> a = in.audio;
        if (cache) {
            cache->convs.assign(audio_convs_.size(), {});
            cache->conv_pre.assign(audio_convs_.size(), {});
        }
        for (std::size_t l = 0; l < audio_convs_.size(); ++l) {
            nn::SeqBatch<T> pre = cache ? audio_convs_[l].forward(a, cache->convs[l]) : audio_convs_[l].forward(a);
            a = nn::SeqBatch<T>(nn::leaky_relu<T>(pre.data), in.steps, in.batch);
            if (cache) cache->conv_pre[l] = std::move(pre.data);
        }
        const nn::SeqBatch<T> emb(word_emb_.forward(in.words), in.steps, in.batch);
        const nn::SeqBatch<T> w = cache ? word_gru_.forward(emb, cache->word_gru) : word_gru_.forward(emb);

        nn::Mat<T> fused(cfg_.fused_dim(), a.data.cols());
        fused << a.data, w.data, in.pose.data, in.style.data;
        const nn::SeqBatch<T> fused_seq(fused, in.steps, in.batch);
        const nn::SeqBatch<T> d = cache ? decoder_.forward(fused_seq, cache->decoder) : decoder_.forward(fused_seq);
        nn::Mat<T> head_in(d.data.rows() + fused.rows(), fused.cols());
        head_in << d.data, fused;
        return cache ? head_.forward(head_in, cache->head) : head_.forward(head_in);
    }

    ModelConfig cfg_;
    std::vector<nn::Conv1d<T>> audio_convs_;
    nn::Embedding<T> word_emb_;
    nn::Gru<T> word_gru_;
    nn::BiGru<T> decoder_;
    nn::Linear<T> head_;
};

// Temporal-conv critic with mean pooling; one realness logit per item.
template <class T>
class CriticNet {
public:
    CriticNet() = default;

    template <class Rng>
    CriticNet(const ModelConfig& cfg, Rng& rng) {
        int in = kPoseDim;
        for (int l = 0; l < cfg.critic_layers; ++l) {
            convs_.emplace_back("critic.conv" + std::to_string(l), in, cfg.critic_channels, cfg.kernel, rng);
            in = cfg.critic_channels;
        }
        out_ = nn::Linear<T>("critic.out", in, 1, rng);
    }

    struct Cache {
        std::vector<typename nn::Conv1d<T>::Cache> convs;
        std::vector<nn::Mat<T>> pre;
        typename nn::Linear<T>::Cache out;
        int steps = 0;
    };

    nn::Mat<T> forward(const nn::SeqBatch<T>& motion) const { return run(motion, nullptr); }
    nn::Mat<T> forward(const nn::SeqBatch<T>& motion, Cache& cache) const { return run(motion, &cache); }

    // Returns dL/d(motion) and accumulates parameter gradients.
    nn::Mat<T> backward(const Cache& cache, const nn::Mat<T>& dlogits) {
        const nn::Mat<T> dpooled = out_.backward(cache.out, dlogits);
        nn::Mat<T> dx = nn::mean_over_steps_backward<T>(dpooled, cache.steps);
        for (int l = static_cast<int>(convs_.size()) - 1; l >= 0; --l) {
            dx = convs_[l].backward(cache.convs[l], nn::leaky_relu_backward<T>(cache.pre[l], dx)).data;
        }
        return dx;
    }

    void collect(nn::ParamList<T>& out) {
        for (auto& c : convs_) c.collect(out);
        out_.collect(out);
    }

private:
    nn::Mat<T> run(const nn::SeqBatch<T>& motion, Cache* cache) const {
        if (motion.features() != kPoseDim) throw Error(ErrorCode::ShapeMismatch, "critic expects 27 rows");
        nn::SeqBatch<T> x = motion;
        if (cache) {
            cache->convs.assign(convs_.size(), {});
            cache->pre.assign(convs_.size(), {});
            cache->steps = motion.steps;
        }
        for (std::size_t l = 0; l < convs_.size(); ++l) {
            nn::SeqBatch<T> pre = cache ? convs_[l].forward(x, cache->convs[l]) : convs_[l].forward(x);
            x = nn::SeqBatch<T>(nn::leaky_relu<T>(pre.data), motion.steps, motion.batch);
            if (cache) cache->pre[l] = std::move(pre.data);
        }
        const nn::Mat<T> pooled = nn::mean_over_steps(x);
        return cache ? out_.forward(pooled, cache->out) : out_.forward(pooled);
    }

    std::vector<nn::Conv1d<T>> convs_;
    nn::Linear<T> out_;
};

// Anything that turns one speech window plus controls into dir-vec frames.
class WindowGenerator {
public:
    virtual ~WindowGenerator() = default;
    virtual std::vector<DirVecFrame> generate(const SpeechContext& window, const ControlSet& controls) const = 0;
    // Raw audio feature value used to pad speech past the end of a clip.
    virtual double silence_feature() const { return std::log(AudioFeatureConfig{}.log_floor); }
};

// Converts the raw head output for item b into unit direction vectors.
template <class T>
std::vector<DirVecFrame> unpack_dirvecs(const nn::Mat<T>& raw, int steps, int batch, int b) {
    std::vector<DirVecFrame> out(steps);
    for (int t = 0; t < steps; ++t) {
        const auto col = static_cast<Eigen::Index>(t) * batch + b;
        std::array<double, kPoseDim> v{};
        for (int k = 0; k < kPoseDim; ++k) v[k] = static_cast<double>(raw(k, col));
        out[t] = DirVecFrame::from_flat(v, true);
    }
    return out;
}

template <class T>
class BasicGeneratorModel final : public WindowGenerator {
public:
    ModelConfig config;
    GeneratorNet<T> generator;
    CriticNet<T> critic;
    std::optional<FeatureExtractorNet<T>> extractor;
    Dictionary dictionary;
    StyleNormStats style_norm;
    AudioNorm audio_norm;
    SkeletonSpec skeleton;
    PoseFrame mean_pose;

    BasicGeneratorModel() = default;

    explicit BasicGeneratorModel(const ModelConfig& cfg) : config(cfg) {
        std::mt19937_64 rng(cfg.seed);
        generator = GeneratorNet<T>(cfg, rng);
        critic = CriticNet<T>(cfg, rng);
        audio_norm = AudioNorm::identity(cfg.audio_dim);
        dictionary = Dictionary{};
    }

    std::vector<DirVecFrame> generate(const SpeechContext& window, const ControlSet& controls) const override {
        return generate_batch(std::span<const SpeechContext>(&window, 1), std::span<const ControlSet>(&controls, 1))
            .front();
    }

    std::vector<std::vector<DirVecFrame>> generate_batch(std::span<const SpeechContext> windows,
                                                         std::span<const ControlSet> controls) const {
        const auto in = inputs_for(windows, controls);
        const nn::Mat<T> raw = generator.forward(in);
        std::vector<std::vector<DirVecFrame>> out;
        for (int b = 0; b < in.batch; ++b) out.push_back(unpack_dirvecs(raw, in.steps, in.batch, b));
        return out;
    }

    GeneratorInputs<T> inputs_for(std::span<const SpeechContext> windows, std::span<const ControlSet> controls) const {
        if (windows.size() != controls.size() || windows.empty()) {
            throw Error(ErrorCode::ShapeMismatch, "one control set per speech window required");
        }
        std::vector<Eigen::MatrixXd> audio;
        audio.reserve(windows.size());
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const auto& w = windows[i];
            if (w.audio_dim() != config.audio_dim) throw Error(ErrorCode::ShapeMismatch, "audio feature width");
            if (w.n_frames() < 1 || w.n_frames() != windows.front().n_frames() ||
                controls[i].size() != w.n_frames()) {
                throw Error(ErrorCode::ShapeMismatch, "speech and controls must have equal frame counts");
            }
            w.validate(config.vocab_size);
            audio.push_back(audio_norm.apply(w.audio_features));
        }
        std::vector<GeneratorItem> items;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            items.push_back({&audio[i], &windows[i].word_indices, &controls[i]});
        }
        return assemble_inputs<T>(items);
    }

    double critic_score(std::span<const DirVecFrame> motion) const {
        const std::vector<DirVecFrame> one(motion.begin(), motion.end());
        return critic_scores(std::span<const std::vector<DirVecFrame>>(&one, 1)).front();
    }

    std::vector<double> critic_scores(std::span<const std::vector<DirVecFrame>> motions) const {
        for (const auto& m : motions) {
            if (static_cast<int>(m.size()) != config.window) {
                throw Error(ErrorCode::ShapeMismatch, "critic expects window-length motion");
            }
        }
        const nn::Mat<T> logits = critic.forward(pack_motion<T>(motions));
        std::vector<double> out(static_cast<std::size_t>(logits.cols()));
        for (Eigen::Index b = 0; b < logits.cols(); ++b) out[b] = static_cast<double>(logits(0, b));
        return out;
    }

    nn::ParamList<T> generator_params() {
        nn::ParamList<T> ps;
        generator.collect(ps);
        return ps;
    }
    nn::ParamList<T> critic_params() {
        nn::ParamList<T> ps;
        critic.collect(ps);
        return ps;
    }
    nn::ParamList<T> all_params() {
        nn::ParamList<T> ps;
        generator.collect(ps);
        critic.collect(ps);
        if (extractor) extractor->collect(ps);
        return ps;
    }

    std::vector<DirVecFrame> mean_pose_window(int t) const {
        return std::vector<DirVecFrame>(t, to_dirvec(mean_pose));
    }
};

using GeneratorModel = BasicGeneratorModel<float>;

} // namespace sgt
