#pragma once

// Motion feature extractor for FGD: a temporal-conv autoencoder whose
// encoder maps a t-frame dir-vec window to a latent vector.

#include <algorithm>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgt/nn.hpp"
#include "sgt/skeleton.hpp"

namespace sgt {

struct ExtractorConfig {
    int window = 30;
    int channels = 64;
    int latent = 32;
    int kernel = 3;
    int epochs = 20;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 2024;

    nlohmann::json to_json() const {
        return {{"window", window}, {"channels", channels}, {"latent", latent}, {"kernel", kernel},
                {"epochs", epochs}, {"batch_size", batch_size}, {"learning_rate", learning_rate},
                {"seed", seed}};
    }
    static ExtractorConfig from_json(const nlohmann::json& j) {
        ExtractorConfig c;
        c.window = j.at("window");
        c.channels = j.at("channels");
        c.latent = j.at("latent");
        c.kernel = j.at("kernel");
        c.epochs = j.at("epochs");
        c.batch_size = j.at("batch_size");
        c.learning_rate = j.at("learning_rate");
        c.seed = j.at("seed");
        return c;
    }
    bool operator==(const ExtractorConfig&) const = default;
};

template <class T>
class FeatureExtractorNet {
public:
    FeatureExtractorNet() = default;

    explicit FeatureExtractorNet(const ExtractorConfig& cfg) : cfg_(cfg) {
        std::mt19937_64 rng(cfg.seed);
        enc1_ = nn::Conv1d<T>("fe.enc1", kPoseDim, cfg.channels, cfg.kernel, rng);
        enc2_ = nn::Conv1d<T>("fe.enc2", cfg.channels, cfg.channels, cfg.kernel, rng);
        to_latent_ = nn::Linear<T>("fe.latent", cfg.channels * cfg.window, cfg.latent, rng);
        from_latent_ = nn::Linear<T>("fe.expand", cfg.latent, cfg.channels * cfg.window, rng);
        dec_ = nn::Conv1d<T>("fe.dec", cfg.channels, kPoseDim, cfg.kernel, rng);
    }

    const ExtractorConfig& config() const { return cfg_; }

    // motion: 27 x (window * batch). Returns latent x batch.
    nn::Mat<T> encode(const nn::SeqBatch<T>& motion) const {
        check(motion);
        const auto h1 = nn::leaky_relu<T>(enc1_.forward(motion).data);
        const auto h2 = nn::leaky_relu<T>(enc2_.forward(nn::SeqBatch<T>(h1, motion.steps, motion.batch)).data);
        return to_latent_.forward(nn::flatten_steps(nn::SeqBatch<T>(h2, motion.steps, motion.batch)));
    }

    // One reconstruction step (mean squared error); accumulates gradients
    // and returns the loss.
    double reconstruction_step(const nn::SeqBatch<T>& motion) {
        check(motion);
        typename nn::Conv1d<T>::Cache c1, c2, c3;
        typename nn::Linear<T>::Cache l1, l2;
        const auto pre1 = enc1_.forward(motion, c1).data;
        const auto h1 = nn::leaky_relu<T>(pre1);
        const auto pre2 = enc2_.forward(nn::SeqBatch<T>(h1, motion.steps, motion.batch), c2).data;
        const auto h2 = nn::leaky_relu<T>(pre2);
        const auto z = to_latent_.forward(nn::flatten_steps(nn::SeqBatch<T>(h2, motion.steps, motion.batch)), l1);
        const auto pre3 = from_latent_.forward(z, l2);
        const auto h3 = nn::leaky_relu<T>(pre3);
        const auto rec = dec_.forward(nn::unflatten_steps<T>(h3, cfg_.channels, motion.steps), c3).data;

        const nn::Mat<T> diff = rec - motion.data;
        const auto n = static_cast<double>(diff.size());
        const double loss = static_cast<double>(diff.squaredNorm()) / n;
        const nn::Mat<T> drec = diff * static_cast<T>(2.0 / n);
        const auto dh3 = nn::flatten_steps(dec_.backward(c3, drec));
        const auto dz = from_latent_.backward(l2, nn::leaky_relu_backward<T>(pre3, dh3));
        const auto dh2 = to_latent_.backward(l1, dz);
        const auto dpre2 =
            nn::leaky_relu_backward<T>(pre2, nn::unflatten_steps<T>(dh2, cfg_.channels, motion.steps).data);
        const auto dh1 = enc2_.backward(c2, dpre2).data;
        enc1_.backward(c1, nn::leaky_relu_backward<T>(pre1, dh1));
        return loss;
    }

    void collect(nn::ParamList<T>& out) {
        enc1_.collect(out);
        enc2_.collect(out);
        to_latent_.collect(out);
        from_latent_.collect(out);
        dec_.collect(out);
    }

private:
    void check(const nn::SeqBatch<T>& motion) const {
        if (motion.features() != kPoseDim || motion.steps != cfg_.window) {
            throw Error(ErrorCode::ShapeMismatch, "extractor expects 27 x window motion");
        }
    }

    ExtractorConfig cfg_;
    nn::Conv1d<T> enc1_, enc2_, dec_;
    nn::Linear<T> to_latent_, from_latent_;
};

// Packs dir-vec windows (each `window` frames) into a sequence batch.
template <class T>
nn::SeqBatch<T> pack_motion(std::span<const std::vector<DirVecFrame>> windows) {
    if (windows.empty()) throw Error(ErrorCode::EmptySet, "no motion windows");
    const int steps = static_cast<int>(windows.front().size());
    const int batch = static_cast<int>(windows.size());
    nn::Mat<T> data(kPoseDim, static_cast<Eigen::Index>(steps) * batch);
    for (int b = 0; b < batch; ++b) {
        if (static_cast<int>(windows[b].size()) != steps) {
            throw Error(ErrorCode::ShapeMismatch, "motion windows differ in length");
        }
        for (int t = 0; t < steps; ++t) {
            const auto col = static_cast<Eigen::Index>(t) * batch + b;
            for (int k = 0; k < kNumBones; ++k) {
                for (int c = 0; c < 3; ++c) data(k * 3 + c, col) = static_cast<T>(windows[b][t][k][c]);
            }
        }
    }
    return nn::SeqBatch<T>(std::move(data), steps, batch);
}

// Trains the autoencoder on reference windows for cfg.epochs with a fixed
// shuffling seed. Returns the per-epoch mean reconstruction loss.
template <class T>
std::vector<double> train_extractor(FeatureExtractorNet<T>& net, std::span<const std::vector<DirVecFrame>> windows) {
    if (windows.empty()) throw Error(ErrorCode::EmptySet, "extractor needs reference motion");
    const auto& cfg = net.config();
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    nn::ParamList<T> params;
    net.collect(params);
    nn::Adam<T> opt(nn::AdamConfig{cfg.learning_rate});
    std::vector<int> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<double> history;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        int batches = 0;
        for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
            std::vector<std::vector<DirVecFrame>> batch;
            for (std::size_t k = at; k < std::min(order.size(), at + cfg.batch_size); ++k) {
                batch.push_back(windows[order[k]]);
            }
            nn::zero_grads(params);
            total += net.reconstruction_step(pack_motion<T>(batch));
            opt.step(params);
            ++batches;
        }
        history.push_back(total / batches);
    }
    return history;
}

} // namespace sgt
