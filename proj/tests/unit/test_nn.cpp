#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "sgt/nn.hpp"

namespace sgt::nn {
namespace {

using M = Mat<double>;

M random_mat(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g(0.0, 1.0);
    M m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

// Checks analytic parameter and input gradients of `loss` against central
// differences. `run` performs forward+backward, returning the loss and
// writing the input gradient.
void check_gradients(ParamList<double> params, M& input, const std::function<double()>& loss_only,
                     const std::function<double(M&)>& run, std::mt19937_64& rng, double tol = 1e-6) {
    zero_grads(params);
    M dinput;
    run(dinput);
    const double h = 1e-6;
    for (auto* p : params) {
        for (int probe = 0; probe < 6; ++probe) {
            const auto idx = static_cast<Eigen::Index>(rng() % p->value.size());
            const double orig = p->value.data()[idx];
            p->value.data()[idx] = orig + h;
            const double lp = loss_only();
            p->value.data()[idx] = orig - h;
            const double lm = loss_only();
            p->value.data()[idx] = orig;
            const double fd = (lp - lm) / (2 * h);
            EXPECT_NEAR(p->grad.data()[idx], fd, tol * std::max(1.0, std::abs(fd))) << p->name;
        }
    }
    for (int probe = 0; probe < 10; ++probe) {
        const auto idx = static_cast<Eigen::Index>(rng() % input.size());
        const double orig = input.data()[idx];
        input.data()[idx] = orig + h;
        const double lp = loss_only();
        input.data()[idx] = orig - h;
        const double lm = loss_only();
        input.data()[idx] = orig;
        const double fd = (lp - lm) / (2 * h);
        EXPECT_NEAR(dinput.data()[idx], fd, tol * std::max(1.0, std::abs(fd))) << "input";
    }
}

TEST(Layers, LinearGradients) {
    std::mt19937_64 rng(1);
    Linear<double> layer("lin", 5, 4, rng);
    M x = random_mat(rng, 5, 7);
    const M w = random_mat(rng, 4, 7);
    ParamList<double> ps;
    layer.collect(ps);
    check_gradients(
        ps, x, [&] { return layer.forward(x).cwiseProduct(w).sum(); },
        [&](M& dx) {
            Linear<double>::Cache c;
            const double l = layer.forward(x, c).cwiseProduct(w).sum();
            dx = layer.backward(c, w);
            return l;
        },
        rng);
}

TEST(Layers, ConvGradientsAndLeakyRelu) {
    std::mt19937_64 rng(2);
    Conv1d<double> conv("conv", 3, 4, 3, rng);
    const int steps = 6, batch = 2;
    M x = random_mat(rng, 3, steps * batch);
    const M w = random_mat(rng, 4, steps * batch);
    ParamList<double> ps;
    conv.collect(ps);
    auto fwd = [&](Conv1d<double>::Cache* c) {
        SeqBatch<double> in(x, steps, batch);
        return c ? conv.forward(in, *c) : conv.forward(in);
    };
    check_gradients(
        ps, x, [&] { return leaky_relu<double>(fwd(nullptr).data).cwiseProduct(w).sum(); },
        [&](M& dx) {
            Conv1d<double>::Cache c;
            const M pre = fwd(&c).data;
            const double l = leaky_relu<double>(pre).cwiseProduct(w).sum();
            dx = conv.backward(c, leaky_relu_backward<double>(pre, w)).data;
            return l;
        },
        rng);
}

TEST(Layers, ConvIsPerItemIndependent) {
    std::mt19937_64 rng(3);
    Conv1d<double> conv("conv", 2, 3, 5, rng);
    const int steps = 8;
    const M a = random_mat(rng, 2, steps), b = random_mat(rng, 2, steps);
    M both(2, steps * 2);
    for (int t = 0; t < steps; ++t) {
        both.col(2 * t) = a.col(t);
        both.col(2 * t + 1) = b.col(t);
    }
    const M ya = conv.forward(SeqBatch<double>(a, steps, 1)).data;
    const M yab = conv.forward(SeqBatch<double>(both, steps, 2)).data;
    for (int t = 0; t < steps; ++t) EXPECT_LT((yab.col(2 * t) - ya.col(t)).norm(), 1e-12);
}

class GruGradients : public ::testing::TestWithParam<bool> {};

TEST_P(GruGradients, MatchFiniteDifferences) {
    std::mt19937_64 rng(4);
    Gru<double> gru("gru", 3, 5, GetParam(), rng);
    const int steps = 5, batch = 3;
    M x = random_mat(rng, 3, steps * batch);
    const M w = random_mat(rng, 5, steps * batch);
    ParamList<double> ps;
    gru.collect(ps);
    check_gradients(
        ps, x, [&] { return gru.forward(SeqBatch<double>(x, steps, batch)).data.cwiseProduct(w).sum(); },
        [&](M& dx) {
            Gru<double>::Cache c;
            const double l = gru.forward(SeqBatch<double>(x, steps, batch), c).data.cwiseProduct(w).sum();
            dx = gru.backward(c, w).data;
            return l;
        },
        rng);
}

INSTANTIATE_TEST_SUITE_P(Directions, GruGradients, ::testing::Values(false, true));

TEST(Layers, BiGruGradients) {
    std::mt19937_64 rng(5);
    BiGru<double> gru("bi", 4, 3, rng);
    const int steps = 4, batch = 2;
    M x = random_mat(rng, 4, steps * batch);
    const M w = random_mat(rng, 6, steps * batch);
    ParamList<double> ps;
    gru.collect(ps);
    check_gradients(
        ps, x, [&] { return gru.forward(SeqBatch<double>(x, steps, batch)).data.cwiseProduct(w).sum(); },
        [&](M& dx) {
            BiGru<double>::Cache c;
            const double l = gru.forward(SeqBatch<double>(x, steps, batch), c).data.cwiseProduct(w).sum();
            dx = gru.backward(c, w).data;
            return l;
        },
        rng);
}

TEST(Layers, ReverseGruSeesFutureOnly) {
    std::mt19937_64 rng(6);
    Gru<double> gru("gru", 2, 3, true, rng);
    M x = random_mat(rng, 2, 6);
    const M y0 = gru.forward(SeqBatch<double>(x, 6, 1)).data;
    x(0, 0) += 1.0; // perturb step 0: only output step 0 may change
    const M y1 = gru.forward(SeqBatch<double>(x, 6, 1)).data;
    EXPECT_GT((y0.col(0) - y1.col(0)).norm(), 0.0);
    EXPECT_EQ((y0.rightCols(5) - y1.rightCols(5)).norm(), 0.0);
}

TEST(Layers, EmbeddingScatterGradient) {
    std::mt19937_64 rng(7);
    Embedding<double> emb("emb", 5, 3, rng);
    const std::vector<int> idx{1, 4, 1, 0};
    const M w = random_mat(rng, 3, 4);
    ParamList<double> ps;
    emb.collect(ps);
    zero_grads(ps);
    emb.backward(idx, w);
    EXPECT_TRUE(ps[0]->grad.col(1).isApprox(w.col(0) + w.col(2)));
    EXPECT_TRUE(ps[0]->grad.col(4).isApprox(w.col(1)));
    EXPECT_EQ(ps[0]->grad.col(2).norm(), 0.0);
    EXPECT_THROW(emb.forward({5}), Error);
}

TEST(Layers, FlattenRoundTrip) {
    std::mt19937_64 rng(8);
    const SeqBatch<double> x(random_mat(rng, 3, 4 * 5), 4, 5);
    const M flat = flatten_steps(x);
    EXPECT_EQ(flat.rows(), 12);
    EXPECT_EQ(flat(2 * 3 + 1, 4), x.data(1, 2 * 5 + 4));
    EXPECT_EQ(unflatten_steps<double>(flat, 3, 4).data, x.data);
}

TEST(Adam, MinimizesQuadratic) {
    Param<double> p = make_param<double>("p", 3, 1);
    p.value << 1.0, -2.0, 3.0;
    Adam<double> opt(AdamConfig{0.05});
    ParamList<double> ps{&p};
    for (int i = 0; i < 2000; ++i) {
        p.grad = 2.0 * p.value;
        opt.step(ps);
    }
    EXPECT_LT(p.value.norm(), 1e-3);
}

} // namespace
} // namespace sgt::nn
