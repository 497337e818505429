#pragma once

// Minimal layer library with explicit forward/backward passes.
//
// Sequence batches are stored as a single matrix of shape
// features x (steps * batch); column t * batch + b holds step t of item b.
// Layers are stateless at inference time: the training path records what
// backward() needs in a separate Cache object, so a const model can serve
// concurrent inference calls.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgt/error.hpp"

namespace sgt::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct SeqBatch {
    Mat<T> data;
    int steps = 0;
    int batch = 0;

    SeqBatch() = default;
    SeqBatch(Mat<T> d, int steps_, int batch_) : data(std::move(d)), steps(steps_), batch(batch_) {
        if (data.cols() != static_cast<Eigen::Index>(steps) * batch) {
            throw Error(ErrorCode::ShapeMismatch, "sequence batch column count mismatch");
        }
    }

    int features() const { return static_cast<int>(data.rows()); }
    auto step(int t) { return data.middleCols(static_cast<Eigen::Index>(t) * batch, batch); }
    auto step(int t) const { return data.middleCols(static_cast<Eigen::Index>(t) * batch, batch); }
};

template <class T>
struct Param {
    std::string name;
    Mat<T> value;
    Mat<T> grad;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <class T>
using ParamList = std::vector<Param<T>*>;

template <class T>
void zero_grads(const ParamList<T>& params) {
    for (auto* p : params) p->zero_grad();
}

template <class T, class Rng>
void init_uniform(Param<T>& p, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<T>(dist(rng));
}

template <class T>
Param<T> make_param(std::string name, Eigen::Index rows, Eigen::Index cols) {
    Param<T> p;
    p.name = std::move(name);
    p.value = Mat<T>::Zero(rows, cols);
    p.grad = Mat<T>::Zero(rows, cols);
    return p;
}

// ---------------------------------------------------------------------------
// Activations

inline constexpr double kLeakySlope = 0.2;

template <class T>
Mat<T> leaky_relu(const Mat<T>& x) {
    return x.unaryExpr([](T v) { return v > T(0) ? v : static_cast<T>(kLeakySlope) * v; });
}

template <class T>
Mat<T> leaky_relu_backward(const Mat<T>& pre, const Mat<T>& dy) {
    return dy.binaryExpr(pre, [](T g, T v) { return v > T(0) ? g : static_cast<T>(kLeakySlope) * g; });
}

template <class T>
Mat<T> sigmoid(const Mat<T>& x) {
    return x.unaryExpr([](T v) { return T(1) / (T(1) + std::exp(-v)); });
}

// ---------------------------------------------------------------------------

template <class T>
class Linear {
public:
    Linear() = default;
    template <class Rng>
    Linear(std::string name, int in, int out, Rng& rng)
        : w_(make_param<T>(name + ".weight", out, in)), b_(make_param<T>(name + ".bias", out, 1)) {
        const double bound = std::sqrt(6.0 / (in + out));
        init_uniform(w_, bound, rng);
    }

    struct Cache {
        Mat<T> x;
    };

    Mat<T> forward(const Mat<T>& x) const {
        if (x.rows() != w_.value.cols()) throw Error(ErrorCode::ShapeMismatch, w_.name + ": input width");
        Mat<T> y = w_.value * x;
        y.colwise() += b_.value.col(0);
        return y;
    }

    Mat<T> forward(const Mat<T>& x, Cache& cache) const {
        cache.x = x;
        return forward(x);
    }

    Mat<T> backward(const Cache& cache, const Mat<T>& dy) {
        w_.grad.noalias() += dy * cache.x.transpose();
        b_.grad += dy.rowwise().sum();
        return w_.value.transpose() * dy;
    }

    void collect(ParamList<T>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }

    int in_features() const { return static_cast<int>(w_.value.cols()); }
    int out_features() const { return static_cast<int>(w_.value.rows()); }

private:
    Param<T> w_;
    Param<T> b_;
};

// Temporal convolution with zero "same" padding and odd kernel size.
template <class T>
class Conv1d {
public:
    Conv1d() = default;
    template <class Rng>
    Conv1d(std::string name, int in, int out, int kernel, Rng& rng)
        : in_(in), kernel_(kernel), w_(make_param<T>(name + ".weight", out, in * kernel)),
          b_(make_param<T>(name + ".bias", out, 1)) {
        if (kernel % 2 == 0) throw Error(ErrorCode::InvalidArgument, "conv kernel must be odd");
        const double bound = std::sqrt(6.0 / (in * kernel + out));
        init_uniform(w_, bound, rng);
    }

    struct Cache {
        Mat<T> cols;
        int steps = 0;
        int batch = 0;
    };

    SeqBatch<T> forward(const SeqBatch<T>& x) const {
        Cache c;
        return forward(x, c);
    }

    SeqBatch<T> forward(const SeqBatch<T>& x, Cache& cache) const {
        if (x.features() != in_) throw Error(ErrorCode::ShapeMismatch, w_.name + ": input channels");
        cache.cols = im2col(x);
        cache.steps = x.steps;
        cache.batch = x.batch;
        Mat<T> y = w_.value * cache.cols;
        y.colwise() += b_.value.col(0);
        return SeqBatch<T>(std::move(y), x.steps, x.batch);
    }

    SeqBatch<T> backward(const Cache& cache, const Mat<T>& dy) {
        w_.grad.noalias() += dy * cache.cols.transpose();
        b_.grad += dy.rowwise().sum();
        const Mat<T> dcols = w_.value.transpose() * dy;
        SeqBatch<T> dx(Mat<T>::Zero(in_, dy.cols()), cache.steps, cache.batch);
        const int half = kernel_ / 2;
        for (int k = 0; k < kernel_; ++k) {
            const int shift = k - half;
            for (int t = 0; t < cache.steps; ++t) {
                const int src = t + shift;
                if (src < 0 || src >= cache.steps) continue;
                dx.step(src) += dcols.block(static_cast<Eigen::Index>(k) * in_,
                                            static_cast<Eigen::Index>(t) * cache.batch, in_, cache.batch);
            }
        }
        return dx;
    }

    void collect(ParamList<T>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }

    int out_channels() const { return static_cast<int>(w_.value.rows()); }

private:
    Mat<T> im2col(const SeqBatch<T>& x) const {
        Mat<T> cols = Mat<T>::Zero(static_cast<Eigen::Index>(in_) * kernel_, x.data.cols());
        const int half = kernel_ / 2;
        for (int k = 0; k < kernel_; ++k) {
            const int shift = k - half;
            for (int t = 0; t < x.steps; ++t) {
                const int src = t + shift;
                if (src < 0 || src >= x.steps) continue;
                cols.block(static_cast<Eigen::Index>(k) * in_, static_cast<Eigen::Index>(t) * x.batch, in_,
                           x.batch) = x.step(src);
            }
        }
        return cols;
    }

    int in_ = 0;
    int kernel_ = 1;
    Param<T> w_;
    Param<T> b_;
};

// Gated recurrent unit, gate order (reset, update, candidate):
//   r = sig(Wr x + Ur h + b), z = sig(Wz x + Uz h + b),
//   n = tanh(Wn x + bn + r * (Un h + bun)), h' = (1 - z) * n + z * h.
template <class T>
class Gru {
public:
    Gru() = default;
    template <class Rng>
    Gru(std::string name, int in, int hidden, bool reverse, Rng& rng)
        : hidden_(hidden), reverse_(reverse), wx_(make_param<T>(name + ".wx", 3 * hidden, in)),
          bx_(make_param<T>(name + ".bx", 3 * hidden, 1)), wh_(make_param<T>(name + ".wh", 3 * hidden, hidden)),
          bh_(make_param<T>(name + ".bh", 3 * hidden, 1)) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
        init_uniform(wx_, bound, rng);
        init_uniform(bx_, bound, rng);
        init_uniform(wh_, bound, rng);
        init_uniform(bh_, bound, rng);
    }

    struct Step {
        Mat<T> r, z, n, h_prev, hn;
    };
    struct Cache {
        Mat<T> x;
        std::vector<Step> steps;
        int batch = 0;
    };

    SeqBatch<T> forward(const SeqBatch<T>& x) const { return run(x, nullptr); }
    SeqBatch<T> forward(const SeqBatch<T>& x, Cache& cache) const { return run(x, &cache); }

    SeqBatch<T> backward(const Cache& cache, const Mat<T>& dy) {
        const int steps = static_cast<int>(cache.steps.size());
        const int batch = cache.batch;
        const int h = hidden_;
        Mat<T> dgx(3 * h, dy.cols());
        Mat<T> dh_next = Mat<T>::Zero(h, batch);
        Mat<T> dgh(3 * h, batch);
        for (int s = steps - 1; s >= 0; --s) {
            const int t = reverse_ ? steps - 1 - s : s;
            const Step& st = cache.steps[t];
            const Mat<T> dh = dy.middleCols(static_cast<Eigen::Index>(t) * batch, batch) + dh_next;
            const Mat<T> dn = dh.cwiseProduct((T(1) - st.z.array()).matrix());
            const Mat<T> dz = dh.cwiseProduct(st.h_prev - st.n);
            Mat<T> dh_prev = dh.cwiseProduct(st.z);
            const Mat<T> dn_pre = dn.cwiseProduct((T(1) - st.n.array().square()).matrix());
            const Mat<T> dr = dn_pre.cwiseProduct(st.hn);
            const Mat<T> dz_pre = dz.cwiseProduct((st.z.array() * (T(1) - st.z.array())).matrix());
            const Mat<T> dr_pre = dr.cwiseProduct((st.r.array() * (T(1) - st.r.array())).matrix());
            dgh.topRows(h) = dr_pre;
            dgh.middleRows(h, h) = dz_pre;
            dgh.bottomRows(h) = dn_pre.cwiseProduct(st.r);
            auto gx = dgx.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
            gx.topRows(h) = dr_pre;
            gx.middleRows(h, h) = dz_pre;
            gx.bottomRows(h) = dn_pre;
            wh_.grad.noalias() += dgh * st.h_prev.transpose();
            bh_.grad += dgh.rowwise().sum();
            dh_prev.noalias() += wh_.value.transpose() * dgh;
            dh_next = std::move(dh_prev);
        }
        wx_.grad.noalias() += dgx * cache.x.transpose();
        bx_.grad += dgx.rowwise().sum();
        return SeqBatch<T>(wx_.value.transpose() * dgx, steps, batch);
    }

    void collect(ParamList<T>& out) {
        out.push_back(&wx_);
        out.push_back(&bx_);
        out.push_back(&wh_);
        out.push_back(&bh_);
    }

    int hidden() const { return hidden_; }

private:
    SeqBatch<T> run(const SeqBatch<T>& x, Cache* cache) const {
        if (x.features() != wx_.value.cols()) throw Error(ErrorCode::ShapeMismatch, wx_.name + ": input width");
        const int h = hidden_;
        const int batch = x.batch;
        Mat<T> gx = wx_.value * x.data;
        gx.colwise() += bx_.value.col(0);
        Mat<T> out(h, x.data.cols());
        Mat<T> state = Mat<T>::Zero(h, batch);
        if (cache) {
            cache->x = x.data;
            cache->steps.assign(x.steps, Step{});
            cache->batch = batch;
        }
        for (int s = 0; s < x.steps; ++s) {
            const int t = reverse_ ? x.steps - 1 - s : s;
            Mat<T> gh = wh_.value * state;
            gh.colwise() += bh_.value.col(0);
            const auto g = gx.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
            Mat<T> r = sigmoid<T>(g.topRows(h) + gh.topRows(h));
            Mat<T> z = sigmoid<T>(g.middleRows(h, h) + gh.middleRows(h, h));
            Mat<T> hn = gh.bottomRows(h);
            Mat<T> n = (g.bottomRows(h) + r.cwiseProduct(hn)).array().tanh().matrix();
            Mat<T> next = (T(1) - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(state);
            out.middleCols(static_cast<Eigen::Index>(t) * batch, batch) = next;
            if (cache) {
                cache->steps[t] = Step{std::move(r), std::move(z), std::move(n), std::move(state), std::move(hn)};
            }
            state = std::move(next);
        }
        return SeqBatch<T>(std::move(out), x.steps, batch);
    }

    int hidden_ = 0;
    bool reverse_ = false;
    Param<T> wx_, bx_, wh_, bh_;
};

// Forward and backward GRUs with concatenated outputs (2 * hidden rows).
template <class T>
class BiGru {
public:
    BiGru() = default;
    template <class Rng>
    BiGru(const std::string& name, int in, int hidden, Rng& rng)
        : fwd_(name + ".fwd", in, hidden, false, rng), bwd_(name + ".bwd", in, hidden, true, rng) {}

    struct Cache {
        typename Gru<T>::Cache fwd, bwd;
    };

    SeqBatch<T> forward(const SeqBatch<T>& x) const { return join(fwd_.forward(x), bwd_.forward(x)); }
    SeqBatch<T> forward(const SeqBatch<T>& x, Cache& c) const {
        return join(fwd_.forward(x, c.fwd), bwd_.forward(x, c.bwd));
    }

    SeqBatch<T> backward(const Cache& c, const Mat<T>& dy) {
        const int h = fwd_.hidden();
        SeqBatch<T> dx = fwd_.backward(c.fwd, dy.topRows(h));
        dx.data += bwd_.backward(c.bwd, dy.bottomRows(h)).data;
        return dx;
    }

    void collect(ParamList<T>& out) {
        fwd_.collect(out);
        bwd_.collect(out);
    }

    int out_features() const { return 2 * fwd_.hidden(); }

private:
    static SeqBatch<T> join(const SeqBatch<T>& a, const SeqBatch<T>& b) {
        Mat<T> out(a.data.rows() + b.data.rows(), a.data.cols());
        out << a.data, b.data;
        return SeqBatch<T>(std::move(out), a.steps, a.batch);
    }

    Gru<T> fwd_, bwd_;
};

template <class T>
class Embedding {
public:
    Embedding() = default;
    template <class Rng>
    Embedding(std::string name, int vocab, int dim, Rng& rng) : table_(make_param<T>(name + ".table", dim, vocab)) {
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
        for (Eigen::Index i = 0; i < table_.value.size(); ++i) {
            table_.value.data()[i] = static_cast<T>(dist(rng));
        }
    }

    Mat<T> forward(const std::vector<int>& indices) const {
        Mat<T> out(table_.value.rows(), static_cast<Eigen::Index>(indices.size()));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const int idx = indices[i];
            if (idx < 0 || idx >= table_.value.cols()) throw Error(ErrorCode::ShapeMismatch, "embedding index");
            out.col(static_cast<Eigen::Index>(i)) = table_.value.col(idx);
        }
        return out;
    }

    void backward(const std::vector<int>& indices, const Mat<T>& dy) {
        for (std::size_t i = 0; i < indices.size(); ++i) {
            table_.grad.col(indices[i]) += dy.col(static_cast<Eigen::Index>(i));
        }
    }

    void collect(ParamList<T>& out) { out.push_back(&table_); }
    int vocab() const { return static_cast<int>(table_.value.cols()); }

private:
    Param<T> table_;
};

// ---------------------------------------------------------------------------
// Reshaping helpers

// (C x T*B) -> (C*T x B); row t*C + c of column b is channel c at step t.
template <class T>
Mat<T> flatten_steps(const SeqBatch<T>& x) {
    const int c = x.features();
    Mat<T> out(static_cast<Eigen::Index>(c) * x.steps, x.batch);
    for (int t = 0; t < x.steps; ++t) out.middleRows(static_cast<Eigen::Index>(t) * c, c) = x.step(t);
    return out;
}

template <class T>
SeqBatch<T> unflatten_steps(const Mat<T>& x, int channels, int steps) {
    const auto batch = static_cast<int>(x.cols());
    SeqBatch<T> out(Mat<T>(channels, static_cast<Eigen::Index>(steps) * batch), steps, batch);
    for (int t = 0; t < steps; ++t) out.step(t) = x.middleRows(static_cast<Eigen::Index>(t) * channels, channels);
    return out;
}

template <class T>
Mat<T> mean_over_steps(const SeqBatch<T>& x) {
    Mat<T> out = Mat<T>::Zero(x.features(), x.batch);
    for (int t = 0; t < x.steps; ++t) out += x.step(t);
    return out / static_cast<T>(x.steps);
}

template <class T>
Mat<T> mean_over_steps_backward(const Mat<T>& dy, int steps) {
    Mat<T> out(dy.rows(), dy.cols() * steps);
    const T scale = T(1) / static_cast<T>(steps);
    for (int t = 0; t < steps; ++t) out.middleCols(static_cast<Eigen::Index>(t) * dy.cols(), dy.cols()) = dy * scale;
    return out;
}

// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const ParamList<T>& params) {
        if (m_.empty()) {
            for (auto* p : params) {
                m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
                v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
            }
        }
        if (m_.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "optimizer parameter count changed");
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
        const T lr = static_cast<T>(cfg_.learning_rate * std::sqrt(c2) / c1);
        const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
        const T eps = static_cast<T>(cfg_.eps * std::sqrt(c2));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& g = params[i]->grad;
            m_[i] = b1 * m_[i] + (T(1) - b1) * g;
            v_[i] = b2 * v_[i] + (T(1) - b2) * g.cwiseAbs2();
            params[i]->value.array() -= lr * m_[i].array() / (v_[i].array().sqrt() + eps);
        }
    }

    long steps() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<Mat<T>> m_, v_;
    long t_ = 0;
};

template <class T>
double grad_norm(const ParamList<T>& params) {
    double s = 0.0;
    for (auto* p : params) s += static_cast<double>(p->grad.squaredNorm());
    return std::sqrt(s);
}

template <class T>
void scale_grads(const ParamList<T>& params, double factor) {
    for (auto* p : params) p->grad *= static_cast<T>(factor);
}

} // namespace sgt::nn
