#pragma once

#include <stdexcept>
#include <vector>

#include "vtmig/common.hpp"

namespace vtmig {

enum class Act { ReLU, Tanh, Sigmoid, Identity };

inline Mat apply_act(const Mat& pre, Act a) {
    switch (a) {
        case Act::ReLU: return pre.cwiseMax(0.0);
        case Act::Tanh: return pre.array().tanh().matrix();
        case Act::Sigmoid: return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
        case Act::Identity: return pre;
    }
    return pre;
}

inline Mat act_grad(const Mat& pre, Act a) {
    switch (a) {
        case Act::ReLU: return (pre.array() > 0.0).cast<double>().matrix();
        case Act::Tanh: {
            Mat t = pre.array().tanh().matrix();
            return (1.0 - t.array().square()).matrix();
        }
        case Act::Sigmoid: {
            Mat s = (1.0 / (1.0 + (-pre.array()).exp())).matrix();
            return (s.array() * (1.0 - s.array())).matrix();
        }
        case Act::Identity: return Mat::Ones(pre.rows(), pre.cols());
    }
    return Mat::Ones(pre.rows(), pre.cols());
}

struct DenseLayer {
    Mat w;  // in x out
    Vec b;  // out
    Act act = Act::Identity;
};

/// Dense feed-forward approximator. Rows of the input are batch samples.
class Mlp {
public:
    Mlp() = default;

    Mlp(const std::vector<int>& dims, const std::vector<Act>& acts, Rng& rng) {
        if (acts.size() + 1 != dims.size())
            throw std::invalid_argument("mlp: need one activation per layer");
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            DenseLayer layer;
            layer.w = Mat(dims[l], dims[l + 1]);
            const double scale = std::sqrt(2.0 / (dims[l] + dims[l + 1]));
            for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
                    layer.w(r, c) = rng.normal(0.0, scale);
            layer.b = Vec::Zero(dims[l + 1]);
            layer.act = acts[l];
            layers_.push_back(std::move(layer));
        }
    }

    struct Cache {
        std::vector<Mat> inputs;   // layer inputs
        std::vector<Mat> pre;      // pre-activations
        Mat out;
        bool valid = false;
    };

    Cache forward(const Mat& x) const {
        Cache c;
        Mat h = x;
        for (const auto& layer : layers_) {
            if (h.cols() != layer.w.rows())
                throw std::invalid_argument("mlp forward: input dimension mismatch");
            c.inputs.push_back(h);
            Mat pre = h * layer.w;
            pre.rowwise() += layer.b.transpose();
            c.pre.push_back(pre);
            h = apply_act(pre, layer.act);
        }
        c.out = h;
        c.valid = true;
        return c;
    }

    struct Grads {
        std::vector<Mat> w;
        std::vector<Vec> b;
        Mat input;  // dLoss/dX

        Grads& operator+=(const Grads& o) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] += o.w[i];
                b[i] += o.b[i];
            }
            return *this;
        }
    };

    Grads zero_grads() const {
        Grads g;
        for (const auto& l : layers_) {
            g.w.push_back(Mat::Zero(l.w.rows(), l.w.cols()));
            g.b.push_back(Vec::Zero(l.b.size()));
        }
        return g;
    }

    /// Reverse-mode gradients for dLoss/dOutput of the cached forward pass.
    Grads backward(const Cache& cache, const Mat& dout) const {
        if (!cache.valid) throw std::logic_error("mlp backward: stale forward cache");
        if (dout.rows() != cache.out.rows() || dout.cols() != cache.out.cols())
            throw std::invalid_argument("mlp backward: gradient shape mismatch");
        Grads g;
        g.w.resize(layers_.size());
        g.b.resize(layers_.size());
        Mat grad = dout;
        for (std::size_t li = layers_.size(); li-- > 0;) {
            const auto& layer = layers_[li];
            const Mat d_pre = act_grad(cache.pre[li], layer.act).cwiseProduct(grad);
            g.w[li] = cache.inputs[li].transpose() * d_pre;
            g.b[li] = d_pre.colwise().sum().transpose();
            grad = d_pre * layer.w.transpose();
        }
        g.input = grad;
        return g;
    }

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    int input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().w.rows()); }
    int output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().w.cols()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.w.size() + l.b.size());
        return n;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(parameter_count());
        for (const auto& l : layers_) {
            out.insert(out.end(), l.w.data(), l.w.data() + l.w.size());
            out.insert(out.end(), l.b.data(), l.b.data() + l.b.size());
        }
        return out;
    }

    void unflatten(const std::vector<double>& p) {
        std::size_t k = 0;
        for (auto& l : layers_) {
            if (k + static_cast<std::size_t>(l.w.size() + l.b.size()) > p.size())
                throw std::invalid_argument("mlp unflatten: parameter blob too short");
            std::copy(p.begin() + static_cast<long>(k),
                      p.begin() + static_cast<long>(k + l.w.size()), l.w.data());
            k += static_cast<std::size_t>(l.w.size());
            std::copy(p.begin() + static_cast<long>(k),
                      p.begin() + static_cast<long>(k + l.b.size()), l.b.data());
            k += static_cast<std::size_t>(l.b.size());
        }
        if (k != p.size()) throw std::invalid_argument("mlp unflatten: parameter blob too long");
    }

private:
    std::vector<DenseLayer> layers_;
};

/// target <- tau * online + (1 - tau) * target
inline void soft_update(const Mlp& online, Mlp& target, double tau) {
    if (online.layers().size() != target.layers().size())
        throw std::invalid_argument("soft_update: architecture mismatch");
    for (std::size_t i = 0; i < online.layers().size(); ++i) {
        const auto& src = online.layers()[i];
        auto& dst = target.layers()[i];
        if (src.w.rows() != dst.w.rows() || src.w.cols() != dst.w.cols())
            throw std::invalid_argument("soft_update: shape mismatch");
        dst.w = tau * src.w + (1.0 - tau) * dst.w;
        dst.b = tau * src.b + (1.0 - tau) * dst.b;
    }
}

/// Adam over one Mlp's parameters.
class Adam {
public:
    Adam() = default;
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(Mlp& net, const Mlp::Grads& g) {
        auto& layers = net.layers();
        if (mw_.empty()) {
            for (const auto& l : layers) {
                mw_.push_back(Mat::Zero(l.w.rows(), l.w.cols()));
                vw_.push_back(Mat::Zero(l.w.rows(), l.w.cols()));
                mb_.push_back(Vec::Zero(l.b.size()));
                vb_.push_back(Vec::Zero(l.b.size()));
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < layers.size(); ++i) {
            mw_[i] = beta1_ * mw_[i] + (1.0 - beta1_) * g.w[i];
            vw_[i] = beta2_ * vw_[i] + (1.0 - beta2_) * g.w[i].cwiseProduct(g.w[i]);
            layers[i].w -=
                (lr_ * (mw_[i] / bc1).array() / ((vw_[i] / bc2).array().sqrt() + eps_)).matrix();
            mb_[i] = beta1_ * mb_[i] + (1.0 - beta1_) * g.b[i];
            vb_[i] = beta2_ * vb_[i] + (1.0 - beta2_) * g.b[i].cwiseProduct(g.b[i]);
            layers[i].b -=
                (lr_ * (mb_[i] / bc1).array() / ((vb_[i] / bc2).array().sqrt() + eps_)).matrix();
        }
    }

    double learning_rate() const { return lr_; }

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<Mat> mw_, vw_;
    std::vector<Vec> mb_, vb_;
};

}  // namespace vtmig
