#pragma once

#include <stdexcept>
#include <vector>

#include "vtmig/graph.hpp"

namespace vtmig {

enum class Activation { ReLU, Identity };

struct GcnLayer {
    Mat weight;  // in_dim x out_dim
    Activation activation = Activation::ReLU;
};

/// Symmetric-normalized propagation operator S = D^-1/2 (A+I) D^-1/2.
inline Mat normalized_adjacency(const Mat& adjacency) {
    const Eigen::Index n = adjacency.rows();
    Mat a_hat = adjacency + Mat::Identity(n, n);
    Vec dinv(n);
    for (Eigen::Index i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(a_hat.row(i).sum());
    return dinv.asDiagonal() * a_hat * dinv.asDiagonal();
}

/// Cached intermediates of one forward pass, needed for gradients.
struct GcnForwardCache {
    Mat s;                      // normalized operator
    std::vector<Mat> inputs;    // H^(l) per layer
    std::vector<Mat> pre_act;   // S H W per layer
    Mat output;
    bool valid = false;
};

/// Stack of graph-convolution layers implementing
/// H^(l+1) = sigma(D^-1/2 (A+I) D^-1/2 H^(l) W^(l)).
class Gcn {
public:
    Gcn() = default;

    /// Layer dims [in, h1, ..., out]; hidden layers ReLU, final layer Identity.
    Gcn(const std::vector<int>& dims, Rng& rng) {
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            GcnLayer layer;
            layer.weight = Mat(dims[l], dims[l + 1]);
            const double scale = std::sqrt(2.0 / (dims[l] + dims[l + 1]));
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                    layer.weight(r, c) = rng.normal(0.0, scale);
            layer.activation =
                l + 2 < dims.size() ? Activation::ReLU : Activation::Identity;
            layers_.push_back(std::move(layer));
        }
    }

    explicit Gcn(std::vector<GcnLayer> layers) : layers_(std::move(layers)) {}

    const std::vector<GcnLayer>& layers() const { return layers_; }
    std::vector<GcnLayer>& layers() { return layers_; }

    GcnForwardCache forward(const Mat& features, const NetworkGraph& g) const {
        return forward_sn(features, normalized_adjacency(g.adjacency));
    }

    /// Forward with a precomputed normalized operator (reused across layers).
    GcnForwardCache forward_sn(const Mat& features, const Mat& s) const {
        if (features.rows() != s.rows())
            throw std::invalid_argument("gcn forward: feature rows must equal node count");
        GcnForwardCache cache;
        cache.s = s;
        Mat h = features;
        for (const auto& layer : layers_) {
            if (h.cols() != layer.weight.rows())
                throw std::invalid_argument("gcn forward: dimension chain mismatch");
            cache.inputs.push_back(h);
            Mat pre = s * h * layer.weight;
            cache.pre_act.push_back(pre);
            h = layer.activation == Activation::ReLU ? pre.cwiseMax(0.0) : pre;
        }
        cache.output = h;
        cache.valid = true;
        return cache;
    }

    /// Reverse-mode gradients of a scalar loss w.r.t. each layer weight given
    /// dLoss/dOutput. Also returns dLoss/dInput features.
    struct Gradients {
        std::vector<Mat> weights;
        Mat input;
    };

    Gradients gradients(const GcnForwardCache& cache, const Mat& upstream) const {
        if (!cache.valid) throw std::logic_error("gcn gradients: missing forward cache");
        if (upstream.rows() != cache.output.rows() || upstream.cols() != cache.output.cols())
            throw std::invalid_argument("gcn gradients: upstream shape mismatch");
        Gradients g;
        g.weights.resize(layers_.size());
        Mat grad = upstream;
        for (std::size_t li = layers_.size(); li-- > 0;) {
            const auto& layer = layers_[li];
            Mat d_pre = grad;
            if (layer.activation == Activation::ReLU)
                d_pre = (cache.pre_act[li].array() > 0.0).cast<double>().matrix().cwiseProduct(grad);
            // pre = S H W  =>  dW = (S H)^T dPre,  dH = S^T dPre W^T (S symmetric)
            g.weights[li] = (cache.s * cache.inputs[li]).transpose() * d_pre;
            grad = cache.s.transpose() * d_pre * layer.weight.transpose();
        }
        g.input = grad;
        return g;
    }

    /// Flattened parameter access, used by soft updates and checkpoints.
    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size());
        return n;
    }

private:
    std::vector<GcnLayer> layers_;
};

}  // namespace vtmig
