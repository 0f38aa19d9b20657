#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vtmig/common.hpp"

namespace vtmig {

/// One MDP transition. Graph inputs are stored raw so the GCN can be
/// re-evaluated with current weights during updates.
struct Experience {
    Mat features;                          // node features at s
    std::vector<std::uint8_t> adjacency;   // row-major 0/1 matrix at s
    Vec global;                            // global state vector at s
    std::vector<Vec> locals;               // per-agent local observations at s
    Vec action;                            // joint action
    Vec reward;                            // 5 raw objective components
    Mat next_features;
    std::vector<std::uint8_t> next_adjacency;
    Vec next_global;
    std::vector<Vec> next_locals;
    bool terminal = false;
};

inline std::vector<std::uint8_t> pack_adjacency(const Mat& a) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(a.size()));
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out[static_cast<std::size_t>(r * a.cols() + c)] = a(r, c) != 0.0 ? 1 : 0;
    return out;
}

inline Mat unpack_adjacency(const std::vector<std::uint8_t>& packed, Eigen::Index n) {
    Mat a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            a(r, c) = packed[static_cast<std::size_t>(r * n + c)];
    return a;
}

/// Fixed-capacity ring buffer with uniform without-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void add(Experience e) {
        if (store_.size() < capacity_) {
            store_.push_back(std::move(e));
        } else {
            store_[cursor_] = std::move(e);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& operator[](std::size_t i) const { return store_[i]; }

    /// Indices of a uniform batch; all distinct within the batch.
    std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const {
        if (batch > store_.size())
            throw std::invalid_argument("replay sample: batch exceeds buffer size");
        return rng.sample_indices(store_.size(), batch);
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Experience> store_;
};

}  // namespace vtmig
