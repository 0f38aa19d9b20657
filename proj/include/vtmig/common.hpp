#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vtmig {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Configuration file / schema faults. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

// splitmix64 finalizer; used to fan a master seed out into independent
// streams so that adding consumers never perturbs existing ones.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive a child stream seed from (base, tag, index). Counter-based: the
/// result depends only on the arguments, not on derivation order.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                           std::uint64_t index = 0) {
    return splitmix64(base ^ fnv1a64(tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

/// Deterministic RNG. Distribution transforms are implemented here rather
/// than with std:: distributions so that sampled streams are identical
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        if (hi <= lo) return lo;
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // avoid log(0)
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with given rate.
    double exponential(double rate) {
        double u = uniform();
        if (u <= 0.0) u = 0x1.0p-53;
        return -std::log(u) / rate;
    }

    /// k distinct indices from [0, n), in increasing order (selection sampling).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> out;
        out.reserve(k);
        std::size_t remaining = n, needed = k;
        for (std::size_t i = 0; i < n && needed > 0; ++i) {
            if (uniform() * static_cast<double>(remaining) < static_cast<double>(needed)) {
                out.push_back(i);
                --needed;
            }
            --remaining;
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

inline double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }
inline double clamp01(double x) { return clamp(x, 0.0, 1.0); }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Per-feature running mean/variance (Welford), used to standardize node
/// features whose raw scales differ by orders of magnitude.
class RunningNorm {
public:
    RunningNorm() = default;
    explicit RunningNorm(std::size_t dims)
        : count_(0), mean_(Vec::Zero(static_cast<Eigen::Index>(dims))),
          m2_(Vec::Zero(static_cast<Eigen::Index>(dims))) {}

    void observe(const Eigen::Ref<const Vec>& x) {
        ++count_;
        for (Eigen::Index i = 0; i < mean_.size(); ++i) {
            const double d = x[i] - mean_[i];
            mean_[i] += d / static_cast<double>(count_);
            m2_[i] += d * (x[i] - mean_[i]);
        }
    }

    void observe_rows(const Mat& rows) {
        for (Eigen::Index r = 0; r < rows.rows(); ++r) observe(rows.row(r).transpose());
    }

    Vec normalize(const Eigen::Ref<const Vec>& x) const {
        Vec out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = (x[i] - mean()[i]) / stddev(i);
        return out;
    }

    Mat normalize_rows(const Mat& rows) const {
        Mat out(rows.rows(), rows.cols());
        for (Eigen::Index r = 0; r < rows.rows(); ++r)
            out.row(r) = normalize(rows.row(r).transpose()).transpose();
        return out;
    }

    const Vec& mean() const { return mean_; }
    double stddev(Eigen::Index i) const {
        if (count_ < 2) return 1.0;
        const double var = m2_[i] / static_cast<double>(count_ - 1);
        return var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    std::size_t count() const { return count_; }

private:
    std::size_t count_ = 0;
    Vec mean_;
    Vec m2_;
};

/// Exponentially weighted moving average with fixed smoothing factor.
class Ewma {
public:
    explicit Ewma(double alpha = 0.1, double init = 0.0) : alpha_(alpha), value_(init) {}
    void observe(double x) { value_ += alpha_ * (x - value_); }
    double value() const { return value_; }
    void reset(double v) { value_ = v; }

private:
    double alpha_;
    double value_;
};

}  // namespace vtmig
