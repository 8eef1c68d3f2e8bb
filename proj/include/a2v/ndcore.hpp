#pragma once

// Dense numeric primitives shared by every learning module: a row-major
// double matrix, activations, the squared-error loss, a seeded PRNG and a
// central-difference gradient oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "a2v/error.hpp"

namespace a2v {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw usage_error("matrix data length " + std::to_string(data_.size()) +
                              " does not match shape " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    }
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw usage_error("ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix row_vector(std::span<const double> v) {
        return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
    }
    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }
    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    Matrix& operator+=(const Matrix& o) {
        check_same(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    void check_same(const Matrix& o, const char* op) const {
        if (!same_shape(o))
            throw usage_error(std::string("shape mismatch in ") + op + ": " + shape() +
                              " vs " + o.shape());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw usage_error("matmul dimension mismatch: " + a.shape() + " x " + b.shape());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

inline Matrix sigmoid(Matrix x) {
    for (double& v : x.values()) v = sigmoid(v);
    return x;
}

inline Matrix tanh(Matrix x) {
    for (double& v : x.values()) v = std::tanh(v);
    return x;
}

// In-place, max-subtracted softmax over one row.
inline void softmax_inplace(std::span<double> v) {
    if (v.empty()) throw usage_error("softmax of an empty row");
    const double mx = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        total += x;
    }
    for (double& x : v) x /= total;
}

inline Matrix softmax(const Matrix& row) {
    if (row.rows() != 1) throw usage_error("softmax expects a row vector, got " + row.shape());
    Matrix out = row;
    softmax_inplace(out.values());
    return out;
}

struct LossAndGrad {
    double loss = 0.0;
    Matrix grad;
};

// Sum of squared differences and its gradient with respect to `pred`.
inline LossAndGrad mse_loss(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target))
        throw usage_error("mse_loss shape mismatch: " + pred.shape() + " vs " + target.shape());
    LossAndGrad out{0.0, Matrix(pred.rows(), pred.cols())};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        out.loss += d * d;
        out.grad[i] = 2.0 * d;
    }
    return out;
}

// Central differences (f(x+eps*e_i) - f(x-eps*e_i)) / (x_i+ - x_i-) per entry.
// f may return double or an extended type; the difference is formed in
// that type before rounding to double.
template <class F>
Matrix finite_diff_grad(F&& f, Matrix x, double eps = 1e-5) {
    if (!(eps > 0.0)) throw usage_error("finite_diff_grad requires eps > 0");
    using R = std::decay_t<decltype(f(x))>;
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        const double hi = orig + eps, lo = orig - eps;
        x[i] = hi;
        const R up = f(std::as_const(x));
        x[i] = lo;
        const R down = f(std::as_const(x));
        x[i] = orig;
        using std::isfinite;
        if (!isfinite(up) || !isfinite(down))
            throw numeric_error("non-finite function value at entry " + std::to_string(i));
        g[i] = static_cast<double>((up - down) / (static_cast<R>(hi) - static_cast<R>(lo)));
    }
    return g;
}

// Relative error |a-n| / max(|a|, |n|, 1e-8), the metric used by every gradient check.
inline double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

inline double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
    if (!analytic.same_shape(numeric))
        throw usage_error("gradient shape mismatch: " + analytic.shape() + " vs " + numeric.shape());
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, relative_error(analytic[i], numeric[i]));
    return worst;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** seeded through SplitMix64. Only integer arithmetic is used to
// produce raw draws, so a seed yields the same sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t seed() const noexcept { return seed_; }

    // Independent stream keyed by (seed, stream); used for per-tree and per-epoch generators.
    Rng derive(std::uint64_t stream) const {
        std::uint64_t sm = seed_ ^ (0xd1b54a32d192ed03ULL * (stream + 1));
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection, free of modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw usage_error("Rng::below(0)");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do x = next_u64();
        while (x >= limit);
        return x % n;
    }

    // Standard normal via the Marsaglia polar method; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_;
    std::uint64_t s_[4]{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev) {
    if (stddev < 0.0) throw usage_error("gaussian requires std >= 0");
    Matrix m(rows, cols, mean);
    if (stddev == 0.0) return m;
    for (double& v : m.values()) v = mean + stddev * rng.normal();
    return m;
}

inline Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace a2v
