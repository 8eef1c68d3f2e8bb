#pragma once

// Denoising training loop for the sequence autoencoder: Gaussian input
// corruption against a clean target, L1-penalized objective, Adam updates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "a2v/ndcore.hpp"
#include "a2v/seqmodel.hpp"
#include "a2v/window.hpp"

namespace a2v {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Seq2SeqModel m;  // first moments, model-shaped
    Seq2SeqModel v;  // second moments
    std::uint64_t t = 0;
    AdamConfig hyper;

    static AdamState for_model(const Seq2SeqModel& model, AdamConfig hyper = {}) {
        return {model.zeros_like(), model.zeros_like(), 0, hyper};
    }
};

// One Adam update of a single block; `t` is the already-incremented step count.
inline void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, std::uint64_t t,
                        const AdamConfig& h) {
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        param[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
}

inline void adam_step(Seq2SeqModel& params, const Seq2SeqModel& grads, AdamState& state) {
    std::vector<std::pair<std::string, const Matrix*>> g;
    Seq2SeqModel::visit(grads, [&](const std::string& n, const Matrix& b) { g.emplace_back(n, &b); });
    for (const auto& [name, block] : g)
        if (!all_finite(block->values()))
            throw numeric_error("non-finite gradient in parameter block " + name);

    std::vector<Matrix*> ms, vs;
    Seq2SeqModel::visit(state.m, [&](const std::string&, Matrix& b) { ms.push_back(&b); });
    Seq2SeqModel::visit(state.v, [&](const std::string&, Matrix& b) { vs.push_back(&b); });

    ++state.t;
    std::size_t i = 0;
    Seq2SeqModel::visit(params, [&](const std::string& name, Matrix& p) {
        if (!p.same_shape(*g[i].second) || !p.same_shape(*ms[i]))
            throw usage_error("adam_step shape mismatch in block " + name);
        adam_update(p, *g[i].second, *ms[i], *vs[i], state.t, state.hyper);
        ++i;
    });
}

// s + N(0, sigma^2) elementwise.
inline Matrix corrupt(const Matrix& s, double sigma, Rng& rng) {
    if (sigma < 0.0) throw usage_error("noise std must be >= 0");
    if (sigma == 0.0) return s;
    return s + gaussian(rng, s.rows(), s.cols(), 0.0, sigma);
}

enum class BatchMode { per_window, full_batch };

inline std::string to_string(BatchMode b) {
    return b == BatchMode::per_window ? "per-window" : "full-batch";
}
inline BatchMode parse_batch_mode(std::string_view s) {
    if (s == "per-window") return BatchMode::per_window;
    if (s == "full-batch") return BatchMode::full_batch;
    throw usage_error("unknown batch mode '" + std::string(s) + "'");
}

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t embedding_dim = 128;
    double noise_std = 0.05;
    double l1_lambda = 1e-4;
    L1Target l1_target = L1Target::activation;
    AdamConfig adam;
    std::uint64_t seed = 0;
    BatchMode batch = BatchMode::per_window;
    std::size_t checkpoint_every = 0;  // 0 disables checkpoints
    DecoderMode mode = DecoderMode::paper_literal;
    OutputActivation output = OutputActivation::linear;

    void validate() const {
        if (epochs < 1) throw usage_error("epochs must be >= 1");
        if (noise_std < 0.0) throw usage_error("noise_std must be >= 0");
        if (l1_lambda < 0.0) throw usage_error("l1_lambda must be >= 0");
        if (!(adam.lr > 0.0)) throw usage_error("learning rate must be > 0");
    }
};

struct TrainResult {
    Seq2SeqModel model;
    std::vector<double> loss_history;  // mean penalized objective per epoch
};

using CheckpointFn = std::function<void(std::size_t epoch, const Seq2SeqModel&)>;

// Initial parameters drawn from the configuration seed; exposed so that
// untrained baselines share exactly the initialization train() starts from.
inline Seq2SeqModel initial_model(std::size_t input_dim, const TrainConfig& cfg) {
    Rng init = Rng(cfg.seed).derive(0);
    return Seq2SeqModel::random(input_dim, cfg.embedding_dim, cfg.mode, cfg.output, init);
}

inline TrainResult train(std::span<const SensorWindow> windows, const TrainConfig& cfg,
                         const CheckpointFn& on_checkpoint = {}) {
    cfg.validate();
    if (windows.empty()) throw data_error("cannot train on an empty dataset");
    const std::size_t D = windows.front().data.cols();
    for (const auto& w : windows) {
        if (w.data.cols() != D)
            throw data_error("window " + std::to_string(w.id) + " has " +
                             std::to_string(w.data.cols()) + " channels, expected " +
                             std::to_string(D));
        if (w.data.rows() == 0) throw data_error("window " + std::to_string(w.id) + " is empty");
    }

    const Rng master(cfg.seed);
    TrainResult out{initial_model(D, cfg), {}};
    AdamState adam = AdamState::for_model(out.model, cfg.adam);
    std::vector<std::size_t> order(windows.size());

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng = master.derive(1000 + epoch);
        std::iota(order.begin(), order.end(), 0);
        if (cfg.batch == BatchMode::per_window) rng.shuffle(order);

        double total = 0.0;
        Seq2SeqModel accum;
        if (cfg.batch == BatchMode::full_batch) accum = out.model.zeros_like();

        for (std::size_t idx : order) {
            const Matrix& clean = windows[idx].data;
            const Matrix noisy = corrupt(clean, cfg.noise_std, rng);
            const Reconstruction r = reconstruct(noisy, clean, out.model);
            total += r.loss + l1_penalty(r.cache, out.model, cfg.l1_lambda, cfg.l1_target);
            Seq2SeqModel g = model_backward(r.cache, out.model, cfg.l1_lambda, cfg.l1_target);
            if (cfg.batch == BatchMode::per_window) {
                adam_step(out.model, g, adam);
            } else {
                std::vector<Matrix*> acc;
                Seq2SeqModel::visit(accum, [&](const std::string&, Matrix& b) { acc.push_back(&b); });
                std::size_t i = 0;
                Seq2SeqModel::visit(g, [&](const std::string&, const Matrix& b) { *acc[i++] += b; });
            }
        }
        if (cfg.batch == BatchMode::full_batch) {
            const double inv = 1.0 / static_cast<double>(windows.size());
            Seq2SeqModel::visit(accum, [&](const std::string&, Matrix& b) { b *= inv; });
            adam_step(out.model, accum, adam);
        }

        const double mean = total / static_cast<double>(windows.size());
        if (!std::isfinite(mean))
            throw numeric_error("training diverged at epoch " + std::to_string(epoch));
        out.loss_history.push_back(mean);
        if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
            on_checkpoint(epoch, out.model);
    }
    return out;
}

struct EmbeddingSet {
    Matrix z;  // N x E
    std::vector<std::string> labels;
    std::vector<std::size_t> ids;

    std::size_t size() const { return labels.size(); }
};

// Encodes clean windows; row order follows the input.
inline EmbeddingSet embed_all(std::span<const SensorWindow> windows, const Seq2SeqModel& model) {
    const std::size_t E = model.embedding_dim();
    EmbeddingSet out{Matrix(windows.size(), E), {}, {}};
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (w.data.cols() != model.input_dim())
            throw data_error("window " + std::to_string(w.id) + " has " +
                             std::to_string(w.data.cols()) + " channels, model expects " +
                             std::to_string(model.input_dim()));
        const Vector z = encode(w.data, model).z;
        std::copy(z.begin(), z.end(), out.z.row(i).begin());
        out.labels.push_back(w.label);
        out.ids.push_back(w.id);
    }
    return out;
}

}  // namespace a2v
