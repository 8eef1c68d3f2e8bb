#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "a2v/reference.hpp"
#include "a2v/seqmodel.hpp"

namespace a2v {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_block;
    std::size_t parameters = 0;
};

// Compares model_backward against central differences of the objective.
// The objective is re-evaluated by the scalar reference forward pass in long
// double so that rounding in the difference quotient stays far below the
// tolerance even for gradient entries near 1e-8.
inline GradCheckResult check_model_gradients(const Seq2SeqModel& model, const Matrix& s,
                                             double lambda, double eps = 1e-5) {
    const Reconstruction r = reconstruct(s, model);
    const Seq2SeqModel analytic = model_backward(r.cache, model, lambda);

    std::vector<const Matrix*> grads;
    Seq2SeqModel::visit(analytic, [&](const std::string&, const Matrix& g) { grads.push_back(&g); });

    Seq2SeqModel m = model;
    GradCheckResult res;
    std::size_t idx = 0;
    Seq2SeqModel::visit(m, [&](const std::string& name, Matrix& block) {
        const Matrix& g = *grads[idx++];
        if (block.empty()) return;
        const Matrix saved = block;
        const Matrix numeric = finite_diff_grad(
            [&](const Matrix& x) {
                block = x;
                return reference::objective<long double>(m, s, s, lambda);
            },
            saved, eps);
        block = saved;
        const double err = max_relative_error(g, numeric);
        res.parameters += block.size();
        if (res.worst_block.empty() || err > res.max_rel_error) {
            res.max_rel_error = err;
            res.worst_block = name;
        }
    });
    return res;
}

// Random instance: model from `seed`, non-trivial biases, standard-normal
// sequence redrawn until no embedding entry is within 1e-3 of the L1 kink.
inline GradCheckResult check_model_gradients(std::size_t steps, std::size_t input_dim,
                                             std::size_t enc_hidden, DecoderMode mode,
                                             OutputActivation output, double lambda,
                                             std::uint64_t seed, double eps = 1e-5) {
    if (steps == 0 || input_dim == 0 || enc_hidden == 0)
        throw usage_error("gradcheck dimensions must be positive");
    Rng rng(seed);
    Seq2SeqModel m = Seq2SeqModel::random(input_dim, 2 * enc_hidden, mode, output, rng);
    Seq2SeqModel::visit(m, [&](const std::string& name, Matrix& b) {
        if (name.find("bias") != std::string::npos || name == "b_out")
            for (double& v : b.values()) v += rng.uniform(-0.5, 0.5);
    });
    Matrix s;
    for (int attempt = 0;; ++attempt) {
        s = gaussian(rng, steps, input_dim, 0.0, 1.0);
        if (lambda == 0.0) break;
        const Vector z = encode(s, m).z;
        if (std::none_of(z.begin(), z.end(), [](double v) { return std::abs(v) < 1e-3; })) break;
        if (attempt > 100) throw numeric_error("could not draw an instance away from the L1 kink");
    }
    return check_model_gradients(m, s, lambda, eps);
}

}  // namespace a2v
