#pragma once

// LSTM cell with hand-derived backward pass, a bidirectional encoder, an
// LSTM decoder seeded by the embedding, and the assembled sequence
// autoencoder together with its exact penalized-objective gradients.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2v/ndcore.hpp"

namespace a2v {

enum class Gate : std::size_t { input = 0, forget = 1, output = 2, candidate = 3 };
inline constexpr std::size_t kGates = 4;
inline constexpr std::array<std::string_view, kGates> kGateNames{"input", "forget", "output",
                                                                "candidate"};

// Weights for one LSTM direction. w_in[g] is D x H, w_rec[g] is H x H, bias[g] is 1 x H.
struct LstmParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::array<Matrix, kGates> w_in;
    std::array<Matrix, kGates> w_rec;
    std::array<Matrix, kGates> bias;

    static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim) {
        LstmParams p;
        p.input_dim = input_dim;
        p.hidden_dim = hidden_dim;
        for (std::size_t g = 0; g < kGates; ++g) {
            p.w_in[g] = Matrix(input_dim, hidden_dim);
            p.w_rec[g] = Matrix(hidden_dim, hidden_dim);
            p.bias[g] = Matrix(1, hidden_dim);
        }
        return p;
    }

    // Uniform in [-1/sqrt(H), 1/sqrt(H)]; biases zero except the forget gate at +1.
    static LstmParams random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
        LstmParams p = zeros(input_dim, hidden_dim);
        const double r = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
        for (std::size_t g = 0; g < kGates; ++g) {
            p.w_in[g] = uniform_matrix(rng, input_dim, hidden_dim, -r, r);
            p.w_rec[g] = uniform_matrix(rng, hidden_dim, hidden_dim, -r, r);
        }
        p.bias[static_cast<std::size_t>(Gate::forget)].fill(1.0);
        return p;
    }

    Matrix& in(Gate g) { return w_in[static_cast<std::size_t>(g)]; }
    Matrix& rec(Gate g) { return w_rec[static_cast<std::size_t>(g)]; }
    Matrix& b(Gate g) { return bias[static_cast<std::size_t>(g)]; }

    void validate() const {
        for (std::size_t g = 0; g < kGates; ++g) {
            if (w_in[g].rows() != input_dim || w_in[g].cols() != hidden_dim ||
                w_rec[g].rows() != hidden_dim || w_rec[g].cols() != hidden_dim ||
                bias[g].rows() != 1 || bias[g].cols() != hidden_dim)
                throw usage_error("LSTM parameter shapes inconsistent with D=" +
                                  std::to_string(input_dim) + ", H=" + std::to_string(hidden_dim));
        }
    }

    template <class Self, class F>
    static void visit(Self& self, std::string_view prefix, F&& fn) {
        for (std::size_t g = 0; g < kGates; ++g) {
            const std::string gate(kGateNames[g]);
            fn(std::string(prefix) + ".w_in." + gate, self.w_in[g]);
            fn(std::string(prefix) + ".w_rec." + gate, self.w_rec[g]);
            fn(std::string(prefix) + ".bias." + gate, self.bias[g]);
        }
    }

    friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

// Gate activations and states produced by one cell step.
struct CellStep {
    Vector i, f, o, g;
    Vector c;
    Vector tanh_c;
    Vector h;
};

inline CellStep lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                                  std::span<const double> c_prev, const LstmParams& p) {
    const std::size_t D = p.input_dim, H = p.hidden_dim;
    if (x.size() != D || h_prev.size() != H || c_prev.size() != H)
        throw usage_error("lstm_cell_forward dims: x=" + std::to_string(x.size()) +
                          " h=" + std::to_string(h_prev.size()) + " c=" +
                          std::to_string(c_prev.size()) + " for D=" + std::to_string(D) +
                          ", H=" + std::to_string(H));

    std::array<Vector, kGates> pre;
    for (std::size_t g = 0; g < kGates; ++g) {
        Vector& a = pre[g];
        a.assign(p.bias[g].values().begin(), p.bias[g].values().end());
        for (std::size_t d = 0; d < D; ++d) {
            const double xd = x[d];
            if (xd == 0.0) continue;
            auto w = p.w_in[g].row(d);
            for (std::size_t j = 0; j < H; ++j) a[j] += xd * w[j];
        }
        for (std::size_t k = 0; k < H; ++k) {
            const double hk = h_prev[k];
            if (hk == 0.0) continue;
            auto w = p.w_rec[g].row(k);
            for (std::size_t j = 0; j < H; ++j) a[j] += hk * w[j];
        }
    }

    CellStep s;
    s.i.resize(H);
    s.f.resize(H);
    s.o.resize(H);
    s.g.resize(H);
    s.c.resize(H);
    s.tanh_c.resize(H);
    s.h.resize(H);
    for (std::size_t j = 0; j < H; ++j) {
        s.i[j] = sigmoid(pre[0][j]);
        s.f[j] = sigmoid(pre[1][j]);
        s.o[j] = sigmoid(pre[2][j]);
        s.g[j] = std::tanh(pre[3][j]);
        s.c[j] = s.f[j] * c_prev[j] + s.i[j] * s.g[j];
        s.tanh_c[j] = std::tanh(s.c[j]);
        s.h[j] = s.o[j] * s.tanh_c[j];
    }
    return s;
}

// Everything backpropagation through time needs from one pass over a sequence.
struct LstmTrace {
    Matrix inputs;  // T x D (D may be 0)
    Vector h0, c0;
    std::vector<CellStep> steps;

    std::size_t length() const { return steps.size(); }
    const Vector& final_h() const { return steps.empty() ? h0 : steps.back().h; }
};

inline LstmTrace lstm_forward(const Matrix& inputs, Vector h0, Vector c0, const LstmParams& p) {
    if (inputs.cols() != p.input_dim)
        throw usage_error("lstm_forward input has " + std::to_string(inputs.cols()) +
                          " columns, expected " + std::to_string(p.input_dim));
    LstmTrace tr{inputs, std::move(h0), std::move(c0), {}};
    tr.steps.reserve(inputs.rows());
    for (std::size_t t = 0; t < inputs.rows(); ++t) {
        const Vector& hp = t == 0 ? tr.h0 : tr.steps.back().h;
        const Vector& cp = t == 0 ? tr.c0 : tr.steps.back().c;
        tr.steps.push_back(lstm_cell_forward(inputs.row(t), hp, cp, p));
    }
    return tr;
}

struct LstmGrads {
    LstmParams params;
    Matrix d_inputs;  // T x D
    Vector d_h0, d_c0;
};

// Backpropagation through time. `d_hidden` row t is the upstream gradient on h_t.
inline LstmGrads lstm_backward(const LstmTrace& tr, const Matrix& d_hidden, const LstmParams& p) {
    const std::size_t T = tr.length(), D = p.input_dim, H = p.hidden_dim;
    if (d_hidden.rows() != T || d_hidden.cols() != H)
        throw usage_error("lstm_backward: upstream gradient " + d_hidden.shape() +
                          " does not match trace of length " + std::to_string(T) +
                          " with H=" + std::to_string(H));
    if (tr.inputs.rows() != T || tr.inputs.cols() != D)
        throw usage_error("lstm_backward: trace inputs " + tr.inputs.shape() +
                          " inconsistent with parameters");

    LstmGrads out{LstmParams::zeros(D, H), Matrix(T, D), Vector(H, 0.0), Vector(H, 0.0)};
    Vector dh_next(H, 0.0), dc_next(H, 0.0);
    std::array<Vector, kGates> dpre;
    for (auto& v : dpre) v.resize(H);

    for (std::size_t t = T; t-- > 0;) {
        const CellStep& s = tr.steps[t];
        const Vector& h_prev = t == 0 ? tr.h0 : tr.steps[t - 1].h;
        const Vector& c_prev = t == 0 ? tr.c0 : tr.steps[t - 1].c;
        auto up = d_hidden.row(t);

        for (std::size_t j = 0; j < H; ++j) {
            const double dh = up[j] + dh_next[j];
            const double d_o = dh * s.tanh_c[j];
            const double dc = dc_next[j] + dh * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
            const double di = dc * s.g[j];
            const double dg = dc * s.i[j];
            const double df = dc * c_prev[j];
            dc_next[j] = dc * s.f[j];
            dpre[0][j] = di * s.i[j] * (1.0 - s.i[j]);
            dpre[1][j] = df * s.f[j] * (1.0 - s.f[j]);
            dpre[2][j] = d_o * s.o[j] * (1.0 - s.o[j]);
            dpre[3][j] = dg * (1.0 - s.g[j] * s.g[j]);
        }

        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        auto x = tr.inputs.row(t);
        auto dx = out.d_inputs.row(t);
        for (std::size_t g = 0; g < kGates; ++g) {
            const Vector& dp = dpre[g];
            auto db = out.params.bias[g].row(0);
            for (std::size_t j = 0; j < H; ++j) db[j] += dp[j];
            for (std::size_t d = 0; d < D; ++d) {
                auto w = p.w_in[g].row(d);
                auto dw = out.params.w_in[g].row(d);
                double acc = 0.0;
                for (std::size_t j = 0; j < H; ++j) {
                    dw[j] += x[d] * dp[j];
                    acc += w[j] * dp[j];
                }
                dx[d] += acc;
            }
            for (std::size_t k = 0; k < H; ++k) {
                auto w = p.w_rec[g].row(k);
                auto dw = out.params.w_rec[g].row(k);
                double acc = 0.0;
                for (std::size_t j = 0; j < H; ++j) {
                    dw[j] += h_prev[k] * dp[j];
                    acc += w[j] * dp[j];
                }
                dh_next[k] += acc;
            }
        }
    }
    out.d_h0 = dh_next;
    out.d_c0 = dc_next;
    return out;
}

enum class DecoderMode { paper_literal, repeat_input };
enum class OutputActivation { linear, softmax };
// Where the L1 penalty applies: embedding activations z, or encoder weights.
enum class L1Target { activation, weights };

inline std::string to_string(DecoderMode m) {
    return m == DecoderMode::paper_literal ? "paper-literal" : "repeat-input";
}
inline std::string to_string(OutputActivation a) {
    return a == OutputActivation::linear ? "linear" : "softmax";
}
inline std::string to_string(L1Target t) {
    return t == L1Target::activation ? "activation" : "weights";
}
inline DecoderMode parse_decoder_mode(std::string_view s) {
    if (s == "paper-literal") return DecoderMode::paper_literal;
    if (s == "repeat-input") return DecoderMode::repeat_input;
    throw usage_error("unknown decoder mode '" + std::string(s) + "'");
}
inline OutputActivation parse_output_activation(std::string_view s) {
    if (s == "linear") return OutputActivation::linear;
    if (s == "softmax") return OutputActivation::softmax;
    throw usage_error("unknown output activation '" + std::string(s) + "'");
}
inline L1Target parse_l1_target(std::string_view s) {
    if (s == "activation") return L1Target::activation;
    if (s == "weights") return L1Target::weights;
    throw usage_error("unknown l1 target '" + std::string(s) + "'");
}

// Bidirectional LSTM encoder + LSTM decoder + linear output projection.
// The embedding is concat(final forward state, final backward state), so
// E = 2 * encoder hidden size, and the decoder hidden size equals E.
struct Seq2SeqModel {
    LstmParams enc_fwd;
    LstmParams enc_bwd;
    LstmParams dec;
    Matrix w_out;  // E x D
    Matrix b_out;  // 1 x D
    DecoderMode mode = DecoderMode::paper_literal;
    OutputActivation output = OutputActivation::linear;

    std::size_t input_dim() const { return enc_fwd.input_dim; }
    std::size_t embedding_dim() const { return enc_fwd.hidden_dim + enc_bwd.hidden_dim; }

    static Seq2SeqModel zeros(std::size_t input_dim, std::size_t embedding_dim, DecoderMode mode,
                              OutputActivation output) {
        if (embedding_dim == 0 || embedding_dim % 2 != 0)
            throw usage_error("embedding dimension must be a positive even number, got " +
                              std::to_string(embedding_dim));
        if (input_dim == 0) throw usage_error("input dimension must be positive");
        const std::size_t H = embedding_dim / 2;
        Seq2SeqModel m;
        m.enc_fwd = LstmParams::zeros(input_dim, H);
        m.enc_bwd = LstmParams::zeros(input_dim, H);
        m.dec = LstmParams::zeros(mode == DecoderMode::repeat_input ? embedding_dim : 0,
                                  embedding_dim);
        m.w_out = Matrix(embedding_dim, input_dim);
        m.b_out = Matrix(1, input_dim);
        m.mode = mode;
        m.output = output;
        return m;
    }

    static Seq2SeqModel random(std::size_t input_dim, std::size_t embedding_dim, DecoderMode mode,
                               OutputActivation output, Rng& rng) {
        Seq2SeqModel m = zeros(input_dim, embedding_dim, mode, output);
        const std::size_t H = embedding_dim / 2;
        m.enc_fwd = LstmParams::random(input_dim, H, rng);
        m.enc_bwd = LstmParams::random(input_dim, H, rng);
        m.dec = LstmParams::random(m.dec.input_dim, embedding_dim, rng);
        const double r = 1.0 / std::sqrt(static_cast<double>(embedding_dim));
        m.w_out = uniform_matrix(rng, embedding_dim, input_dim, -r, r);
        return m;
    }

    // Same dimensions and switches, every parameter zero; the shape of a gradient.
    Seq2SeqModel zeros_like() const {
        Seq2SeqModel z = *this;
        visit(z, [](const std::string&, Matrix& m) { m.fill(0.0); });
        return z;
    }

    void validate() const {
        enc_fwd.validate();
        enc_bwd.validate();
        dec.validate();
        const std::size_t E = embedding_dim();
        if (enc_bwd.input_dim != enc_fwd.input_dim)
            throw usage_error("encoder directions disagree on input dimension");
        if (dec.hidden_dim != E)
            throw usage_error("decoder hidden size " + std::to_string(dec.hidden_dim) +
                              " != embedding size " + std::to_string(E));
        const std::size_t want_in = mode == DecoderMode::repeat_input ? E : 0;
        if (dec.input_dim != want_in)
            throw usage_error("decoder input dimension " + std::to_string(dec.input_dim) +
                              " inconsistent with mode " + to_string(mode));
        if (w_out.rows() != E || w_out.cols() != input_dim() || b_out.rows() != 1 ||
            b_out.cols() != input_dim())
            throw usage_error("output projection shapes inconsistent");
    }

    // Visits every trainable block in a fixed, documented order.
    template <class Self, class F>
    static void visit(Self& self, F&& fn) {
        LstmParams::visit(self.enc_fwd, "enc_fwd", fn);
        LstmParams::visit(self.enc_bwd, "enc_bwd", fn);
        LstmParams::visit(self.dec, "dec", fn);
        fn(std::string("w_out"), self.w_out);
        fn(std::string("b_out"), self.b_out);
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        visit(*this, [&](const std::string&, const Matrix& m) { n += m.size(); });
        return n;
    }

    friend bool operator==(const Seq2SeqModel&, const Seq2SeqModel&) = default;
};

inline Matrix reversed_rows(const Matrix& s) {
    Matrix r(s.rows(), s.cols());
    for (std::size_t t = 0; t < s.rows(); ++t) {
        auto src = s.row(s.rows() - 1 - t);
        std::copy(src.begin(), src.end(), r.row(t).begin());
    }
    return r;
}

struct EncodeResult {
    Vector z;
    LstmTrace fwd;
    LstmTrace bwd;  // runs over the time-reversed sequence
};

inline EncodeResult encode(const Matrix& s, const Seq2SeqModel& m) {
    if (s.rows() == 0) throw usage_error("cannot encode an empty sequence");
    if (s.cols() != m.input_dim())
        throw usage_error("sequence has " + std::to_string(s.cols()) + " channels, model expects " +
                          std::to_string(m.input_dim()));
    const std::size_t H = m.enc_fwd.hidden_dim;
    EncodeResult r;
    r.fwd = lstm_forward(s, Vector(H, 0.0), Vector(H, 0.0), m.enc_fwd);
    const std::size_t Hb = m.enc_bwd.hidden_dim;
    r.bwd = lstm_forward(reversed_rows(s), Vector(Hb, 0.0), Vector(Hb, 0.0), m.enc_bwd);
    r.z = r.fwd.final_h();
    r.z.insert(r.z.end(), r.bwd.final_h().begin(), r.bwd.final_h().end());
    return r;
}

struct DecodeResult {
    Matrix output;  // T x D
    LstmTrace trace;
};

inline DecodeResult decode(const Vector& z, std::size_t steps, const Seq2SeqModel& m) {
    if (steps == 0) throw usage_error("cannot decode zero timesteps");
    const std::size_t E = m.embedding_dim(), D = m.input_dim();
    if (z.size() != E)
        throw usage_error("embedding has length " + std::to_string(z.size()) + ", expected " +
                          std::to_string(E));
    Matrix inputs(steps, m.dec.input_dim);
    if (m.mode == DecoderMode::repeat_input)
        for (std::size_t t = 0; t < steps; ++t) std::copy(z.begin(), z.end(), inputs.row(t).begin());

    DecodeResult r;
    r.trace = lstm_forward(inputs, z, Vector(E, 0.0), m.dec);
    r.output = Matrix(steps, D);
    for (std::size_t t = 0; t < steps; ++t) {
        auto y = r.output.row(t);
        std::copy(m.b_out.values().begin(), m.b_out.values().end(), y.begin());
        const Vector& h = r.trace.steps[t].h;
        for (std::size_t k = 0; k < E; ++k) {
            auto w = m.w_out.row(k);
            for (std::size_t d = 0; d < D; ++d) y[d] += h[k] * w[d];
        }
        if (m.output == OutputActivation::softmax) softmax_inplace(y);
    }
    return r;
}

// Full forward state of one reconstruction, input and target kept separately
// so denoising training can feed a corrupted input against a clean target.
struct ForwardCache {
    Matrix input;
    Matrix target;
    EncodeResult enc;
    DecodeResult dec;

    const Vector& z() const { return enc.z; }
    const Matrix& reconstruction() const { return dec.output; }
};

struct Reconstruction {
    Matrix output;
    Vector z;
    double loss = 0.0;  // ||target - output||^2, no penalty
    ForwardCache cache;
};

inline Reconstruction reconstruct(const Matrix& input, const Matrix& target, const Seq2SeqModel& m) {
    if (!input.same_shape(target))
        throw usage_error("input " + input.shape() + " and target " + target.shape() + " differ");
    ForwardCache cache{input, target, encode(input, m), {}};
    cache.dec = decode(cache.enc.z, input.rows(), m);
    const double loss = mse_loss(cache.dec.output, target).loss;
    return {cache.dec.output, cache.enc.z, loss, std::move(cache)};
}

inline Reconstruction reconstruct(const Matrix& s, const Seq2SeqModel& m) {
    return reconstruct(s, s, m);
}

inline double l1_penalty(const ForwardCache& cache, const Seq2SeqModel& m, double lambda,
                         L1Target target) {
    double acc = 0.0;
    if (target == L1Target::activation) {
        for (double v : cache.z()) acc += std::abs(v);
    } else {
        auto add = [&](const std::string&, const Matrix& w) {
            for (double v : w.values()) acc += std::abs(v);
        };
        for (const LstmParams* p : {&m.enc_fwd, &m.enc_bwd})
            for (std::size_t g = 0; g < kGates; ++g) {
                add("", p->w_in[g]);
                add("", p->w_rec[g]);
            }
    }
    return lambda * acc;
}

// ||target - output||^2 + lambda * L1 term.
inline double objective(const Matrix& input, const Matrix& target, const Seq2SeqModel& m,
                        double lambda, L1Target l1 = L1Target::activation) {
    const Reconstruction r = reconstruct(input, target, m);
    return r.loss + l1_penalty(r.cache, m, lambda, l1);
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Exact gradient of the penalized objective with respect to every parameter.
inline Seq2SeqModel model_backward(const ForwardCache& cache, const Seq2SeqModel& m, double lambda,
                                   L1Target l1 = L1Target::activation) {
    if (lambda < 0.0) throw usage_error("l1 lambda must be >= 0");
    const std::size_t T = cache.input.rows(), D = m.input_dim(), E = m.embedding_dim();
    Seq2SeqModel grad = m.zeros_like();

    Matrix dy = mse_loss(cache.dec.output, cache.target).grad;
    if (m.output == OutputActivation::softmax) {
        for (std::size_t t = 0; t < T; ++t) {
            auto y = cache.dec.output.row(t);
            auto g = dy.row(t);
            double dot = 0.0;
            for (std::size_t d = 0; d < D; ++d) dot += y[d] * g[d];
            for (std::size_t d = 0; d < D; ++d) g[d] = y[d] * (g[d] - dot);
        }
    }

    Matrix d_hdec(T, E);
    for (std::size_t t = 0; t < T; ++t) {
        const Vector& h = cache.dec.trace.steps[t].h;
        auto dp = dy.row(t);
        auto db = grad.b_out.row(0);
        for (std::size_t d = 0; d < D; ++d) db[d] += dp[d];
        auto dh = d_hdec.row(t);
        for (std::size_t k = 0; k < E; ++k) {
            auto w = m.w_out.row(k);
            auto dw = grad.w_out.row(k);
            double acc = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
                dw[d] += h[k] * dp[d];
                acc += w[d] * dp[d];
            }
            dh[k] = acc;
        }
    }

    LstmGrads dec = lstm_backward(cache.dec.trace, d_hdec, m.dec);
    grad.dec = std::move(dec.params);
    Vector dz = dec.d_h0;
    if (m.mode == DecoderMode::repeat_input)
        for (std::size_t t = 0; t < T; ++t) {
            auto dx = dec.d_inputs.row(t);
            for (std::size_t k = 0; k < E; ++k) dz[k] += dx[k];
        }
    if (l1 == L1Target::activation)
        for (std::size_t k = 0; k < E; ++k) dz[k] += lambda * sign(cache.z()[k]);

    const std::size_t Hf = m.enc_fwd.hidden_dim, Hb = m.enc_bwd.hidden_dim;
    Matrix d_fwd(T, Hf), d_bwd(T, Hb);
    for (std::size_t k = 0; k < Hf; ++k) d_fwd(T - 1, k) = dz[k];
    for (std::size_t k = 0; k < Hb; ++k) d_bwd(T - 1, k) = dz[Hf + k];
    grad.enc_fwd = lstm_backward(cache.enc.fwd, d_fwd, m.enc_fwd).params;
    grad.enc_bwd = lstm_backward(cache.enc.bwd, d_bwd, m.enc_bwd).params;

    if (l1 == L1Target::weights && lambda > 0.0) {
        for (auto [p, g] : {std::pair{&m.enc_fwd, &grad.enc_fwd}, std::pair{&m.enc_bwd, &grad.enc_bwd}})
            for (std::size_t gi = 0; gi < kGates; ++gi) {
                for (std::size_t i = 0; i < p->w_in[gi].size(); ++i)
                    g->w_in[gi][i] += lambda * sign(p->w_in[gi][i]);
                for (std::size_t i = 0; i < p->w_rec[gi].size(); ++i)
                    g->w_rec[gi][i] += lambda * sign(p->w_rec[gi][i]);
            }
    }
    return grad;
}

}  // namespace a2v
