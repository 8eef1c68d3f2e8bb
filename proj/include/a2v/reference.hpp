#pragma once

// Straight-line scalar re-implementation of the autoencoder forward pass,
// templated on the arithmetic type. It shares no code with seqmodel.hpp's
// forward path and serves as the independent oracle for cell outputs and,
// evaluated in extended precision, for finite-difference gradient checks.

#include <cmath>
#include <vector>

#include "a2v/seqmodel.hpp"

namespace a2v::reference {

template <class Real>
Real sig(Real v) {
    using std::exp;
    return v >= Real(0) ? Real(1) / (Real(1) + exp(-v)) : exp(v) / (Real(1) + exp(v));
}

// One LSTM step; x may be empty when the direction has no input.
template <class Real>
void cell(const LstmParams& p, const std::vector<Real>& x, std::vector<Real>& h,
          std::vector<Real>& c) {
    using std::tanh;
    const std::size_t D = p.input_dim, H = p.hidden_dim;
    std::vector<Real> hn(H), cn(H);
    for (std::size_t j = 0; j < H; ++j) {
        Real pre[kGates];
        for (std::size_t g = 0; g < kGates; ++g) {
            Real a = Real(p.bias[g](0, j));
            for (std::size_t d = 0; d < D; ++d) a += x[d] * Real(p.w_in[g](d, j));
            for (std::size_t k = 0; k < H; ++k) a += h[k] * Real(p.w_rec[g](k, j));
            pre[g] = a;
        }
        const Real i = sig(pre[0]), f = sig(pre[1]), o = sig(pre[2]), g = tanh(pre[3]);
        cn[j] = f * c[j] + i * g;
        hn[j] = o * tanh(cn[j]);
    }
    h = std::move(hn);
    c = std::move(cn);
}

template <class Real>
std::vector<Real> embed(const Seq2SeqModel& m, const Matrix& s) {
    const std::size_t T = s.rows(), D = s.cols();
    const std::size_t Hf = m.enc_fwd.hidden_dim, Hb = m.enc_bwd.hidden_dim;
    std::vector<Real> hf(Hf, Real(0)), cf(Hf, Real(0)), hb(Hb, Real(0)), cb(Hb, Real(0));
    std::vector<Real> x(D);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t d = 0; d < D; ++d) x[d] = Real(s(t, d));
        cell(m.enc_fwd, x, hf, cf);
    }
    for (std::size_t t = T; t-- > 0;) {
        for (std::size_t d = 0; d < D; ++d) x[d] = Real(s(t, d));
        cell(m.enc_bwd, x, hb, cb);
    }
    hf.insert(hf.end(), hb.begin(), hb.end());
    return hf;
}

// ||target - decode(encode(input))||^2 + lambda * ||z||_1, in precision Real.
template <class Real>
Real objective(const Seq2SeqModel& m, const Matrix& input, const Matrix& target, double lambda) {
    using std::abs;
    using std::exp;
    const std::size_t T = input.rows(), D = input.cols(), E = m.embedding_dim();
    const std::vector<Real> z = embed<Real>(m, input);
    std::vector<Real> h = z, c(E, Real(0));
    const std::vector<Real> dec_in = m.mode == DecoderMode::repeat_input ? z : std::vector<Real>{};
    Real loss = Real(0);
    std::vector<Real> y(D);
    for (std::size_t t = 0; t < T; ++t) {
        cell(m.dec, dec_in, h, c);
        for (std::size_t d = 0; d < D; ++d) {
            Real a = Real(m.b_out(0, d));
            for (std::size_t k = 0; k < E; ++k) a += h[k] * Real(m.w_out(k, d));
            y[d] = a;
        }
        if (m.output == OutputActivation::softmax) {
            Real mx = y[0];
            for (Real v : y) mx = v > mx ? v : mx;
            Real total = Real(0);
            for (Real& v : y) total += (v = exp(v - mx));
            for (Real& v : y) v /= total;
        }
        for (std::size_t d = 0; d < D; ++d) {
            const Real r = y[d] - Real(target(t, d));
            loss += r * r;
        }
    }
    Real l1 = Real(0);
    for (Real v : z) l1 += abs(v);
    return loss + Real(lambda) * l1;
}

}  // namespace a2v::reference
