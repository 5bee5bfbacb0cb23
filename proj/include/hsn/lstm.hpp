#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hsn/ops.hpp"

namespace hsn {

/// Batched single-layer LSTM without peepholes, zero initial state.
///
/// x: B×L×C (batch, steps, channels); w_input: C×4H; w_hidden: H×4H;
/// bias: 4H. Gate blocks are laid out as [input, forget, candidate, output].
/// Returns the hidden state at every step, B×L×H.
inline Tensor lstm(const Tensor& x, const Tensor& w_input, const Tensor& w_hidden, const Tensor& bias) {
    detail::require_rank(x, 3, "lstm", "input");
    detail::require_rank(w_input, 2, "lstm", "input weight");
    detail::require_rank(w_hidden, 2, "lstm", "hidden weight");
    const std::size_t batch = x.dim(0);
    const std::size_t steps = x.dim(1);
    const std::size_t in = x.dim(2);
    const std::size_t hidden = w_hidden.dim(0);
    detail::require(steps >= 1, "lstm: empty sequence");
    detail::require(w_input.dim(0) == in && w_input.dim(1) == 4 * hidden,
                    "lstm: input weight " + to_string(w_input.shape()) + " incompatible with input " +
                        to_string(x.shape()) + " and hidden size " + std::to_string(hidden));
    detail::require(w_hidden.dim(1) == 4 * hidden, "lstm: hidden weight must be Hx4H, got " +
                                                       to_string(w_hidden.shape()));
    detail::require(bias.size() == 4 * hidden, "lstm: bias must have 4H entries, got " +
                                                   to_string(bias.shape()));

    const std::size_t g4 = 4 * hidden;
    const auto xv = x.values();
    const auto wx = w_input.values();
    const auto wh = w_hidden.values();
    const auto bv = bias.values();

    // Cached per (batch, step): activated gates and cell state.
    std::vector<double> gates(batch * steps * g4);
    std::vector<double> cells(batch * steps * hidden);
    std::vector<double> y(batch * steps * hidden);
    std::vector<double> pre(g4);

    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < steps; ++t) {
            const std::size_t bt = b * steps + t;
            for (std::size_t j = 0; j < g4; ++j) pre[j] = bv[j];
            const double* xt = xv.data() + bt * in;
            for (std::size_t i = 0; i < in; ++i) {
                if (xt[i] == 0.0) continue;
                const double* row = wx.data() + i * g4;
                for (std::size_t j = 0; j < g4; ++j) pre[j] += xt[i] * row[j];
            }
            if (t > 0) {
                const double* hp = y.data() + (bt - 1) * hidden;
                for (std::size_t i = 0; i < hidden; ++i) {
                    if (hp[i] == 0.0) continue;
                    const double* row = wh.data() + i * g4;
                    for (std::size_t j = 0; j < g4; ++j) pre[j] += hp[i] * row[j];
                }
            }
            double* gt = gates.data() + bt * g4;
            for (std::size_t h = 0; h < hidden; ++h) {
                gt[h] = detail::sigmoid(pre[h]);
                gt[hidden + h] = detail::sigmoid(pre[hidden + h]);
                gt[2 * hidden + h] = std::tanh(pre[2 * hidden + h]);
                gt[3 * hidden + h] = detail::sigmoid(pre[3 * hidden + h]);
                const double c_prev = t > 0 ? cells[(bt - 1) * hidden + h] : 0.0;
                const double c = gt[hidden + h] * c_prev + gt[h] * gt[2 * hidden + h];
                cells[bt * hidden + h] = c;
                y[bt * hidden + h] = gt[3 * hidden + h] * std::tanh(c);
            }
        }
    }

    return Tensor::record(
        {batch, steps, hidden}, std::move(y), "lstm", {x, w_input, w_hidden, bias},
        [batch, steps, in, hidden, gates = std::move(gates), cells = std::move(cells)](detail::Node& n) {
            const std::size_t g4 = 4 * hidden;
            const auto& xv = n.inputs[0]->value;
            const auto& wx = n.inputs[1]->value;
            const auto& wh = n.inputs[2]->value;
            const auto& hs = n.value;
            std::vector<double>* gx = detail::wants_grad(n, 0) ? &detail::input_grad(n, 0) : nullptr;
            std::vector<double>* gwx = detail::wants_grad(n, 1) ? &detail::input_grad(n, 1) : nullptr;
            std::vector<double>* gwh = detail::wants_grad(n, 2) ? &detail::input_grad(n, 2) : nullptr;
            std::vector<double>* gb = detail::wants_grad(n, 3) ? &detail::input_grad(n, 3) : nullptr;
            const double sig_scale = fault_injection::sigmoid_adjoint_scale().load();

            std::vector<double> dh_next(hidden);
            std::vector<double> dc_next(hidden);
            std::vector<double> da(g4);
            for (std::size_t b = 0; b < batch; ++b) {
                std::fill(dh_next.begin(), dh_next.end(), 0.0);
                std::fill(dc_next.begin(), dc_next.end(), 0.0);
                for (std::size_t t = steps; t-- > 0;) {
                    const std::size_t bt = b * steps + t;
                    const double* gt = gates.data() + bt * g4;
                    for (std::size_t h = 0; h < hidden; ++h) {
                        const double ig = gt[h];
                        const double fg = gt[hidden + h];
                        const double cg = gt[2 * hidden + h];
                        const double og = gt[3 * hidden + h];
                        const double c = cells[bt * hidden + h];
                        const double c_prev = t > 0 ? cells[(bt - 1) * hidden + h] : 0.0;
                        const double tc = std::tanh(c);
                        const double dh = n.grad[bt * hidden + h] + dh_next[h];
                        const double dc = dh * og * (1.0 - tc * tc) + dc_next[h];
                        da[h] = dc * cg * ig * (1.0 - ig) * sig_scale;
                        da[hidden + h] = dc * c_prev * fg * (1.0 - fg) * sig_scale;
                        da[2 * hidden + h] = dc * ig * (1.0 - cg * cg);
                        da[3 * hidden + h] = dh * tc * og * (1.0 - og) * sig_scale;
                        dc_next[h] = dc * fg;
                    }
                    const double* xt = xv.data() + bt * in;
                    if (gx) {
                        for (std::size_t i = 0; i < in; ++i) {
                            double acc = 0.0;
                            const double* row = wx.data() + i * g4;
                            for (std::size_t j = 0; j < g4; ++j) acc += da[j] * row[j];
                            (*gx)[bt * in + i] += acc;
                        }
                    }
                    if (gwx) {
                        for (std::size_t i = 0; i < in; ++i) {
                            if (xt[i] == 0.0) continue;
                            double* row = gwx->data() + i * g4;
                            for (std::size_t j = 0; j < g4; ++j) row[j] += xt[i] * da[j];
                        }
                    }
                    if (gb) {
                        for (std::size_t j = 0; j < g4; ++j) (*gb)[j] += da[j];
                    }
                    for (std::size_t i = 0; i < hidden; ++i) {
                        double acc = 0.0;
                        const double* row = wh.data() + i * g4;
                        for (std::size_t j = 0; j < g4; ++j) acc += da[j] * row[j];
                        dh_next[i] = t > 0 ? acc : 0.0;
                    }
                    if (gwh && t > 0) {
                        const double* hp = hs.data() + (bt - 1) * hidden;
                        for (std::size_t i = 0; i < hidden; ++i) {
                            if (hp[i] == 0.0) continue;
                            double* row = gwh->data() + i * g4;
                            for (std::size_t j = 0; j < g4; ++j) row[j] += hp[i] * da[j];
                        }
                    }
                }
            }
        });
}

/// Single-sequence convenience form: seq L×C -> L×H.
inline Tensor lstm_forward(const Tensor& seq, const Tensor& w_input, const Tensor& w_hidden,
                           const Tensor& bias) {
    detail::require_rank(seq, 2, "lstm_forward", "sequence");
    const std::size_t steps = seq.dim(0);
    Tensor out = lstm(reshape(seq, {1, steps, seq.dim(1)}), w_input, w_hidden, bias);
    return reshape(out, {steps, out.dim(2)});
}

}  // namespace hsn
