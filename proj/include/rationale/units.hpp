#pragma once

#include <cstddef>
#include <vector>

#include "rationale/numeric.hpp"

namespace rationale {

// A token sequence in vector space: one (dim x 1) column per position.
using Seq = std::vector<Matrix>;

// Recurrent convolution unit, filter width 2:
//   lambda_t = sigmoid(Wg x_t + Ug h_{t-1} + bg)
//   c1_t = lambda_t . c1_{t-1} + (1 - lambda_t) . (W1 x_t)
//   c2_t = lambda_t . c2_{t-1} + (1 - lambda_t) . (c1_{t-1} + W2 x_t)
//   h_t  = tanh(c2_t + b)
struct RcnnCell {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Matrix w_gate;  // (d, d_in)
    Matrix u_gate;  // (d, d)
    Matrix b_gate;  // (d, 1)
    Matrix w1;      // (d, d_in)
    Matrix w2;      // (d, d_in)
    Matrix b_out;   // (d, 1)

    static RcnnCell zeros(std::size_t d_in, std::size_t d);
    static RcnnCell init(std::size_t d_in, std::size_t d, Rng& rng, double range = 0.05);

    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn("w_gate", w_gate);
        fn("u_gate", u_gate);
        fn("b_gate", b_gate);
        fn("w1", w1);
        fn("w2", w2);
        fn("b_out", b_out);
    }
    template <typename Fn>
    void for_each_param(Fn&& fn) const {
        const_cast<RcnnCell*>(this)->for_each_param(
            [&](const char* name, Matrix& m) { fn(name, static_cast<const Matrix&>(m)); });
    }
};

// Gradient buffers share the cell layout.
using RcnnGrads = RcnnCell;

struct RcnnState {
    Matrix c1, c2, h;

    static RcnnState zeros(std::size_t d);
};

// Per-step records kept by the forward pass for exact reverse-mode gradients.
struct RcnnStepRecord {
    Matrix x;        // input at t
    Matrix lambda;   // gate value
    Matrix w1x;      // W1 x_t
    Matrix w2x;      // W2 x_t
    RcnnState out;   // state after the step
};

struct RcnnTape {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::vector<RcnnStepRecord> steps;

    std::size_t length() const { return steps.size(); }
    const RcnnState& state(std::size_t t) const { return steps[t].out; }
    const RcnnState& prev_state(std::size_t t) const;  // zero state for t = 0
    const Matrix& h(std::size_t t) const { return steps[t].out.h; }
};

RcnnState rcnn_step(const RcnnCell& cell, const Matrix& x_t, const RcnnState& prev);

// Left fold of rcnn_step from the all-zero state; empty input gives an empty tape.
RcnnTape rcnn_forward(const RcnnCell& cell, const Seq& xs);

// Continue a forward pass from an explicit state (fold-composition support).
RcnnTape rcnn_forward_from(const RcnnCell& cell, const Seq& xs, const RcnnState& initial);

// upstream_h[t] is dLoss/dh_t (may be empty matrices meaning zero). Accumulates
// into grads and input_grads; input_grads entries must be pre-sized (d_in x 1).
void rcnn_backward(const RcnnCell& cell, const RcnnTape& tape, const Seq& upstream_h,
                   RcnnGrads& grads, Seq& input_grads);

struct BidirTape {
    RcnnTape fwd;      // scans left to right
    RcnnTape bwd;      // scans right to left (steps stored in scan order)
    std::size_t length() const { return fwd.length(); }
    // Concatenated state [h_fwd_t ; h_bwd_t], (2d x 1).
    Matrix state(std::size_t t) const;
};

BidirTape bidir_forward(const RcnnCell& fwd, const RcnnCell& bwd, const Seq& xs);

// upstream[t] is dLoss/d[state(t)] (2d x 1, empty = zero).
void bidir_backward(const RcnnCell& fwd, const RcnnCell& bwd, const BidirTape& tape,
                    const Seq& upstream, RcnnGrads& fwd_grads, RcnnGrads& bwd_grads,
                    Seq& input_grads);

struct StackSpec {
    std::size_t depth = 1;
    std::size_t hidden_dim = 200;
    double dropout_rate = 0.0;
};

// Inverted dropout: 0 with probability rate, else 1/(1-rate).
Matrix dropout_mask(Rng& rng, std::size_t len, double rate);

struct StackTape {
    std::vector<RcnnTape> layers;
    std::vector<Seq> masks;  // per layer boundary, empty when not training

    std::size_t length() const { return layers.empty() ? 0 : layers.front().length(); }
    const RcnnTape& top() const { return layers.back(); }
};

// Stacked RCNN layers; dropout applied between layers only, at train time only.
StackTape stack_forward(const std::vector<RcnnCell>& cells, const Seq& xs, double dropout_rate,
                        bool train, Rng* rng);

// upstream_top[t] is dLoss/dh_t of the top layer.
void stack_backward(const std::vector<RcnnCell>& cells, const StackTape& tape,
                    const Seq& upstream_top, std::vector<RcnnGrads>& grads, Seq& input_grads);

Seq make_zero_seq(std::size_t len, std::size_t dim);

}  // namespace rationale
