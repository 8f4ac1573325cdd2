#include "rationale/units.hpp"

#include <cmath>

namespace rationale {

RcnnCell RcnnCell::zeros(std::size_t d_in, std::size_t d) {
    RcnnCell cell;
    cell.input_dim = d_in;
    cell.hidden_dim = d;
    cell.w_gate = Matrix(d, d_in);
    cell.u_gate = Matrix(d, d);
    cell.b_gate = Matrix(d, 1);
    cell.w1 = Matrix(d, d_in);
    cell.w2 = Matrix(d, d_in);
    cell.b_out = Matrix(d, 1);
    return cell;
}

RcnnCell RcnnCell::init(std::size_t d_in, std::size_t d, Rng& rng, double range) {
    RcnnCell cell = zeros(d_in, d);
    cell.for_each_param([&](const char*, Matrix& m) {
        for (double& v : m.data) v = rng.uniform(-range, range);
    });
    return cell;
}

RcnnState RcnnState::zeros(std::size_t d) {
    return RcnnState{Matrix(d, 1), Matrix(d, 1), Matrix(d, 1)};
}

const RcnnState& RcnnTape::prev_state(std::size_t t) const {
    static const RcnnState empty{};
    if (t == 0) {
        // Callers must treat an empty state as all-zero of hidden_dim.
        return empty;
    }
    return steps[t - 1].out;
}

static void require_input_dim(const RcnnCell& cell, const Matrix& x) {
    if (x.rows != cell.input_dim || x.cols != 1) {
        throw ShapeError("rcnn_step: input " + x.shape_str() + " for cell d_in=" +
                         std::to_string(cell.input_dim));
    }
}

namespace {

struct StepOut {
    Matrix lambda, w1x, w2x;
    RcnnState state;
};

StepOut step_full(const RcnnCell& cell, const Matrix& x_t, const RcnnState& prev) {
    std::size_t d = cell.hidden_dim;
    Matrix pre = cell.b_gate;
    gemv_acc(cell.w_gate, x_t, pre);
    gemv_acc(cell.u_gate, prev.h, pre);
    Matrix lambda = sigmoid(pre);

    Matrix w1x(d, 1), w2x(d, 1);
    gemv_acc(cell.w1, x_t, w1x);
    gemv_acc(cell.w2, x_t, w2x);

    RcnnState next = RcnnState::zeros(d);
    for (std::size_t i = 0; i < d; ++i) {
        double l = lambda.data[i];
        next.c1.data[i] = l * prev.c1.data[i] + (1.0 - l) * w1x.data[i];
        next.c2.data[i] = l * prev.c2.data[i] + (1.0 - l) * (prev.c1.data[i] + w2x.data[i]);
        next.h.data[i] = std::tanh(next.c2.data[i] + cell.b_out.data[i]);
    }
    return StepOut{std::move(lambda), std::move(w1x), std::move(w2x), std::move(next)};
}

}  // namespace

RcnnState rcnn_step(const RcnnCell& cell, const Matrix& x_t, const RcnnState& prev) {
    require_input_dim(cell, x_t);
    return step_full(cell, x_t, prev).state;
}

RcnnTape rcnn_forward_from(const RcnnCell& cell, const Seq& xs, const RcnnState& initial) {
    RcnnTape tape;
    tape.input_dim = cell.input_dim;
    tape.hidden_dim = cell.hidden_dim;
    tape.steps.reserve(xs.size());
    RcnnState state = initial;
    for (const Matrix& x : xs) {
        require_input_dim(cell, x);
        StepOut out = step_full(cell, x, state);
        state = out.state;
        tape.steps.push_back(
            RcnnStepRecord{x, std::move(out.lambda), std::move(out.w1x), std::move(out.w2x),
                           std::move(out.state)});
    }
    return tape;
}

RcnnTape rcnn_forward(const RcnnCell& cell, const Seq& xs) {
    return rcnn_forward_from(cell, xs, RcnnState::zeros(cell.hidden_dim));
}

void rcnn_backward(const RcnnCell& cell, const RcnnTape& tape, const Seq& upstream_h,
                   RcnnGrads& grads, Seq& input_grads) {
    std::size_t l = tape.length();
    std::size_t d = cell.hidden_dim;
    if (upstream_h.size() != l || input_grads.size() != l) {
        throw ShapeError("rcnn_backward: tape length " + std::to_string(l) + ", upstream " +
                         std::to_string(upstream_h.size()) + ", input grads " +
                         std::to_string(input_grads.size()));
    }

    Matrix gh(d, 1), gc1(d, 1), gc2(d, 1);  // carried gradients w.r.t. state at t
    Matrix gpre(d, 1);
    RcnnState zero_state = RcnnState::zeros(d);

    for (std::size_t t = l; t-- > 0;) {
        const RcnnStepRecord& rec = tape.steps[t];
        const RcnnState& prev = (t == 0) ? zero_state : tape.steps[t - 1].out;

        if (upstream_h[t].size() != 0) {
            if (upstream_h[t].rows != d || upstream_h[t].cols != 1) {
                throw ShapeError("rcnn_backward: upstream grad " + upstream_h[t].shape_str() +
                                 " at t=" + std::to_string(t));
            }
            for (std::size_t i = 0; i < d; ++i) gh.data[i] += upstream_h[t].data[i];
        }

        // h_t = tanh(c2_t + b_out)
        for (std::size_t i = 0; i < d; ++i) {
            double ht = rec.out.h.data[i];
            double g = gh.data[i] * (1.0 - ht * ht);
            gc2.data[i] += g;
            grads.b_out.data[i] += g;
        }

        // c2_t = l . c2_{t-1} + (1-l) . (c1_{t-1} + W2 x); c1_t = l . c1_{t-1} + (1-l) . (W1 x)
        Matrix glambda(d, 1);
        Matrix gw1x(d, 1), gw2x(d, 1);
        Matrix next_gc1(d, 1), next_gc2(d, 1);
        for (std::size_t i = 0; i < d; ++i) {
            double l_i = rec.lambda.data[i];
            double g2 = gc2.data[i];
            double g1 = gc1.data[i];
            glambda.data[i] =
                g2 * (prev.c2.data[i] - (prev.c1.data[i] + rec.w2x.data[i])) +
                g1 * (prev.c1.data[i] - rec.w1x.data[i]);
            gw2x.data[i] = g2 * (1.0 - l_i);
            gw1x.data[i] = g1 * (1.0 - l_i);
            next_gc2.data[i] = g2 * l_i;
            next_gc1.data[i] = g1 * l_i + g2 * (1.0 - l_i);
        }
        outer_acc(grads.w2, gw2x, rec.x);
        gemv_t_acc(cell.w2, gw2x, input_grads[t]);
        outer_acc(grads.w1, gw1x, rec.x);
        gemv_t_acc(cell.w1, gw1x, input_grads[t]);

        // gate pre-activation
        for (std::size_t i = 0; i < d; ++i) {
            double l_i = rec.lambda.data[i];
            gpre.data[i] = glambda.data[i] * l_i * (1.0 - l_i);
            grads.b_gate.data[i] += gpre.data[i];
        }
        outer_acc(grads.w_gate, gpre, rec.x);
        gemv_t_acc(cell.w_gate, gpre, input_grads[t]);
        outer_acc(grads.u_gate, gpre, prev.h);

        gh.zero();
        gemv_t_acc(cell.u_gate, gpre, gh);  // into h_{t-1}
        gc1 = std::move(next_gc1);
        gc2 = std::move(next_gc2);
    }
}

Matrix BidirTape::state(std::size_t t) const {
    std::size_t l = length();
    std::size_t d = fwd.hidden_dim;
    Matrix out(2 * d, 1);
    const Matrix& hf = fwd.h(t);
    const Matrix& hb = bwd.h(l - 1 - t);
    for (std::size_t i = 0; i < d; ++i) out.data[i] = hf.data[i];
    for (std::size_t i = 0; i < d; ++i) out.data[d + i] = hb.data[i];
    return out;
}

BidirTape bidir_forward(const RcnnCell& fwd, const RcnnCell& bwd, const Seq& xs) {
    if (fwd.input_dim != bwd.input_dim) {
        throw ShapeError("bidir_forward: cells disagree on input dim");
    }
    BidirTape tape;
    tape.fwd = rcnn_forward(fwd, xs);
    Seq reversed(xs.rbegin(), xs.rend());
    tape.bwd = rcnn_forward(bwd, reversed);
    return tape;
}

void bidir_backward(const RcnnCell& fwd, const RcnnCell& bwd, const BidirTape& tape,
                    const Seq& upstream, RcnnGrads& fwd_grads, RcnnGrads& bwd_grads,
                    Seq& input_grads) {
    std::size_t l = tape.length();
    std::size_t d = fwd.hidden_dim;
    Seq up_fwd(l), up_bwd(l);
    for (std::size_t t = 0; t < l; ++t) {
        if (upstream[t].size() == 0) continue;
        if (upstream[t].rows != 2 * d || upstream[t].cols != 1) {
            throw ShapeError("bidir_backward: upstream " + upstream[t].shape_str());
        }
        Matrix uf(d, 1), ub(d, 1);
        for (std::size_t i = 0; i < d; ++i) uf.data[i] = upstream[t].data[i];
        for (std::size_t i = 0; i < d; ++i) ub.data[i] = upstream[t].data[d + i];
        up_fwd[t] = std::move(uf);
        up_bwd[l - 1 - t] = std::move(ub);  // bwd tape runs in reverse scan order
    }
    rcnn_backward(fwd, tape.fwd, up_fwd, fwd_grads, input_grads);

    Seq rev_input_grads = make_zero_seq(l, fwd.input_dim);
    rcnn_backward(bwd, tape.bwd, up_bwd, bwd_grads, rev_input_grads);
    for (std::size_t t = 0; t < l; ++t) {
        axpy(input_grads[t], 1.0, rev_input_grads[l - 1 - t]);
    }
}

Matrix dropout_mask(Rng& rng, std::size_t len, double rate) {
    if (rate < 0.0 || rate >= 1.0) {
        throw NumericError("dropout_mask: rate must be in [0, 1)");
    }
    Matrix mask(len, 1);
    double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < len; ++i) {
        mask.data[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    }
    return mask;
}

StackTape stack_forward(const std::vector<RcnnCell>& cells, const Seq& xs, double dropout_rate,
                        bool train, Rng* rng) {
    StackTape tape;
    tape.layers.reserve(cells.size());
    tape.masks.resize(cells.size());
    const Seq* input = &xs;
    Seq buffer;
    for (std::size_t layer = 0; layer < cells.size(); ++layer) {
        if (layer > 0) {
            buffer.clear();
            buffer.reserve(tape.layers[layer - 1].length());
            bool drop = train && dropout_rate > 0.0;
            if (drop) tape.masks[layer].reserve(tape.layers[layer - 1].length());
            for (std::size_t t = 0; t < tape.layers[layer - 1].length(); ++t) {
                Matrix h = tape.layers[layer - 1].h(t);
                if (drop) {
                    Matrix mask = dropout_mask(*rng, h.rows, dropout_rate);
                    for (std::size_t i = 0; i < h.rows; ++i) h.data[i] *= mask.data[i];
                    tape.masks[layer].push_back(std::move(mask));
                }
                buffer.push_back(std::move(h));
            }
            input = &buffer;
        }
        tape.layers.push_back(rcnn_forward(cells[layer], *input));
    }
    return tape;
}

void stack_backward(const std::vector<RcnnCell>& cells, const StackTape& tape,
                    const Seq& upstream_top, std::vector<RcnnGrads>& grads, Seq& input_grads) {
    std::size_t depth = cells.size();
    std::size_t l = tape.length();
    Seq upstream = upstream_top;
    for (std::size_t layer = depth; layer-- > 0;) {
        Seq layer_input_grads =
            (layer == 0) ? std::move(input_grads) : make_zero_seq(l, cells[layer].input_dim);
        rcnn_backward(cells[layer], tape.layers[layer], upstream, grads[layer],
                      layer_input_grads);
        if (layer == 0) {
            input_grads = std::move(layer_input_grads);
            break;
        }
        if (!tape.masks[layer].empty()) {
            for (std::size_t t = 0; t < l; ++t) {
                for (std::size_t i = 0; i < layer_input_grads[t].size(); ++i) {
                    layer_input_grads[t].data[i] *= tape.masks[layer][t].data[i];
                }
            }
        }
        upstream = std::move(layer_input_grads);
    }
}

Seq make_zero_seq(std::size_t len, std::size_t dim) {
    Seq out;
    out.reserve(len);
    for (std::size_t t = 0; t < len; ++t) out.emplace_back(dim, 1);
    return out;
}

}  // namespace rationale
