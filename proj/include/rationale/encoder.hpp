#pragma once

#include <vector>

#include "rationale/generator.hpp"
#include "rationale/numeric.hpp"
#include "rationale/units.hpp"

namespace rationale {

// Regression encoder: stacked RCNN over the input, sigmoid output layer on
// the final state. Predictions live strictly in (0,1)^m.
struct EncoderParams {
    Matrix emb;                  // (V, d_in)
    std::vector<RcnnCell> stack;
    Matrix w_out;                // (m, d_top)
    Matrix b_out;                // (m, 1)
    double dropout_rate = 0.0;   // applied between stacked layers at train time

    std::size_t output_dim() const { return w_out.rows; }
    std::size_t top_dim() const { return stack.back().hidden_dim; }

    static EncoderParams init(std::size_t vocab, std::size_t d_in, const StackSpec& spec,
                              std::size_t m, Rng& rng);
    static EncoderParams zeros_like(const EncoderParams& p);

    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn("emb", emb);
        for (std::size_t i = 0; i < stack.size(); ++i) {
            std::string prefix = "stack" + std::to_string(i) + ".";
            stack[i].for_each_param(
                [&](const char* n, Matrix& m) { fn((prefix + n).c_str(), m); });
        }
        fn("out.w", w_out);
        fn("out.b", b_out);
    }
};

using EncoderGrads = EncoderParams;

// Compacted subsequence of tokens with z_t = 1, original order preserved.
std::vector<int> apply_rationale(const std::vector<int>& ids, const RationaleMask& z);

struct EncForward {
    std::vector<int> ids;
    Seq xs;
    StackTape stack;
    Matrix h_top;   // final top-layer state (zero vector for empty input)
    Matrix y_hat;   // sigmoid output, (m x 1)
};

// Empty input is legal and yields sigmoid(b_out).
EncForward encode(const EncoderParams& p, const std::vector<int>& ids, bool train = false,
                  Rng* rng = nullptr);

// Squared error sum_j (y_hat_j - y_j)^2.
double loss_l2(const Matrix& y_hat, const Matrix& y);

// Gradient of loss_l2(encode(ids), y) w.r.t. all encoder parameters.
void encode_backward(const EncoderParams& p, const EncForward& fwd, const Matrix& y,
                     EncoderGrads& grads);

// Backward from an arbitrary gradient on y_hat (used by retrieval paths that
// replace the L2 loss).
void encode_backward_from(const EncoderParams& p, const EncForward& fwd, const Matrix& g_y_hat,
                          EncoderGrads& grads);

// Attention baseline: softmax-normalized scores over bidirectional states,
// context = weighted average of states, sigmoid output layer.
struct AttentionParams {
    Matrix emb;     // (V, d_in)
    RcnnCell fwd;
    RcnnCell bwd;
    Matrix v;       // (1, 2d) scoring vector
    Matrix v_b;     // (1, 1)
    Matrix w_out;   // (m, 2d)
    Matrix b_out;   // (m, 1)

    static AttentionParams init(std::size_t vocab, std::size_t d_in, std::size_t d,
                                std::size_t m, Rng& rng);
    static AttentionParams zeros_like(const AttentionParams& p);

    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn("emb", emb);
        fwd.for_each_param([&](const char* n, Matrix& m) { fn((std::string("fwd.") + n).c_str(), m); });
        bwd.for_each_param([&](const char* n, Matrix& m) { fn((std::string("bwd.") + n).c_str(), m); });
        fn("score.v", v);
        fn("score.b", v_b);
        fn("out.w", w_out);
        fn("out.b", b_out);
    }
};

using AttentionGrads = AttentionParams;

struct AttnForward {
    std::vector<int> ids;
    Seq xs;
    BidirTape trunk;
    Seq states;                   // (2d x 1) per position
    std::vector<double> weights;  // softmax attention, sums to 1
    Matrix context;               // (2d x 1)
    Matrix y_hat;                 // (m x 1)
};

// Refuses empty input (no states to average).
AttnForward attention_encode(const AttentionParams& p, const std::vector<int>& ids);

void attention_backward(const AttentionParams& p, const AttnForward& fwd, const Matrix& y,
                        AttentionGrads& grads);

// Mask with 1 at the k largest weights; ties broken by earlier position.
RationaleMask attention_select(const std::vector<double>& weights, std::size_t k);

}  // namespace rationale
