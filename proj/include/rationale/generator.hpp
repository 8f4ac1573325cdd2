#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rationale/numeric.hpp"
#include "rationale/units.hpp"

namespace rationale {

// Binary selection mask over input tokens; entries are 0 or 1.
using RationaleMask = std::vector<std::uint8_t>;

std::size_t count_ones(const RationaleMask& z);

enum class GenMode { independent, dependent };

// Selection distribution p(z|x). The trunk is a shared bidirectional RCNN;
// the output layer maps [h_fwd; h_bwd] (plus the coupling state s_{t-1} in
// dependent mode) to a per-token selection probability.
struct GeneratorParams {
    GenMode mode = GenMode::independent;
    Matrix emb;      // (V, d_in)
    RcnnCell fwd;
    RcnnCell bwd;
    Matrix w_out;    // (1, 2d) independent, (1, 2d + dep_hidden) dependent
    Matrix b_out;    // (1, 1)
    RcnnCell dep;    // coupling cell, input [h_fwd; h_bwd; z_t], dependent only
    std::size_t dep_hidden = 0;

    std::size_t trunk_dim() const { return fwd.hidden_dim; }

    static GeneratorParams init(GenMode mode, std::size_t vocab, std::size_t d_in, std::size_t d,
                                std::size_t dep_hidden, Rng& rng);
    static GeneratorParams zeros_like(const GeneratorParams& p);

    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn("emb", emb);
        fwd.for_each_param([&](const char* n, Matrix& m) { fn((std::string("fwd.") + n).c_str(), m); });
        bwd.for_each_param([&](const char* n, Matrix& m) { fn((std::string("bwd.") + n).c_str(), m); });
        fn("out.w", w_out);
        fn("out.b", b_out);
        if (mode == GenMode::dependent) {
            dep.for_each_param(
                [&](const char* n, Matrix& m) { fn((std::string("dep.") + n).c_str(), m); });
        }
    }
};

using GeneratorGrads = GeneratorParams;

// Per-token selection probabilities for the independent mode. Tests may build
// one directly from raw probabilities; dependent-mode conditionals are
// evaluated through the params (see sample_dependent / log_prob).
struct SelectionDist {
    std::vector<double> probs;

    SelectionDist() = default;
    explicit SelectionDist(std::vector<double> p) : probs(std::move(p)) {}
    std::size_t length() const { return probs.size(); }
};

// Trunk forward pass shared by every generator operation.
struct GenForward {
    std::vector<int> ids;
    Seq xs;                     // embedded inputs
    BidirTape trunk;
    Seq states;                 // [h_fwd_t; h_bwd_t], (2d x 1)
    std::vector<double> probs;  // filled in independent mode

    std::size_t length() const { return ids.size(); }
};

GenForward gen_forward(const GeneratorParams& p, const std::vector<int>& ids);

SelectionDist probs_independent(const GeneratorParams& p, const std::vector<int>& ids);

RationaleMask sample_independent(const SelectionDist& dist, Rng& rng);

// Dependent-mode scan record for one realized mask.
struct DepTrace {
    RcnnTape tape;              // coupling cell tape over [u_t; z_t]
    std::vector<double> probs;  // conditional p(z_t = 1 | x, z_<t) along the path
};

// Exact log p(z|x) under the active mode.
double log_prob(const GeneratorParams& p, const std::vector<int>& ids, const RationaleMask& z);

// Ancestral sampling; returns the mask and its exact log-probability.
std::pair<RationaleMask, double> sample_dependent(const GeneratorParams& p,
                                                  const std::vector<int>& ids, Rng& rng);

// Independent: threshold at 0.5. Dependent: greedy, conditioning on each
// chosen bit. Ties at p = 0.5 select 0.
RationaleMask decode_deterministic(const GeneratorParams& p, const std::vector<int>& ids);

// All 2^l masks with exact probabilities; refuses l > max_len.
std::vector<std::pair<RationaleMask, double>> enumerate_all(const GeneratorParams& p,
                                                            const std::vector<int>& ids,
                                                            std::size_t max_len = 12);

// Reverse-mode gradient of log p(z|x) through the trunk (and coupling path).
GeneratorGrads grad_log_prob(const GeneratorParams& p, const std::vector<int>& ids,
                             const RationaleMask& z);

// Batched score-function accumulation: given per-sample weights w_k, adds
// sum_k w_k * d log p(z_k | x) / d theta_g to grads. The trunk backward runs
// once over the accumulated upstream, which is exact because trunk states do
// not depend on z.
struct WeightedMask {
    const RationaleMask* z;
    const DepTrace* trace;  // required in dependent mode
    double weight;
};

void accumulate_score_gradients(const GeneratorParams& p, const GenForward& fwd,
                                const std::vector<WeightedMask>& samples, GeneratorGrads& grads);

// Internal helpers shared with sampling/scan paths; exposed for reuse.
double dep_logit(const GeneratorParams& p, const Matrix& state_u, const Matrix& s_prev);
std::pair<RationaleMask, double> dep_scan(const GeneratorParams& p, const GenForward& fwd,
                                          const std::function<int(std::size_t, double)>& choose,
                                          DepTrace* trace);

}  // namespace rationale
