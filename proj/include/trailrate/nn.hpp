// Recurrent and attention building blocks on top of the graph.
#pragma once

#include <string>
#include <vector>

#include "trailrate/tensor.hpp"

namespace trailrate {

// Single-layer LSTM. Gate weights are packed [input, forget, cell, output]
// along the row axis: wx is (4*hidden x input), wh is (4*hidden x hidden),
// bias is 4*hidden. The forget-gate bias section is initialized to 1.
struct LstmParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Tensor wx, wh, bias;

    LstmParams() = default;
    LstmParams(std::size_t in, std::size_t hidden) : input_dim(in), hidden_dim(hidden) {
        wx = Tensor::zeros({4 * hidden, in});
        wh = Tensor::zeros({4 * hidden, hidden});
        bias = Tensor::zeros({4 * hidden});
    }

    void init(Rng& rng) {
        wx.init_glorot(input_dim, hidden_dim, rng);
        wh.init_glorot(hidden_dim, hidden_dim, rng);
        std::fill(bias.data.begin(), bias.data.end(), 0.0);
        for (std::size_t i = hidden_dim; i < 2 * hidden_dim; ++i) bias.data[i] = 1.0;
    }

    void register_params(const std::string& prefix, ParamList& out) {
        out.emplace_back(prefix + ".wx", &wx);
        out.emplace_back(prefix + ".wh", &wh);
        out.emplace_back(prefix + ".bias", &bias);
    }
};

// Additive scoring: score_t = v . tanh(W h_t). Score dimension equals the
// hidden dimension.
struct AttentionParams {
    std::size_t hidden_dim = 0;
    Tensor w, v;

    AttentionParams() = default;
    explicit AttentionParams(std::size_t hidden) : hidden_dim(hidden) {
        w = Tensor::zeros({hidden, hidden});
        v = Tensor::zeros({hidden});
    }

    void init(Rng& rng) {
        w.init_glorot(hidden_dim, hidden_dim, rng);
        v.init_glorot(hidden_dim, 1, rng);
    }

    void register_params(const std::string& prefix, ParamList& out) {
        out.emplace_back(prefix + ".w", &w);
        out.emplace_back(prefix + ".v", &v);
    }
};

struct DenseParams {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    Tensor w, b;

    DenseParams() = default;
    DenseParams(std::size_t in, std::size_t out) : input_dim(in), output_dim(out) {
        w = Tensor::zeros({out, in});
        b = Tensor::zeros({out});
    }

    void init(Rng& rng) {
        w.init_glorot(input_dim, output_dim, rng);
        std::fill(b.data.begin(), b.data.end(), 0.0);
    }

    void register_params(const std::string& prefix, ParamList& out) {
        out.emplace_back(prefix + ".w", &w);
        out.emplace_back(prefix + ".b", &b);
    }
};

inline Var dense(Graph& g, DenseParams& p, Var x) {
    return g.add(g.matvec(g.leaf(p.w), x), g.leaf(p.b));
}

// Runs the LSTM recurrence over a sequence of step inputs and returns
// every step's hidden state. Hidden and cell start at zero.
inline std::vector<Var> lstm_sequence(Graph& g, LstmParams& p, std::span<const Var> inputs) {
    if (inputs.empty()) throw ShapeError("lstm_sequence on empty sequence");
    const auto h = static_cast<std::int32_t>(p.hidden_dim);
    Var wx = g.leaf(p.wx);
    Var wh = g.leaf(p.wh);
    Var bias = g.leaf(p.bias);
    Var hprev = g.input_zeros(p.hidden_dim);
    Var cprev = g.input_zeros(p.hidden_dim);
    std::vector<Var> hs;
    hs.reserve(inputs.size());
    for (Var x : inputs) {
        Var pre = g.add(g.add(g.matvec(wx, x), g.matvec(wh, hprev)), bias);
        Var gi = g.sigmoid(g.slice(pre, 0, h));
        Var gf = g.sigmoid(g.slice(pre, h, h));
        Var gc = g.tanh(g.slice(pre, 2 * h, h));
        Var go = g.sigmoid(g.slice(pre, 3 * h, h));
        Var c = g.add(g.mul(gf, cprev), g.mul(gi, gc));
        Var hcur = g.mul(go, g.tanh(c));
        hs.push_back(hcur);
        hprev = hcur;
        cprev = c;
    }
    return hs;
}

struct AttentionOut {
    Var context;
    Var weights;
};

// weights = softmax over score_t, context = sum_t weights_t h_t.
inline AttentionOut attention(Graph& g, AttentionParams& p, std::span<const Var> hidden) {
    if (hidden.empty()) throw ShapeError("attention on empty sequence");
    Var w = g.leaf(p.w);
    Var v = g.leaf(p.v);
    std::vector<Var> scores;
    scores.reserve(hidden.size());
    for (Var h : hidden) scores.push_back(g.dot(v, g.tanh(g.matvec(w, h))));
    Var weights = g.softmax(g.concat(scores));
    Var context = g.scale_by(hidden[0], g.slice(weights, 0, 1));
    for (std::size_t t = 1; t < hidden.size(); ++t)
        context = g.add(context, g.scale_by(hidden[t], g.slice(weights, static_cast<std::int32_t>(t), 1)));
    return {context, weights};
}

}  // namespace trailrate
