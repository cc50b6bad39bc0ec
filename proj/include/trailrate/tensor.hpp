// Dense tensors and reverse-mode differentiation.
//
// Tensor is a plain value type (shape + row-major doubles + optional grad
// accumulator). Graph is a per-forward-pass tape: operations execute
// eagerly and append one node each, so the recording order is already a
// topological order and backward() is a single reverse sweep. Node values
// and gradients live in flat buffers owned by the graph; reset() rewinds
// the buffers without freeing, so steady-state training does no
// allocation. Cycles are impossible by construction (an op can only refer
// to ids recorded before it).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trailrate/common.hpp"
#include "trailrate/rng.hpp"

namespace trailrate {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty unless gradients are tracked

    Tensor() = default;

    Tensor(std::vector<std::size_t> shp, std::vector<double> values) : shape(std::move(shp)), data(std::move(values)) {
        if (numel_of(shape) != data.size()) throw ShapeError("tensor data length does not match shape");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& shp) {
        std::size_t n = 1;
        for (std::size_t d : shp) {
            if (d == 0) throw ShapeError("zero extent in tensor shape");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> shp) {
        std::size_t n = numel_of(shp);
        return Tensor(std::move(shp), std::vector<double>(n, 0.0));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t numel() const { return data.size(); }
    bool is_matrix() const { return shape.size() == 2; }
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.size() == 2 ? shape[1] : 1; }

    bool grad_enabled() const { return !grad.empty(); }
    void enable_grad() { grad.assign(data.size(), 0.0); }
    void disable_grad() { grad.clear(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    void check_finite(const std::string& name) const {
        for (double v : data)
            if (!std::isfinite(v)) throw NumericError("non-finite value in tensor " + name);
    }

    // Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
    void init_glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
        const double a = std::sqrt(6.0 / double(fan_in + fan_out));
        for (double& v : data) v = rng.uniform(-a, a);
    }
};

class Graph;

struct Var {
    Graph* g = nullptr;
    std::int32_t id = -1;

    bool valid() const { return g != nullptr && id >= 0; }
};

class Graph {
    enum class Op : std::uint8_t {
        Leaf,
        Input,
        MatVec,
        Add,
        Mul,
        Tanh,
        Sigmoid,
        Softmax,
        Slice,
        Concat,
        Dot,
        ScaleBy,
        ScaleConst,
        Sum,
        Mean,
        Row,
        BceLogits,
        SoftmaxCe,
    };

    struct Node {
        Op op;
        std::int32_t p0 = -1, p1 = -1;
        std::int32_t off = -1;   // value/grad offset into the buffers (-1: leaf, value lives in tensor)
        std::int32_t len = 0;
        std::int32_t a0 = 0, a1 = 0;  // op-specific: dims, slice offset, pool offset/count, row index
        std::int32_t aux = -1;        // offset into aux pool (loss targets)
        Tensor* leaf = nullptr;
    };

public:
    void reset() {
        nodes_.clear();
        pool_.clear();
        aux_.clear();
        used_ = 0;
    }

    std::size_t size() const { return nodes_.size(); }

    Var leaf(Tensor& t) {
        Node n{Op::Leaf};
        n.len = static_cast<std::int32_t>(t.numel());
        n.leaf = &t;
        return push(n);
    }

    Var input(std::span<const double> v) {
        Node n{Op::Input};
        n.len = static_cast<std::int32_t>(v.size());
        n.off = alloc(n.len);
        std::copy(v.begin(), v.end(), vbuf_.begin() + n.off);
        return push(n);
    }

    Var input_zeros(std::size_t len) {
        Node n{Op::Input};
        n.len = static_cast<std::int32_t>(len);
        n.off = alloc(n.len);
        std::fill_n(vbuf_.begin() + n.off, len, 0.0);
        return push(n);
    }

    Var input_scalar(double v) { return input(std::span<const double>(&v, 1)); }

    // y = W x with W a 2-D parameter leaf, x a vector.
    Var matvec(Var W, Var x) {
        const Node& wn = node(W);
        if (wn.op != Op::Leaf) throw ShapeError("matvec expects a tensor leaf matrix");
        const Tensor& wt = *wn.leaf;
        if (!wt.is_matrix()) throw ShapeError("matvec weight must be 2-D");
        const auto m = static_cast<std::int32_t>(wt.rows());
        const auto k = static_cast<std::int32_t>(wt.cols());
        if (k != node(x).len) throw ShapeError("matvec dimension mismatch");
        Node n{Op::MatVec, W.id, x.id};
        n.len = m;
        n.a0 = m;
        n.a1 = k;
        n.off = alloc(m);
        const double* wp = wt.data.data();
        const double* xp = val_ptr(x.id);
        double* yp = vbuf_.data() + n.off;
        for (std::int32_t i = 0; i < m; ++i) {
            const double* row = wp + std::size_t(i) * k;
            double acc = 0.0;
            for (std::int32_t j = 0; j < k; ++j) acc += row[j] * xp[j];
            yp[i] = acc;
        }
        return push(n);
    }

    Var add(Var a, Var b) {
        auto [n, ap, bp, out] = binary(Op::Add, a, b);
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = ap[i] + bp[i];
        return push(n);
    }

    Var mul(Var a, Var b) {
        auto [n, ap, bp, out] = binary(Op::Mul, a, b);
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = ap[i] * bp[i];
        return push(n);
    }

    Var tanh(Var a) {
        auto [n, ap, out] = unary(Op::Tanh, a);
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = std::tanh(ap[i]);
        return push(n);
    }

    Var sigmoid(Var a) {
        auto [n, ap, out] = unary(Op::Sigmoid, a);
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = sigmoid_scalar(ap[i]);
        return push(n);
    }

    // Stable softmax over a vector.
    Var softmax(Var a) {
        auto [n, ap, out] = unary(Op::Softmax, a);
        double mx = ap[0];
        for (std::int32_t i = 1; i < n.len; ++i) mx = std::max(mx, ap[i]);
        double tot = 0.0;
        for (std::int32_t i = 0; i < n.len; ++i) {
            out[i] = std::exp(ap[i] - mx);
            tot += out[i];
        }
        for (std::int32_t i = 0; i < n.len; ++i) out[i] /= tot;
        return push(n);
    }

    Var slice(Var a, std::int32_t offset, std::int32_t len) {
        if (offset < 0 || len <= 0 || offset + len > node(a).len) throw ShapeError("slice out of range");
        Node n{Op::Slice, a.id};
        n.len = len;
        n.a0 = offset;
        n.off = alloc(len);
        const double* ap = val_ptr(a.id) + offset;
        std::copy_n(ap, len, vbuf_.begin() + n.off);
        return push(n);
    }

    Var concat(std::span<const Var> parts) {
        if (parts.empty()) throw ShapeError("concat of zero vectors");
        Node n{Op::Concat};
        n.a0 = static_cast<std::int32_t>(pool_.size());
        n.a1 = static_cast<std::int32_t>(parts.size());
        std::int32_t total = 0;
        for (const Var& p : parts) {
            pool_.push_back(p.id);
            total += node(p).len;
        }
        n.len = total;
        n.off = alloc(total);
        double* out = vbuf_.data() + n.off;
        for (const Var& p : parts) {
            const std::int32_t l = node(p).len;
            std::copy_n(val_ptr(p.id), l, out);
            out += l;
        }
        return push(n);
    }

    Var concat(Var a, Var b) {
        const Var parts[2] = {a, b};
        return concat(std::span<const Var>(parts, 2));
    }

    Var dot(Var a, Var b) {
        if (node(a).len != node(b).len) throw ShapeError("dot dimension mismatch");
        Node n{Op::Dot, a.id, b.id};
        n.len = 1;
        n.off = alloc(1);
        const double* ap = val_ptr(a.id);
        const double* bp = val_ptr(b.id);
        double acc = 0.0;
        for (std::int32_t i = 0; i < node(a).len; ++i) acc += ap[i] * bp[i];
        vbuf_[n.off] = acc;
        return push(n);
    }

    // out = a * s where s is a length-1 node.
    Var scale_by(Var a, Var s) {
        if (node(s).len != 1) throw ShapeError("scale_by expects a scalar multiplier");
        Node n{Op::ScaleBy, a.id, s.id};
        n.len = node(a).len;
        n.off = alloc(n.len);
        const double sv = *val_ptr(s.id);
        const double* ap = val_ptr(a.id);
        double* out = vbuf_.data() + n.off;
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = ap[i] * sv;
        return push(n);
    }

    Var scale_const(Var a, double c) {
        Node n{Op::ScaleConst, a.id};
        n.len = node(a).len;
        n.off = alloc(n.len);
        n.aux = static_cast<std::int32_t>(aux_.size());
        aux_.push_back(c);
        const double* ap = val_ptr(a.id);
        double* out = vbuf_.data() + n.off;
        for (std::int32_t i = 0; i < n.len; ++i) out[i] = ap[i] * c;
        return push(n);
    }

    Var sum(Var a) {
        Node n{Op::Sum, a.id};
        n.len = 1;
        n.off = alloc(1);
        const double* ap = val_ptr(a.id);
        double acc = 0.0;
        for (std::int32_t i = 0; i < node(a).len; ++i) acc += ap[i];
        vbuf_[n.off] = acc;
        return push(n);
    }

    Var mean(Var a) {
        Node n{Op::Mean, a.id};
        n.len = 1;
        n.off = alloc(1);
        const double* ap = val_ptr(a.id);
        double acc = 0.0;
        for (std::int32_t i = 0; i < node(a).len; ++i) acc += ap[i];
        vbuf_[n.off] = acc / double(node(a).len);
        return push(n);
    }

    // Row r of a 2-D leaf (embedding lookup); grad scatters into that row.
    Var row(Var table, std::size_t r) {
        const Node& tn = node(table);
        if (tn.op != Op::Leaf || !tn.leaf->is_matrix()) throw ShapeError("row expects a 2-D tensor leaf");
        if (r >= tn.leaf->rows()) throw ShapeError("row index out of range");
        Node n{Op::Row, table.id};
        n.len = static_cast<std::int32_t>(tn.leaf->cols());
        n.a0 = static_cast<std::int32_t>(r);
        n.off = alloc(n.len);
        std::copy_n(tn.leaf->data.data() + r * tn.leaf->cols(), n.len, vbuf_.begin() + n.off);
        return push(n);
    }

    // Mean over units of per-unit binary cross-entropy on raw logits,
    // computed in the stable max(l,0) - l: t + log(1+exp(-|l|)) form.
    Var bce_with_logits(Var logits, std::span<const double> targets) {
        if (node(logits).len != static_cast<std::int32_t>(targets.size()))
            throw ShapeError("bce_with_logits target length mismatch");
        Node n{Op::BceLogits, logits.id};
        n.len = 1;
        n.aux = static_cast<std::int32_t>(aux_.size());
        aux_.insert(aux_.end(), targets.begin(), targets.end());
        n.off = alloc(1);
        const double* lp = val_ptr(logits.id);
        const std::int32_t k = node(logits).len;
        double acc = 0.0;
        for (std::int32_t i = 0; i < k; ++i) {
            const double l = lp[i];
            acc += std::max(l, 0.0) - l * targets[i] + std::log1p(std::exp(-std::abs(l)));
        }
        vbuf_[n.off] = acc / double(k);
        return push(n);
    }

    // Cross-entropy of softmax(logits) against a target distribution.
    Var softmax_cross_entropy(Var logits, std::span<const double> targets) {
        if (node(logits).len != static_cast<std::int32_t>(targets.size()))
            throw ShapeError("softmax_cross_entropy target length mismatch");
        Node n{Op::SoftmaxCe, logits.id};
        n.len = 1;
        n.aux = static_cast<std::int32_t>(aux_.size());
        aux_.insert(aux_.end(), targets.begin(), targets.end());
        n.off = alloc(1);
        const double* lp = val_ptr(logits.id);
        const std::int32_t k = node(logits).len;
        double mx = lp[0];
        for (std::int32_t i = 1; i < k; ++i) mx = std::max(mx, lp[i]);
        double lse = 0.0, dotv = 0.0, tsum = 0.0;
        for (std::int32_t i = 0; i < k; ++i) {
            lse += std::exp(lp[i] - mx);
            dotv += targets[i] * lp[i];
            tsum += targets[i];
        }
        vbuf_[n.off] = tsum * (mx + std::log(lse)) - dotv;
        return push(n);
    }

    std::span<const double> value(Var v) const {
        const Node& n = node(v);
        return {val_ptr(v.id), static_cast<std::size_t>(n.len)};
    }

    double scalar(Var v) const {
        if (node(v).len != 1) throw ShapeError("scalar() on non-scalar node");
        return *val_ptr(v.id);
    }

    std::vector<double> values(Var v) const {
        auto s = value(v);
        return {s.begin(), s.end()};
    }

    // Accumulates d(loss)/d(parameter) into every reachable leaf tensor
    // that has grad enabled. Repeated calls without zero_grad accumulate.
    void backward(Var loss) {
        if (node(loss).len != 1) throw ShapeError("backward requires a scalar loss");
        if (node(loss).off < 0) throw ShapeError("backward on a bare leaf");
        gbuf_.assign(std::max<std::size_t>(used_, 1), 0.0);
        gbuf_[node(loss).off] = 1.0;
        for (std::int32_t id = loss.id; id >= 0; --id) {
            const Node& n = nodes_[id];
            if (n.op == Op::Leaf || n.op == Op::Input) continue;
            backprop(n);
        }
    }

private:
    friend struct Var;

    struct BinParts {
        Node n;
        const double* ap;
        const double* bp;
        double* out;
    };
    struct UnParts {
        Node n;
        const double* ap;
        double* out;
    };

    BinParts binary(Op op, Var a, Var b) {
        if (node(a).len != node(b).len) throw ShapeError("elementwise dimension mismatch");
        Node n{op, a.id, b.id};
        n.len = node(a).len;
        n.off = alloc(n.len);
        return {n, val_ptr(a.id), val_ptr(b.id), vbuf_.data() + n.off};
    }

    UnParts unary(Op op, Var a) {
        Node n{op, a.id};
        n.len = node(a).len;
        n.off = alloc(n.len);
        return {n, val_ptr(a.id), vbuf_.data() + n.off};
    }

    static double sigmoid_scalar(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

    Var push(const Node& n) {
        nodes_.push_back(n);
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    std::int32_t alloc(std::int32_t len) {
        const std::size_t off = used_;
        used_ += static_cast<std::size_t>(len);
        if (vbuf_.size() < used_) vbuf_.resize(std::max(used_, vbuf_.size() * 2));
        return static_cast<std::int32_t>(off);
    }

    const Node& node(Var v) const {
        if (v.g != this) throw ShapeError("variable belongs to a different graph");
        return nodes_.at(static_cast<std::size_t>(v.id));
    }

    const double* val_ptr(std::int32_t id) const {
        const Node& n = nodes_[id];
        return n.op == Op::Leaf ? n.leaf->data.data() : vbuf_.data() + n.off;
    }

    // Gradient sink of a node: buffer region, or the leaf tensor's
    // accumulator (null when the leaf does not track gradients).
    double* grad_ptr(std::int32_t id) {
        Node& n = nodes_[id];
        if (n.op == Op::Leaf) return n.leaf->grad_enabled() ? n.leaf->grad.data() : nullptr;
        return gbuf_.data() + n.off;
    }

    void backprop(const Node& n) {
        const double* g = gbuf_.data() + n.off;
        switch (n.op) {
            case Op::MatVec: {
                const std::int32_t m = n.a0, k = n.a1;
                const Tensor& wt = *nodes_[n.p0].leaf;
                const double* xp = val_ptr(n.p1);
                double* gw = grad_ptr(n.p0);
                double* gx = grad_ptr(n.p1);
                if (gw != nullptr) {
                    for (std::int32_t i = 0; i < m; ++i) {
                        const double gi = g[i];
                        if (gi == 0.0) continue;
                        double* wrow = gw + std::size_t(i) * k;
                        for (std::int32_t j = 0; j < k; ++j) wrow[j] += gi * xp[j];
                    }
                }
                if (gx != nullptr) {
                    const double* wp = wt.data.data();
                    for (std::int32_t i = 0; i < m; ++i) {
                        const double gi = g[i];
                        if (gi == 0.0) continue;
                        const double* wrow = wp + std::size_t(i) * k;
                        for (std::int32_t j = 0; j < k; ++j) gx[j] += gi * wrow[j];
                    }
                }
                break;
            }
            case Op::Add: {
                accum(n.p0, g, n.len);
                accum(n.p1, g, n.len);
                break;
            }
            case Op::Mul: {
                const double* ap = val_ptr(n.p0);
                const double* bp = val_ptr(n.p1);
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] * bp[i];
                if (double* gb = grad_ptr(n.p1))
                    for (std::int32_t i = 0; i < n.len; ++i) gb[i] += g[i] * ap[i];
                break;
            }
            case Op::Tanh: {
                const double* y = vbuf_.data() + n.off;
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
                break;
            }
            case Op::Sigmoid: {
                const double* y = vbuf_.data() + n.off;
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
                break;
            }
            case Op::Softmax: {
                const double* y = vbuf_.data() + n.off;
                if (double* ga = grad_ptr(n.p0)) {
                    double gy = 0.0;
                    for (std::int32_t i = 0; i < n.len; ++i) gy += g[i] * y[i];
                    for (std::int32_t i = 0; i < n.len; ++i) ga[i] += y[i] * (g[i] - gy);
                }
                break;
            }
            case Op::Slice: {
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < n.len; ++i) ga[n.a0 + i] += g[i];
                break;
            }
            case Op::Concat: {
                std::int32_t off = 0;
                for (std::int32_t i = 0; i < n.a1; ++i) {
                    const std::int32_t pid = pool_[n.a0 + i];
                    const std::int32_t l = nodes_[pid].len;
                    accum(pid, g + off, l);
                    off += l;
                }
                break;
            }
            case Op::Dot: {
                const double g0 = g[0];
                const double* ap = val_ptr(n.p0);
                const double* bp = val_ptr(n.p1);
                const std::int32_t l = nodes_[n.p0].len;
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < l; ++i) ga[i] += g0 * bp[i];
                if (double* gb = grad_ptr(n.p1))
                    for (std::int32_t i = 0; i < l; ++i) gb[i] += g0 * ap[i];
                break;
            }
            case Op::ScaleBy: {
                const double sv = *val_ptr(n.p1);
                const double* ap = val_ptr(n.p0);
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] * sv;
                if (double* gs = grad_ptr(n.p1)) {
                    double acc = 0.0;
                    for (std::int32_t i = 0; i < n.len; ++i) acc += g[i] * ap[i];
                    gs[0] += acc;
                }
                break;
            }
            case Op::ScaleConst: {
                const double c = aux_[n.aux];
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < n.len; ++i) ga[i] += g[i] * c;
                break;
            }
            case Op::Sum: {
                const double g0 = g[0];
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < nodes_[n.p0].len; ++i) ga[i] += g0;
                break;
            }
            case Op::Mean: {
                const double g0 = g[0] / double(nodes_[n.p0].len);
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < nodes_[n.p0].len; ++i) ga[i] += g0;
                break;
            }
            case Op::Row: {
                Tensor& t = *nodes_[n.p0].leaf;
                if (t.grad_enabled()) {
                    double* gr = t.grad.data() + std::size_t(n.a0) * t.cols();
                    for (std::int32_t i = 0; i < n.len; ++i) gr[i] += g[i];
                }
                break;
            }
            case Op::BceLogits: {
                const double g0 = g[0] / double(nodes_[n.p0].len);
                const double* lp = val_ptr(n.p0);
                const double* t = aux_.data() + n.aux;
                if (double* ga = grad_ptr(n.p0))
                    for (std::int32_t i = 0; i < nodes_[n.p0].len; ++i)
                        ga[i] += g0 * (sigmoid_scalar(lp[i]) - t[i]);
                break;
            }
            case Op::SoftmaxCe: {
                const double g0 = g[0];
                const double* lp = val_ptr(n.p0);
                const double* t = aux_.data() + n.aux;
                const std::int32_t k = nodes_[n.p0].len;
                if (double* ga = grad_ptr(n.p0)) {
                    double mx = lp[0];
                    for (std::int32_t i = 1; i < k; ++i) mx = std::max(mx, lp[i]);
                    double z = 0.0, tsum = 0.0;
                    for (std::int32_t i = 0; i < k; ++i) {
                        z += std::exp(lp[i] - mx);
                        tsum += t[i];
                    }
                    for (std::int32_t i = 0; i < k; ++i) ga[i] += g0 * (tsum * std::exp(lp[i] - mx) / z - t[i]);
                }
                break;
            }
            case Op::Leaf:
            case Op::Input:
                break;
        }
    }

    void accum(std::int32_t id, const double* g, std::int32_t len) {
        if (double* ga = grad_ptr(id))
            for (std::int32_t i = 0; i < len; ++i) ga[i] += g[i];
    }

    std::vector<Node> nodes_;
    std::vector<std::int32_t> pool_;  // parent lists for concat
    std::vector<double> aux_;         // constants and loss targets
    std::vector<double> vbuf_;
    std::vector<double> gbuf_;
    std::size_t used_ = 0;
};

// Named parameter list; ordering is the registration order and is the
// single source of truth for init, optimizers, serialization and checks.
using ParamList = std::vector<std::pair<std::string, Tensor*>>;

}  // namespace trailrate
