// Central finite-difference verification of analytic gradients.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trailrate/tensor.hpp"

namespace trailrate {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;
    bool pass = true;

    const GradCheckEntry& entry(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw ShapeError("no grad-check entry named " + name);
    }
};

struct GradCheckOptions {
    double tolerance = 1e-4;
    double step = 1e-5;
    // Tensors with more elements than this get a seeded random subsample
    // (never fewer than this many elements).
    std::size_t max_per_tensor = 200;
    std::uint64_t seed = 0x6f7261636c65ull;
};

// build_loss must construct the full forward pass on the given graph from
// the current parameter values and return the scalar loss node. The same
// closure serves both the analytic pass (with backward) and the perturbed
// numeric re-evaluations, so the comparison is analytic-vs-central-difference
// on an identical function.
inline GradCheckReport grad_check(const ParamList& params, const std::function<Var(Graph&)>& build_loss,
                                  const GradCheckOptions& opts = {}) {
    Graph g;
    for (const auto& [name, t] : params) {
        if (!t->grad_enabled()) t->enable_grad();
        t->zero_grad();
    }
    Var loss = build_loss(g);
    g.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, t] : params) analytic.push_back(t->grad);

    auto eval = [&]() {
        g.reset();
        return g.scalar(build_loss(g));
    };

    GradCheckReport report;
    Rng rng(opts.seed);
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p].second;
        GradCheckEntry entry;
        entry.name = params[p].first;

        std::vector<std::size_t> indices;
        if (t.numel() <= opts.max_per_tensor) {
            indices.resize(t.numel());
            for (std::size_t i = 0; i < t.numel(); ++i) indices[i] = i;
        } else {
            for (std::size_t i = 0; i < opts.max_per_tensor; ++i)
                indices.push_back(static_cast<std::size_t>(rng.below(t.numel())));
        }

        for (std::size_t idx : indices) {
            const double keep = t.data[idx];
            t.data[idx] = keep + opts.step;
            const double up = eval();
            t.data[idx] = keep - opts.step;
            const double down = eval();
            t.data[idx] = keep;
            const double numeric = (up - down) / (2.0 * opts.step);
            const double a = analytic[p][idx];
            const double rel = std::abs(a - numeric) / std::max(1e-6, std::abs(a) + std::abs(numeric));
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
            ++entry.checked;
        }
        entry.pass = entry.max_rel_err < opts.tolerance;
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.pass = report.pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace trailrate
