// SGD and Adam updates over named parameter lists.
#pragma once

#include <vector>

#include "trailrate/tensor.hpp"

namespace trailrate {

inline void sgd_step(Tensor& t, double lr) {
    if (!t.grad_enabled()) throw NumericError("sgd_step: parameter has no gradient");
    if (lr <= 0) throw ConfigError("sgd_step: learning rate must be positive");
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] -= lr * t.grad[i];
}

struct AdamState {
    std::vector<double> m, v;
    std::uint64_t t = 0;
};

inline void adam_step(Tensor& w, AdamState& st, double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
    if (!w.grad_enabled()) throw NumericError("adam_step: parameter has no gradient");
    if (lr <= 0) throw ConfigError("adam_step: learning rate must be positive");
    if (st.m.empty()) {
        st.m.assign(w.data.size(), 0.0);
        st.v.assign(w.data.size(), 0.0);
    }
    ++st.t;
    const double c1 = 1.0 - std::pow(beta1, double(st.t));
    const double c2 = 1.0 - std::pow(beta2, double(st.t));
    for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double g = w.grad[i];
        st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
        st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * g * g;
        w.data[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
    }
}

class AdamOptimizer {
public:
    AdamOptimizer(ParamList params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), states_(params_.size()), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void zero_grad() {
        for (auto& [name, t] : params_) {
            if (!t->grad_enabled()) t->enable_grad();
            t->zero_grad();
        }
    }

    void step() {
        for (std::size_t i = 0; i < params_.size(); ++i) adam_step(*params_[i].second, states_[i], lr_, beta1_, beta2_, eps_);
    }

private:
    ParamList params_;
    std::vector<AdamState> states_;
    double lr_, beta1_, beta2_, eps_;
};

class SgdOptimizer {
public:
    SgdOptimizer(ParamList params, double lr) : params_(std::move(params)), lr_(lr) {}

    void zero_grad() {
        for (auto& [name, t] : params_) {
            if (!t->grad_enabled()) t->enable_grad();
            t->zero_grad();
        }
    }

    void step() {
        for (auto& [name, t] : params_) sgd_step(*t, lr_);
    }

private:
    ParamList params_;
    double lr_;
};

}  // namespace trailrate
