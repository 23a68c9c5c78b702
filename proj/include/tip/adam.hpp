#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tip/autodiff.hpp"
#include "tip/tensor.hpp"

namespace tip {

/// Adam with bias correction. Moment buffers are keyed by parameter name
/// and created lazily on the first step.
class AdamState {
public:
    explicit AdamState(double lr = 0.01, double beta1 = 0.9, double beta2 = 0.999,
                       double epsilon = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

    double learning_rate() const { return lr_; }
    std::size_t step_count() const { return t_; }

    /// One update over all parameters; zeroes gradients afterwards.
    void step(const std::vector<Parameter*>& params) {
        for (Parameter* p : params) {
            for (std::size_t i = 0; i < p->grad.size(); ++i) {
                if (!std::isfinite(p->grad[i])) {
                    throw std::runtime_error("adam_step: non-finite gradient in parameter '" +
                                             p->name + "'");
                }
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (Parameter* p : params) {
            Moments& mom = slot(*p);
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const double g = p->grad[i];
                mom.m[i] = beta1_ * mom.m[i] + (1.0 - beta1_) * g;
                mom.v[i] = beta2_ * mom.v[i] + (1.0 - beta2_) * g * g;
                const double m_hat = mom.m[i] / bc1;
                const double v_hat = mom.v[i] / bc2;
                p->value[i] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
            }
            p->zero_grad();
        }
    }

private:
    struct Moments {
        Tensor m;
        Tensor v;
    };

    Moments& slot(const Parameter& p) {
        auto it = moments_.find(p.name);
        if (it == moments_.end()) {
            it = moments_.emplace(p.name, Moments{Tensor(p.value.shape()),
                                                  Tensor(p.value.shape())}).first;
        }
        return it->second;
    }

    double lr_, beta1_, beta2_, epsilon_;
    std::size_t t_ = 0;
    std::unordered_map<std::string, Moments> moments_;
};

}  // namespace tip
