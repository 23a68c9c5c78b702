#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "tip/autodiff.hpp"
#include "tip/tensor.hpp"

namespace tip_test {

inline tip::Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng,
                                 double lo = -2.0, double hi = 2.0) {
    tip::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = lo + (hi - lo) * tip::uniform_unit(rng);
    }
    return t;
}

struct FdFailure {
    std::string param;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
};

/// Central finite differences against the analytic gradients. `run` must
/// build a fresh tape from the current parameter values, call backward,
/// and return the scalar loss; gradients accumulate into the parameters.
inline bool gradients_match_fd(const std::vector<tip::Parameter*>& params,
                               const std::function<double()>& run, double step = 1e-5,
                               double tol = 1e-4, FdFailure* failure = nullptr) {
    for (auto* p : params) p->zero_grad();
    run();
    std::vector<tip::Tensor> analytic;
    for (auto* p : params) analytic.push_back(p->grad);

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        tip::Parameter& p = *params[pi];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + step;
            const double loss_plus = run();
            p.value[i] = saved - step;
            const double loss_minus = run();
            p.value[i] = saved;
            for (auto* q : params) q->zero_grad();

            const double numeric = (loss_plus - loss_minus) / (2.0 * step);
            const double a = analytic[pi][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-4});
            const double rel = std::fabs(a - numeric) / denom;
            if (rel >= tol) {
                if (failure) *failure = {p.name, i, a, numeric, rel};
                return false;
            }
        }
    }
    return true;
}

/// Dense row-normalized adjacency product: out = D^-1 * A * src, with
/// zero rows for degree-0 targets.
inline tip::Tensor dense_mean_aggregate(const tip::Tensor& src, const tip::AdjacencyList& adj) {
    tip::Tensor out({adj.size(), src.cols()});
    for (std::size_t i = 0; i < adj.size(); ++i) {
        if (adj[i].empty()) continue;
        for (std::size_t j : adj[i]) {
            for (std::size_t c = 0; c < src.cols(); ++c) out.at(i, c) += src.at(j, c);
        }
        for (std::size_t c = 0; c < src.cols(); ++c) {
            out.at(i, c) /= static_cast<double>(adj[i].size());
        }
    }
    return out;
}

inline tip::AdjacencyList random_adjacency(std::size_t num_targets, std::size_t num_sources,
                                           double edge_prob, std::mt19937_64& rng) {
    tip::AdjacencyList adj(num_targets);
    for (std::size_t i = 0; i < num_targets; ++i) {
        for (std::size_t j = 0; j < num_sources; ++j) {
            if (tip::uniform_unit(rng) < edge_prob) adj[i].push_back(j);
        }
    }
    return adj;
}

inline double max_abs_diff(const tip::Tensor& a, const tip::Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a[i] - b[i]));
    }
    return m;
}

}  // namespace tip_test
