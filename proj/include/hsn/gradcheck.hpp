#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hsn/tensor.hpp"

namespace hsn {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t probes = 0;
};

/// Compares reverse-mode gradients of a scalar graph against central
/// differences. `build` must rebuild the graph from the current values of
/// `inputs` each time it is called. The error of one element is
/// |analytic - numeric| / max(1e-8, |numeric|).
inline GradCheckResult grad_check(const std::function<Tensor()>& build, std::vector<Tensor> inputs,
                                  double eps = 1e-5) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    Tensor loss = build();
    backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (const auto& t : inputs) {
        analytic.emplace_back(t.grad().begin(), t.grad().end());
    }

    GradCheckResult result;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto values = inputs[k].mutable_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = build().item();
            values[i] = saved - eps;
            const double down = build().item();
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double err = std::fabs(analytic[k][i] - numeric) / std::max(1e-8, std::fabs(numeric));
            result.max_rel_error = std::max(result.max_rel_error, err);
            ++result.probes;
        }
    }
    return result;
}

}  // namespace hsn
