#pragma once

#include <cmath>
#include <vector>

#include "hsn/layers.hpp"

namespace hsn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive moment estimation with bias-corrected first and second moments.
class Adam {
public:
    Adam(ParamList params, AdamConfig config) : params_(std::move(params)), config_(config) {
        for (const auto& p : params_) {
            first_.emplace_back(p.tensor.size(), 0.0);
            second_.emplace_back(p.tensor.size(), 0.0);
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.tensor.zero_grad();
    }

    void step() {
        ++steps_;
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto values = params_[k].tensor.mutable_values();
            const auto grad = params_[k].tensor.grad();
            if (grad.empty()) continue;
            auto& m = first_[k];
            auto& v = second_[k];
            for (std::size_t i = 0; i < values.size(); ++i) {
                m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
                v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
                const double m_hat = m[i] / c1;
                const double v_hat = v[i] / c2;
                values[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
            }
        }
    }

    std::size_t steps() const { return steps_; }
    const ParamList& parameters() const { return params_; }

private:
    ParamList params_;
    AdamConfig config_;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
    std::size_t steps_ = 0;
};

}  // namespace hsn
