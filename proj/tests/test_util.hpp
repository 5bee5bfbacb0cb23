#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hsn/layers.hpp"
#include "hsn/tensor.hpp"

namespace hsn::test {

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> values(numel(shape));
    for (double& v : values) v = dist(rng);
    return Tensor(std::move(shape), std::move(values), requires_grad);
}

/// Random linear functional <x, w>; turns any tensor into a scalar with
/// non-degenerate gradients.
inline Tensor probe(const Tensor& x, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sum(mul(x, random_tensor(rng, x.shape())));
}

/// Sets every parameter in the list to `value`, in place.
inline void fill_params(const ParamList& params, double value) {
    for (const auto& p : params) {
        Tensor t = p.tensor;
        for (double& v : t.mutable_values()) v = value;
    }
}

}  // namespace hsn::test
