#pragma once

// Learnable parameter blocks shared by the subnetworks.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hsn/lstm.hpp"
#include "hsn/ops.hpp"

namespace hsn {

/// A named handle to a parameter tensor. Tensors share storage, so the
/// handle can be used to update the owning block in place.
struct NamedTensor {
    std::string name;
    Tensor tensor;
};

using ParamList = std::vector<NamedTensor>;

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization from a seeded
/// 64-bit Mersenne twister.
class Initializer {
public:
    explicit Initializer(std::uint64_t seed) : engine_(seed) {}

    Tensor uniform(Shape shape, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
        std::uniform_real_distribution<double> dist(-bound, bound);
        std::vector<double> values(numel(shape));
        for (double& v : values) v = dist(engine_);
        return Tensor(std::move(shape), std::move(values), true);
    }

private:
    std::mt19937_64 engine_;
};

struct Linear {
    Tensor weight;  // in×out
    Tensor bias;    // out

    static Linear init(Initializer& init, std::size_t in, std::size_t out) {
        return {init.uniform({in, out}, in), init.uniform({out}, in)};
    }

    Tensor operator()(const Tensor& x, Activation act) const { return affine(x, weight, bias, act); }

    void collect(const std::string& prefix, ParamList& out) const {
        out.push_back({prefix + ".weight", weight});
        out.push_back({prefix + ".bias", bias});
    }
};

struct Conv1dLayer {
    Tensor weight;  // k×in×out
    Tensor bias;    // out
    std::size_t dilation = 1;

    static Conv1dLayer init(Initializer& init, std::size_t kernel, std::size_t dilation, std::size_t in,
                            std::size_t out) {
        return {init.uniform({kernel, in, out}, kernel * in), init.uniform({out}, kernel * in), dilation};
    }

    std::size_t kernel() const { return weight.dim(0); }

    Tensor operator()(const Tensor& x, Activation act) const {
        return activate(conv1d(x, weight, bias, dilation), act);
    }

    void collect(const std::string& prefix, ParamList& out) const {
        out.push_back({prefix + ".weight", weight});
        out.push_back({prefix + ".bias", bias});
    }
};

struct LstmLayer {
    Tensor w_input;   // C×4H
    Tensor w_hidden;  // H×4H
    Tensor bias;      // 4H

    static LstmLayer init(Initializer& init, std::size_t in, std::size_t hidden) {
        return {init.uniform({in, 4 * hidden}, in), init.uniform({hidden, 4 * hidden}, hidden),
                init.uniform({4 * hidden}, hidden)};
    }

    std::size_t hidden() const { return w_hidden.dim(0); }

    /// Batch-first B×L×C -> B×L×H.
    Tensor operator()(const Tensor& x) const { return lstm(x, w_input, w_hidden, bias); }

    void collect(const std::string& prefix, ParamList& out) const {
        out.push_back({prefix + ".w_input", w_input});
        out.push_back({prefix + ".w_hidden", w_hidden});
        out.push_back({prefix + ".bias", bias});
    }
};

/// Three fully-connected layers in -> m (ReLU) -> m (ReLU) -> 1 (sigmoid).
struct RankerMlp {
    Linear fc1;
    Linear fc2;
    Linear head;

    static RankerMlp init(Initializer& init, std::size_t in, std::size_t width) {
        Linear a = Linear::init(init, in, width);
        Linear b = Linear::init(init, width, width);
        Linear c = Linear::init(init, width, 1);
        return {a, b, c};
    }

    struct Output {
        Tensor scores;        // rows×1
        Tensor intermediate;  // rows×m, second-layer activation
    };

    Output operator()(const Tensor& x) const {
        Tensor hidden = fc2(fc1(x, Activation::relu), Activation::relu);
        return {head(hidden, Activation::sigmoid), hidden};
    }

    void collect(const std::string& prefix, ParamList& out) const {
        fc1.collect(prefix + ".fc1", out);
        fc2.collect(prefix + ".fc2", out);
        head.collect(prefix + ".head", out);
    }
};

}  // namespace hsn
