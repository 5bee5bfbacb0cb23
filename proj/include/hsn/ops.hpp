#pragma once

// Differentiable primitives. Matrices are row-major with time (or batch) on
// the leading axis and channels on the trailing axis.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hsn/tensor.hpp"

namespace hsn {

enum class Activation { none, relu, sigmoid, tanh };
enum class PoolMode { max, mean };

namespace fault_injection {

/// Scales the sigmoid adjoint; any value other than 1 deliberately breaks
/// gradients so that gradient checks can be shown to catch it.
inline std::atomic<double>& sigmoid_adjoint_scale() {
    static std::atomic<double> scale{1.0};
    return scale;
}

}  // namespace fault_injection

namespace detail {

inline bool wants_grad(const Node& node, std::size_t input) {
    return node.inputs[input]->requires_grad;
}

inline std::vector<double>& input_grad(Node& node, std::size_t input) {
    node.inputs[input]->ensure_grad();
    return node.inputs[input]->grad;
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double activate(double x, Activation act) {
    switch (act) {
        case Activation::relu:
            return x > 0.0 ? x : 0.0;
        case Activation::sigmoid:
            return sigmoid(x);
        case Activation::tanh:
            return std::tanh(x);
        case Activation::none:
            break;
    }
    return x;
}

// Derivative expressed through the activation output y = act(x).
inline double activation_slope(double y, Activation act) {
    switch (act) {
        case Activation::relu:
            return y > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid:
            return y * (1.0 - y) * fault_injection::sigmoid_adjoint_scale().load();
        case Activation::tanh:
            return 1.0 - y * y;
        case Activation::none:
            break;
    }
    return 1.0;
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                                        " vs " + to_string(b.shape()));
}

inline void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
    require(t.rank() == rank, std::string(op) + ": " + what + " must have rank " +
                                  std::to_string(rank) + ", got " + to_string(t.shape()));
}

// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisSplit {
    std::size_t outer = 1;
    std::size_t extent = 1;
    std::size_t inner = 1;
};

inline AxisSplit split_axis(const Shape& shape, std::size_t axis) {
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    s.extent = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise

inline Tensor activate(const Tensor& x, Activation act) {
    if (act == Activation::none) {
        return x;
    }
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = detail::activate(x[i], act);
    }
    const char* name = act == Activation::relu ? "relu" : act == Activation::sigmoid ? "sigmoid" : "tanh";
    return Tensor::record(x.shape(), std::move(y), name, {x}, [act](detail::Node& n) {
        auto& gx = detail::input_grad(n, 0);
        for (std::size_t i = 0; i < n.value.size(); ++i) {
            gx[i] += n.grad[i] * detail::activation_slope(n.value[i], act);
        }
    });
}

inline Tensor sigmoid(const Tensor& x) { return activate(x, Activation::sigmoid); }
inline Tensor relu(const Tensor& x) { return activate(x, Activation::relu); }
inline Tensor tanh(const Tensor& x) { return activate(x, Activation::tanh); }

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "add");
    std::vector<double> y(a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + b[i];
    return Tensor::record(a.shape(), std::move(y), "add", {a, b}, [](detail::Node& n) {
        for (std::size_t k = 0; k < 2; ++k) {
            if (!detail::wants_grad(n, k)) continue;
            auto& g = detail::input_grad(n, k);
            for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
        }
    });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "sub");
    std::vector<double> y(a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] - b[i];
    return Tensor::record(a.shape(), std::move(y), "sub", {a, b}, [](detail::Node& n) {
        for (std::size_t k = 0; k < 2; ++k) {
            if (!detail::wants_grad(n, k)) continue;
            const double sign = k == 0 ? 1.0 : -1.0;
            auto& g = detail::input_grad(n, k);
            for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += sign * n.grad[i];
        }
    });
}

/// Hadamard product.
inline Tensor mul(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "mul");
    std::vector<double> y(a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] * b[i];
    return Tensor::record(a.shape(), std::move(y), "mul", {a, b}, [](detail::Node& n) {
        const auto& av = n.inputs[0]->value;
        const auto& bv = n.inputs[1]->value;
        if (detail::wants_grad(n, 0)) {
            auto& g = detail::input_grad(n, 0);
            for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * bv[i];
        }
        if (detail::wants_grad(n, 1)) {
            auto& g = detail::input_grad(n, 1);
            for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * av[i];
        }
    });
}

/// y = scale * x + shift
inline Tensor affine_scalar(const Tensor& x, double scale, double shift) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = scale * x[i] + shift;
    return Tensor::record(x.shape(), std::move(y), "affine_scalar", {x}, [scale](detail::Node& n) {
        auto& g = detail::input_grad(n, 0);
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += scale * n.grad[i];
    });
}

inline Tensor scale(const Tensor& x, double factor) { return affine_scalar(x, factor, 0.0); }

inline Tensor square(const Tensor& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * x[i];
    return Tensor::record(x.shape(), std::move(y), "square", {x}, [](detail::Node& n) {
        const auto& xv = n.inputs[0]->value;
        auto& g = detail::input_grad(n, 0);
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += 2.0 * xv[i] * n.grad[i];
    });
}

/// |x|; the subgradient at 0 is taken as 0.
inline Tensor abs(const Tensor& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::fabs(x[i]);
    return Tensor::record(x.shape(), std::move(y), "abs", {x}, [](detail::Node& n) {
        const auto& xv = n.inputs[0]->value;
        auto& g = detail::input_grad(n, 0);
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            const double s = xv[i] > 0.0 ? 1.0 : (xv[i] < 0.0 ? -1.0 : 0.0);
            g[i] += s * n.grad[i];
        }
    });
}

// ---------------------------------------------------------------------------
// Shape manipulation

inline Tensor reshape(const Tensor& x, Shape shape) {
    detail::require(numel(shape) == x.size(),
                    "reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
    std::vector<double> y(x.values().begin(), x.values().end());
    return Tensor::record(std::move(shape), std::move(y), "reshape", {x}, [](detail::Node& n) {
        auto& g = detail::input_grad(n, 0);
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    });
}

/// Joins two tensors along `axis`; every other extent must agree.
inline Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
    detail::require(a.rank() == b.rank(), "concat: rank mismatch " + to_string(a.shape()) + " vs " +
                                              to_string(b.shape()));
    detail::require(axis < a.rank(), "concat: axis out of range");
    for (std::size_t i = 0; i < a.rank(); ++i) {
        detail::require(i == axis || a.dim(i) == b.dim(i),
                        "concat: extent mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    const auto sa = detail::split_axis(a.shape(), axis);
    const auto sb = detail::split_axis(b.shape(), axis);
    const std::size_t block_a = sa.extent * sa.inner;
    const std::size_t block_b = sb.extent * sb.inner;
    Shape shape = a.shape();
    shape[axis] += b.dim(axis);
    std::vector<double> y;
    y.reserve(a.size() + b.size());
    for (std::size_t o = 0; o < sa.outer; ++o) {
        y.insert(y.end(), a.values().begin() + o * block_a, a.values().begin() + (o + 1) * block_a);
        y.insert(y.end(), b.values().begin() + o * block_b, b.values().begin() + (o + 1) * block_b);
    }
    const std::size_t outer = sa.outer;
    return Tensor::record(std::move(shape), std::move(y), "concat", {a, b},
                          [outer, block_a, block_b](detail::Node& n) {
                              const std::size_t row = block_a + block_b;
                              if (detail::wants_grad(n, 0)) {
                                  auto& g = detail::input_grad(n, 0);
                                  for (std::size_t o = 0; o < outer; ++o)
                                      for (std::size_t i = 0; i < block_a; ++i)
                                          g[o * block_a + i] += n.grad[o * row + i];
                              }
                              if (detail::wants_grad(n, 1)) {
                                  auto& g = detail::input_grad(n, 1);
                                  for (std::size_t o = 0; o < outer; ++o)
                                      for (std::size_t i = 0; i < block_b; ++i)
                                          g[o * block_b + i] += n.grad[o * row + block_a + i];
                              }
                          });
}

/// Repeats a 1×C row `rows` times into rows×C.
inline Tensor expand_rows(const Tensor& x, std::size_t rows) {
    detail::require(x.rank() == 2 && x.dim(0) == 1,
                    "expand_rows: expected 1xC, got " + to_string(x.shape()));
    const std::size_t cols = x.dim(1);
    std::vector<double> y;
    y.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        y.insert(y.end(), x.values().begin(), x.values().end());
    }
    return Tensor::record({rows, cols}, std::move(y), "expand_rows", {x}, [rows, cols](detail::Node& n) {
        auto& g = detail::input_grad(n, 0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) g[c] += n.grad[r * cols + c];
    });
}

// ---------------------------------------------------------------------------
// Reductions

inline Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    return Tensor::record({}, {total}, "sum", {x}, [](detail::Node& n) {
        auto& g = detail::input_grad(n, 0);
        for (double& gi : g) gi += n.grad[0];
    });
}

inline Tensor mean(const Tensor& x) {
    detail::require(x.size() > 0, "mean of empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

/// Reduces `axis` away. Max-pool routes the gradient to the first maximal
/// element; mean-pool spreads it uniformly.
inline Tensor pool(const Tensor& x, std::size_t axis, PoolMode mode) {
    detail::require(axis < x.rank(), "pool: axis " + std::to_string(axis) + " out of range for " +
                                         to_string(x.shape()));
    detail::require(x.dim(axis) >= 1, "pool: empty axis in " + to_string(x.shape()));
    const auto s = detail::split_axis(x.shape(), axis);
    Shape shape = x.shape();
    shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
    std::vector<double> y(s.outer * s.inner);
    std::vector<std::size_t> argmax;
    if (mode == PoolMode::max) {
        argmax.resize(y.size());
    }
    const auto xv = x.values();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t base = o * s.extent * s.inner + i;
            if (mode == PoolMode::max) {
                std::size_t best = base;
                for (std::size_t e = 1; e < s.extent; ++e) {
                    const std::size_t at = base + e * s.inner;
                    if (xv[at] > xv[best]) best = at;
                }
                y[o * s.inner + i] = xv[best];
                argmax[o * s.inner + i] = best;
            } else {
                double acc = 0.0;
                for (std::size_t e = 0; e < s.extent; ++e) acc += xv[base + e * s.inner];
                y[o * s.inner + i] = acc / static_cast<double>(s.extent);
            }
        }
    }
    if (mode == PoolMode::max) {
        return Tensor::record(std::move(shape), std::move(y), "max_pool", {x},
                              [argmax = std::move(argmax)](detail::Node& n) {
                                  auto& g = detail::input_grad(n, 0);
                                  for (std::size_t j = 0; j < argmax.size(); ++j) g[argmax[j]] += n.grad[j];
                              });
    }
    return Tensor::record(std::move(shape), std::move(y), "mean_pool", {x}, [s](detail::Node& n) {
        auto& g = detail::input_grad(n, 0);
        const double w = 1.0 / static_cast<double>(s.extent);
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t i = 0; i < s.inner; ++i)
                for (std::size_t e = 0; e < s.extent; ++e)
                    g[o * s.extent * s.inner + e * s.inner + i] += w * n.grad[o * s.inner + i];
    });
}

/// Maximum over every element (first occurrence on ties).
inline Tensor max_all(const Tensor& x) { return pool(reshape(x, {x.size()}), 0, PoolMode::max); }

/// Mean-pools an L×C sequence into exactly `bins` frames; bin i covers
/// rows [floor(i*L/bins), floor((i+1)*L/bins)).
inline Tensor adaptive_mean_pool(const Tensor& x, std::size_t bins) {
    detail::require_rank(x, 2, "adaptive_mean_pool", "input");
    const std::size_t length = x.dim(0);
    const std::size_t channels = x.dim(1);
    detail::require(bins >= 1 && length >= bins,
                    "adaptive_mean_pool: cannot pool " + std::to_string(length) + " rows into " +
                        std::to_string(bins) + " bins");
    std::vector<std::size_t> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = i * length / bins;
    std::vector<double> y(bins * channels, 0.0);
    const auto xv = x.values();
    for (std::size_t b = 0; b < bins; ++b) {
        const double w = 1.0 / static_cast<double>(edges[b + 1] - edges[b]);
        for (std::size_t r = edges[b]; r < edges[b + 1]; ++r)
            for (std::size_t c = 0; c < channels; ++c) y[b * channels + c] += w * xv[r * channels + c];
    }
    return Tensor::record({bins, channels}, std::move(y), "adaptive_mean_pool", {x},
                          [edges = std::move(edges), channels](detail::Node& n) {
                              auto& g = detail::input_grad(n, 0);
                              for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
                                  const double w = 1.0 / static_cast<double>(edges[b + 1] - edges[b]);
                                  for (std::size_t r = edges[b]; r < edges[b + 1]; ++r)
                                      for (std::size_t c = 0; c < channels; ++c)
                                          g[r * channels + c] += w * n.grad[b * channels + c];
                              }
                          });
}

// ---------------------------------------------------------------------------
// Layers

/// y = act(x W + b) for x: L×C_in, W: C_in×C_out, b: C_out.
inline Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias,
                     Activation act = Activation::none) {
    detail::require_rank(x, 2, "affine", "input");
    detail::require_rank(weight, 2, "affine", "weight");
    detail::require(x.dim(1) == weight.dim(0), "affine: input " + to_string(x.shape()) +
                                                   " incompatible with weight " +
                                                   to_string(weight.shape()));
    detail::require(bias.size() == weight.dim(1), "affine: bias " + to_string(bias.shape()) +
                                                      " incompatible with weight " +
                                                      to_string(weight.shape()));
    const std::size_t rows = x.dim(0);
    const std::size_t in = weight.dim(0);
    const std::size_t out = weight.dim(1);
    const auto xv = x.values();
    const auto wv = weight.values();
    const auto bv = bias.values();
    std::vector<double> y(rows * out);
    for (std::size_t r = 0; r < rows; ++r) {
        double* yr = y.data() + r * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] = bv[o];
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = xv[r * in + i];
            if (xi == 0.0) continue;
            const double* wr = wv.data() + i * out;
            for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
        }
        for (std::size_t o = 0; o < out; ++o) yr[o] = detail::activate(yr[o], act);
    }
    return Tensor::record({rows, out}, std::move(y), "affine", {x, weight, bias},
                          [rows, in, out, act](detail::Node& n) {
                              std::vector<double> dz(n.grad.size());
                              for (std::size_t i = 0; i < dz.size(); ++i)
                                  dz[i] = n.grad[i] * detail::activation_slope(n.value[i], act);
                              const auto& xv = n.inputs[0]->value;
                              const auto& wv = n.inputs[1]->value;
                              if (detail::wants_grad(n, 0)) {
                                  auto& gx = detail::input_grad(n, 0);
                                  for (std::size_t r = 0; r < rows; ++r)
                                      for (std::size_t i = 0; i < in; ++i) {
                                          double acc = 0.0;
                                          for (std::size_t o = 0; o < out; ++o)
                                              acc += dz[r * out + o] * wv[i * out + o];
                                          gx[r * in + i] += acc;
                                      }
                              }
                              if (detail::wants_grad(n, 1)) {
                                  auto& gw = detail::input_grad(n, 1);
                                  for (std::size_t r = 0; r < rows; ++r)
                                      for (std::size_t i = 0; i < in; ++i) {
                                          const double xi = xv[r * in + i];
                                          if (xi == 0.0) continue;
                                          for (std::size_t o = 0; o < out; ++o)
                                              gw[i * out + o] += xi * dz[r * out + o];
                                      }
                              }
                              if (detail::wants_grad(n, 2)) {
                                  auto& gb = detail::input_grad(n, 2);
                                  for (std::size_t r = 0; r < rows; ++r)
                                      for (std::size_t o = 0; o < out; ++o) gb[o] += dz[r * out + o];
                              }
                          });
}

/// Dilated 1-D convolution along time with zero "same" padding.
/// x: L×C_in, weight: k×C_in×C_out, bias: C_out. Output is L×C_out and the
/// receptive span is (k-1)*dilation+1 frames.
inline Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t dilation) {
    detail::require_rank(x, 2, "conv1d", "input");
    detail::require_rank(weight, 3, "conv1d", "weight");
    detail::require(weight.dim(0) >= 1, "conv1d: kernel size must be positive");
    detail::require(dilation >= 1, "conv1d: dilation must be positive");
    detail::require(x.dim(0) >= 1, "conv1d: empty sequence");
    detail::require(x.dim(1) == weight.dim(1), "conv1d: input " + to_string(x.shape()) +
                                                   " incompatible with weight " +
                                                   to_string(weight.shape()));
    detail::require(bias.size() == weight.dim(2), "conv1d: bias " + to_string(bias.shape()) +
                                                      " incompatible with weight " +
                                                      to_string(weight.shape()));
    const std::size_t length = x.dim(0);
    const std::size_t k = weight.dim(0);
    const std::size_t in = weight.dim(1);
    const std::size_t out = weight.dim(2);
    const auto left = static_cast<std::ptrdiff_t>(((k - 1) * dilation) / 2);
    const auto xv = x.values();
    const auto wv = weight.values();
    const auto bv = bias.values();
    std::vector<double> y(length * out);
    for (std::size_t t = 0; t < length; ++t) {
        double* yt = y.data() + t * out;
        for (std::size_t o = 0; o < out; ++o) yt[o] = bv[o];
        for (std::size_t j = 0; j < k; ++j) {
            const auto src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j * dilation) - left;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
            const double* xs = xv.data() + static_cast<std::size_t>(src) * in;
            const double* wj = wv.data() + j * in * out;
            for (std::size_t i = 0; i < in; ++i) {
                if (xs[i] == 0.0) continue;
                for (std::size_t o = 0; o < out; ++o) yt[o] += xs[i] * wj[i * out + o];
            }
        }
    }
    return Tensor::record({length, out}, std::move(y), "conv1d", {x, weight, bias},
                          [length, k, in, out, dilation, left](detail::Node& n) {
                              const auto& xv = n.inputs[0]->value;
                              const auto& wv = n.inputs[1]->value;
                              const bool gx_on = detail::wants_grad(n, 0);
                              const bool gw_on = detail::wants_grad(n, 1);
                              std::vector<double>* gx = gx_on ? &detail::input_grad(n, 0) : nullptr;
                              std::vector<double>* gw = gw_on ? &detail::input_grad(n, 1) : nullptr;
                              for (std::size_t t = 0; t < length; ++t) {
                                  const double* dy = n.grad.data() + t * out;
                                  for (std::size_t j = 0; j < k; ++j) {
                                      const auto src = static_cast<std::ptrdiff_t>(t) +
                                                       static_cast<std::ptrdiff_t>(j * dilation) - left;
                                      if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
                                      const std::size_t s = static_cast<std::size_t>(src);
                                      for (std::size_t i = 0; i < in; ++i) {
                                          const std::size_t widx = j * in * out + i * out;
                                          if (gx) {
                                              double acc = 0.0;
                                              for (std::size_t o = 0; o < out; ++o) acc += dy[o] * wv[widx + o];
                                              (*gx)[s * in + i] += acc;
                                          }
                                          if (gw) {
                                              const double xs = xv[s * in + i];
                                              for (std::size_t o = 0; o < out; ++o) (*gw)[widx + o] += xs * dy[o];
                                          }
                                      }
                                  }
                              }
                              if (detail::wants_grad(n, 2)) {
                                  auto& gb = detail::input_grad(n, 2);
                                  for (std::size_t t = 0; t < length; ++t)
                                      for (std::size_t o = 0; o < out; ++o) gb[o] += n.grad[t * out + o];
                              }
                          });
}

/// Receptive span of one dilated convolution layer.
constexpr std::size_t receptive_span(std::size_t kernel, std::size_t dilation) {
    return (kernel - 1) * dilation + 1;
}

/// Receptive span of stacked stride-1 layers.
constexpr std::size_t stacked_span(std::size_t first, std::size_t second) { return first + second - 1; }

}  // namespace hsn
