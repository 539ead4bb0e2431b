#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsgd/rng.hpp"
#include "tsgd/tensor.hpp"

namespace tsgd {

// Layer descriptors. A network is a straight pipeline of these; shapes are
// validated once at construction and never again on the hot path.
struct DenseSpec {
    std::size_t in = 0;
    std::size_t out = 0;
};
struct ReluSpec {};
struct Conv2dSpec {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;  // square kernel, stride 1, no padding
};
struct MaxPool2dSpec {
    std::size_t window = 2;
    std::size_t stride = 2;
};
struct FlattenSpec {};

using LayerSpec = std::variant<DenseSpec, ReluSpec, Conv2dSpec, MaxPool2dSpec, FlattenSpec>;

enum class Head {
    squared_error,          // scalar output, mean squared error over the batch
    softmax_cross_entropy,  // k logits, mean cross-entropy over the batch
};

enum class Metric {
    squared_error,
    cross_entropy,
    zero_one,  // evaluate() reports accuracy = 1 - mean zero-one error
};

class Network {
public:
    // Parameters start at zero; call initialize_he() (or load a checkpoint)
    // before training. Throws std::invalid_argument on any shape mismatch
    // between consecutive layers or between the last layer and the head.
    Network(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers, Head head,
            std::size_t num_classes = 0);

    // Input is a [batch, p] tensor of flat rows; for convolutional networks p
    // must equal the product of input_shape and rows are reinterpreted as
    // [channels, height, width]. Returns the head-input activations
    // ([batch, 1] or [batch, k] logits).
    [[nodiscard]] Tensor forward(const Tensor& input) const;

    // Every activation from the reshaped input through the output,
    // layers()+1 tensors. For diagnostics and tests.
    [[nodiscard]] std::vector<Tensor> forward_trace(const Tensor& input) const;

    // Mean loss over the batch plus the gradient with respect to every
    // parameter, laid out identically to parameters().
    [[nodiscard]] std::pair<double, std::vector<double>> loss_and_gradient(
        const Tensor& input, std::span<const double> labels) const;

    [[nodiscard]] std::vector<double>& parameters() { return params_; }
    [[nodiscard]] const std::vector<double>& parameters() const { return params_; }
    [[nodiscard]] std::size_t parameter_count() const { return params_.size(); }

    [[nodiscard]] const std::vector<LayerSpec>& layers() const { return layers_; }
    [[nodiscard]] const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    [[nodiscard]] Head head() const { return head_; }
    [[nodiscard]] std::size_t num_classes() const { return num_classes_; }
    [[nodiscard]] std::size_t output_dim() const { return output_dim_; }

    // Flat-parameter offset of layer i (for tests poking at single layers).
    [[nodiscard]] std::size_t layer_offset(std::size_t i) const { return offsets_[i]; }

private:
    void apply_layer(std::size_t li, const Tensor& in, Tensor& out) const;
    void check_input(const Tensor& input) const;

    std::vector<std::size_t> input_shape_;
    std::vector<LayerSpec> layers_;
    Head head_;
    std::size_t num_classes_;
    std::size_t output_dim_;
    std::vector<std::size_t> offsets_;       // params_ offset per layer
    std::vector<std::vector<std::size_t>> out_shapes_;  // per-layer output shape, sans batch
    std::vector<double> params_;

    friend void initialize_he(Network& net, Rng& rng);
};

// He-scaled normal weights (std = sqrt(2 / fan_in)), zero biases.
void initialize_he(Network& net, Rng& rng);

// p -> hidden[0] -> ... -> hidden.back() -> output, ReLU between dense
// layers. Output width is 1 for squared_error and num_classes otherwise.
// hidden may be empty (a plain linear model).
Network build_mlp(std::size_t p, const std::vector<std::size_t>& hidden, Head head,
                  std::size_t num_classes, Rng& rng);

// conv(16, k=3) -> relu -> pool(2/2) -> conv(32, k=5) -> relu -> pool(2/2)
// -> flatten -> dense(num_classes), softmax cross-entropy head.
Network build_conv_net(std::size_t channels, std::size_t height, std::size_t width,
                       std::size_t num_classes, Rng& rng);

void sgd_step(Network& net, std::span<const double> gradient, double learning_rate);

// Per-row metric values: squared error, cross-entropy, or the zero-one error
// indicator. Rows are forwarded in fixed-size chunks to bound memory.
std::vector<double> per_sample_metric(const Network& net, std::span<const double> rows,
                                      std::size_t cols, std::span<const double> labels,
                                      Metric metric);

// Mean metric over rows; zero_one is reported as accuracy.
double evaluate(const Network& net, std::span<const double> rows, std::size_t cols,
                std::span<const double> labels, Metric metric);

// Versioned binary checkpoint: layer descriptors followed by the flat
// parameter vector as little-endian 64-bit doubles.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace tsgd
