#include "tsgd/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tsgd/csv.hpp"

namespace tsgd {

namespace {

std::size_t layer_param_count(const LayerSpec& spec) {
    if (const auto* d = std::get_if<DenseSpec>(&spec)) return d->in * d->out + d->out;
    if (const auto* c = std::get_if<Conv2dSpec>(&spec))
        return c->out_channels * c->in_channels * c->kernel * c->kernel + c->out_channels;
    return 0;
}

void dense_forward(const DenseSpec& d, const double* p, const Tensor& in, Tensor& out) {
    const std::size_t batch = in.shape[0];
    const double* bias = p + d.in * d.out;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = &in.values[b * d.in];
        double* y = &out.values[b * d.out];
        for (std::size_t o = 0; o < d.out; ++o) {
            const double* w = p + o * d.in;
            double acc = bias[o];
            for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * x[i];
            y[o] = acc;
        }
    }
}

void dense_backward(const DenseSpec& d, const double* p, const Tensor& in,
                    const Tensor& grad_out, Tensor& grad_in, double* gp) {
    const std::size_t batch = in.shape[0];
    double* gw = gp;
    double* gb = gp + d.in * d.out;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = &in.values[b * d.in];
        const double* go = &grad_out.values[b * d.out];
        double* gi = &grad_in.values[b * d.in];
        for (std::size_t o = 0; o < d.out; ++o) {
            const double g = go[o];
            if (g == 0.0) continue;
            const double* w = p + o * d.in;
            double* gwrow = gw + o * d.in;
            gb[o] += g;
            for (std::size_t i = 0; i < d.in; ++i) {
                gwrow[i] += g * x[i];
                gi[i] += g * w[i];
            }
        }
    }
}

void relu_forward(const Tensor& in, Tensor& out) {
    for (std::size_t i = 0; i < in.values.size(); ++i)
        out.values[i] = in.values[i] > 0.0 ? in.values[i] : 0.0;
}

void relu_backward(const Tensor& in, const Tensor& grad_out, Tensor& grad_in) {
    for (std::size_t i = 0; i < in.values.size(); ++i)
        grad_in.values[i] = in.values[i] > 0.0 ? grad_out.values[i] : 0.0;
}

void conv_forward(const Conv2dSpec& c, const double* p, const Tensor& in, Tensor& out) {
    const std::size_t batch = in.shape[0];
    const std::size_t h = in.shape[2], w = in.shape[3];
    const std::size_t oh = out.shape[2], ow = out.shape[3];
    const std::size_t k = c.kernel;
    const double* bias = p + c.out_channels * c.in_channels * k * k;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
            double* y = &out.values[((b * c.out_channels) + oc) * oh * ow];
            std::fill(y, y + oh * ow, bias[oc]);
            for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
                const double* x = &in.values[((b * c.in_channels) + ic) * h * w];
                const double* ker = p + ((oc * c.in_channels) + ic) * k * k;
                for (std::size_t ki = 0; ki < k; ++ki) {
                    for (std::size_t kj = 0; kj < k; ++kj) {
                        const double wv = ker[ki * k + kj];
                        for (std::size_t oi = 0; oi < oh; ++oi) {
                            const double* xrow = x + (oi + ki) * w + kj;
                            double* yrow = y + oi * ow;
                            for (std::size_t oj = 0; oj < ow; ++oj) yrow[oj] += wv * xrow[oj];
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const Conv2dSpec& c, const double* p, const Tensor& in,
                   const Tensor& grad_out, Tensor& grad_in, double* gp) {
    const std::size_t batch = in.shape[0];
    const std::size_t h = in.shape[2], w = in.shape[3];
    const std::size_t oh = grad_out.shape[2], ow = grad_out.shape[3];
    const std::size_t k = c.kernel;
    double* gbias = gp + c.out_channels * c.in_channels * k * k;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
            const double* go = &grad_out.values[((b * c.out_channels) + oc) * oh * ow];
            for (std::size_t i = 0; i < oh * ow; ++i) gbias[oc] += go[i];
            for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
                const double* x = &in.values[((b * c.in_channels) + ic) * h * w];
                double* gx = &grad_in.values[((b * c.in_channels) + ic) * h * w];
                const double* ker = p + ((oc * c.in_channels) + ic) * k * k;
                double* gker = gp + ((oc * c.in_channels) + ic) * k * k;
                for (std::size_t ki = 0; ki < k; ++ki) {
                    for (std::size_t kj = 0; kj < k; ++kj) {
                        const double wv = ker[ki * k + kj];
                        double gw = 0.0;
                        for (std::size_t oi = 0; oi < oh; ++oi) {
                            const double* xrow = x + (oi + ki) * w + kj;
                            double* gxrow = gx + (oi + ki) * w + kj;
                            const double* gorow = go + oi * ow;
                            for (std::size_t oj = 0; oj < ow; ++oj) {
                                gw += gorow[oj] * xrow[oj];
                                gxrow[oj] += gorow[oj] * wv;
                            }
                        }
                        gker[ki * k + kj] += gw;
                    }
                }
            }
        }
    }
}

void pool_forward(const MaxPool2dSpec& mp, const Tensor& in, Tensor& out) {
    const std::size_t planes = in.shape[0] * in.shape[1];
    const std::size_t h = in.shape[2], w = in.shape[3];
    const std::size_t oh = out.shape[2], ow = out.shape[3];
    for (std::size_t pl = 0; pl < planes; ++pl) {
        const double* x = &in.values[pl * h * w];
        double* y = &out.values[pl * oh * ow];
        for (std::size_t oi = 0; oi < oh; ++oi) {
            for (std::size_t oj = 0; oj < ow; ++oj) {
                double best = x[(oi * mp.stride) * w + oj * mp.stride];
                for (std::size_t ki = 0; ki < mp.window; ++ki) {
                    const double* xrow = x + (oi * mp.stride + ki) * w + oj * mp.stride;
                    for (std::size_t kj = 0; kj < mp.window; ++kj)
                        if (xrow[kj] > best) best = xrow[kj];
                }
                y[oi * ow + oj] = best;
            }
        }
    }
}

// Recomputes the argmax instead of caching it; ties route to the first
// maximum, matching the forward scan order.
void pool_backward(const MaxPool2dSpec& mp, const Tensor& in, const Tensor& grad_out,
                   Tensor& grad_in) {
    const std::size_t planes = in.shape[0] * in.shape[1];
    const std::size_t h = in.shape[2], w = in.shape[3];
    const std::size_t oh = grad_out.shape[2], ow = grad_out.shape[3];
    for (std::size_t pl = 0; pl < planes; ++pl) {
        const double* x = &in.values[pl * h * w];
        double* gx = &grad_in.values[pl * h * w];
        const double* go = &grad_out.values[pl * oh * ow];
        for (std::size_t oi = 0; oi < oh; ++oi) {
            for (std::size_t oj = 0; oj < ow; ++oj) {
                std::size_t best = (oi * mp.stride) * w + oj * mp.stride;
                for (std::size_t ki = 0; ki < mp.window; ++ki) {
                    for (std::size_t kj = 0; kj < mp.window; ++kj) {
                        const std::size_t idx = (oi * mp.stride + ki) * w + oj * mp.stride + kj;
                        if (x[idx] > x[best]) best = idx;
                    }
                }
                gx[best] += go[oi * ow + oj];
            }
        }
    }
}

std::vector<std::size_t> with_batch(std::size_t batch, const std::vector<std::size_t>& rest) {
    std::vector<std::size_t> s;
    s.reserve(rest.size() + 1);
    s.push_back(batch);
    s.insert(s.end(), rest.begin(), rest.end());
    return s;
}

std::size_t checked_label(double raw, std::size_t k) {
    const double r = std::round(raw);
    if (!(r >= 0.0) || r >= static_cast<double>(k) || r != raw)
        throw std::invalid_argument("class label out of range for " + std::to_string(k) +
                                    " classes: " + std::to_string(raw));
    return static_cast<std::size_t>(r);
}

}  // namespace

Network::Network(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers, Head head,
                 std::size_t num_classes)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)), head_(head),
      num_classes_(num_classes) {
    if (input_shape_.empty() || Tensor::element_count(input_shape_) == 0)
        throw std::invalid_argument("network input shape must be non-empty");

    std::vector<std::size_t> cur = input_shape_;
    std::size_t total = 0;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        offsets_.push_back(total);
        const LayerSpec& spec = layers_[li];
        if (const auto* d = std::get_if<DenseSpec>(&spec)) {
            if (d->in == 0 || d->out == 0)
                throw std::invalid_argument("dense layer dimensions must be positive");
            if (cur.size() != 1 || cur[0] != d->in)
                throw std::invalid_argument("dense layer " + std::to_string(li) + " expects " +
                                            std::to_string(d->in) + " inputs");
            cur = {d->out};
        } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
            if (c->in_channels == 0 || c->out_channels == 0 || c->kernel == 0)
                throw std::invalid_argument("conv layer dimensions must be positive");
            if (cur.size() != 3 || cur[0] != c->in_channels)
                throw std::invalid_argument("conv layer " + std::to_string(li) +
                                            " expects [channels, height, width] input with " +
                                            std::to_string(c->in_channels) + " channels");
            if (cur[1] < c->kernel || cur[2] < c->kernel)
                throw std::invalid_argument("conv kernel larger than its input plane");
            cur = {c->out_channels, cur[1] - c->kernel + 1, cur[2] - c->kernel + 1};
        } else if (const auto* mp = std::get_if<MaxPool2dSpec>(&spec)) {
            if (mp->window == 0 || mp->stride == 0)
                throw std::invalid_argument("pool window and stride must be positive");
            if (cur.size() != 3 || cur[1] < mp->window || cur[2] < mp->window)
                throw std::invalid_argument("pool layer " + std::to_string(li) +
                                            " input plane smaller than its window");
            cur = {cur[0], (cur[1] - mp->window) / mp->stride + 1,
                   (cur[2] - mp->window) / mp->stride + 1};
        } else if (std::holds_alternative<FlattenSpec>(spec)) {
            cur = {Tensor::element_count(cur)};
        }
        total += layer_param_count(spec);
        out_shapes_.push_back(cur);
    }

    if (cur.size() != 1)
        throw std::invalid_argument("network output must be flat; add a flatten layer");
    output_dim_ = cur[0];
    if (head_ == Head::squared_error) {
        if (output_dim_ != 1)
            throw std::invalid_argument("squared-error head expects a single output, got " +
                                        std::to_string(output_dim_));
    } else {
        if (num_classes_ < 2)
            throw std::invalid_argument("softmax head needs at least two classes");
        if (output_dim_ != num_classes_)
            throw std::invalid_argument("softmax head expects " + std::to_string(num_classes_) +
                                        " logits, got " + std::to_string(output_dim_));
    }
    params_.assign(total, 0.0);
}

void Network::check_input(const Tensor& input) const {
    if (input.shape.size() != 2 || input.shape[1] != Tensor::element_count(input_shape_))
        throw std::invalid_argument("network input must be [batch, " +
                                    std::to_string(Tensor::element_count(input_shape_)) + "]");
}

void Network::apply_layer(std::size_t li, const Tensor& in, Tensor& out) const {
    const double* p = params_.data() + offsets_[li];
    const LayerSpec& spec = layers_[li];
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
        dense_forward(*d, p, in, out);
    } else if (std::holds_alternative<ReluSpec>(spec)) {
        relu_forward(in, out);
    } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
        conv_forward(*c, p, in, out);
    } else if (const auto* mp = std::get_if<MaxPool2dSpec>(&spec)) {
        pool_forward(*mp, in, out);
    } else {
        out.values = in.values;
    }
}

Tensor Network::forward(const Tensor& input) const {
    check_input(input);
    const std::size_t batch = input.shape[0];
    Tensor cur(with_batch(batch, input_shape_), input.values);
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        Tensor next(with_batch(batch, out_shapes_[li]));
        apply_layer(li, cur, next);
        cur = std::move(next);
    }
    return cur;
}

std::vector<Tensor> Network::forward_trace(const Tensor& input) const {
    check_input(input);
    const std::size_t batch = input.shape[0];
    std::vector<Tensor> acts;
    acts.reserve(layers_.size() + 1);
    acts.emplace_back(with_batch(batch, input_shape_), input.values);
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        Tensor next(with_batch(batch, out_shapes_[li]));
        apply_layer(li, acts.back(), next);
        acts.push_back(std::move(next));
    }
    return acts;
}

std::pair<double, std::vector<double>> Network::loss_and_gradient(
    const Tensor& input, std::span<const double> labels) const {
    check_input(input);
    const std::size_t batch = input.shape[0];
    if (batch == 0) throw std::invalid_argument("cannot take a gradient on an empty batch");
    if (labels.size() != batch)
        throw std::invalid_argument("label count does not match batch size");

    // Keep every intermediate activation for the reverse sweep.
    std::vector<Tensor> acts = forward_trace(input);

    const Tensor& out = acts.back();
    Tensor grad(out.shape);
    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch);
    if (head_ == Head::squared_error) {
        for (std::size_t b = 0; b < batch; ++b) {
            const double diff = out.values[b] - labels[b];
            loss += diff * diff * inv_batch;
            grad.values[b] = 2.0 * diff * inv_batch;
        }
    } else {
        const std::size_t k = num_classes_;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* z = &out.values[b * k];
            double* g = &grad.values[b * k];
            const std::size_t y = checked_label(labels[b], k);
            double m = z[0];
            for (std::size_t j = 1; j < k; ++j) m = std::max(m, z[j]);
            double sum = 0.0;
            for (std::size_t j = 0; j < k; ++j) sum += std::exp(z[j] - m);
            loss += (std::log(sum) - (z[y] - m)) * inv_batch;
            for (std::size_t j = 0; j < k; ++j)
                g[j] = (std::exp(z[j] - m) / sum - (j == y ? 1.0 : 0.0)) * inv_batch;
        }
    }

    std::vector<double> grad_params(params_.size(), 0.0);
    for (std::size_t li = layers_.size(); li-- > 0;) {
        Tensor grad_in(acts[li].shape);
        const double* p = params_.data() + offsets_[li];
        double* gp = grad_params.data() + offsets_[li];
        const LayerSpec& spec = layers_[li];
        if (const auto* d = std::get_if<DenseSpec>(&spec)) {
            dense_backward(*d, p, acts[li], grad, grad_in, gp);
        } else if (std::holds_alternative<ReluSpec>(spec)) {
            relu_backward(acts[li], grad, grad_in);
        } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
            conv_backward(*c, p, acts[li], grad, grad_in, gp);
        } else if (const auto* mp = std::get_if<MaxPool2dSpec>(&spec)) {
            pool_backward(*mp, acts[li], grad, grad_in);
        } else {
            grad_in.values = grad.values;
        }
        grad = std::move(grad_in);
    }
    return {loss, std::move(grad_params)};
}

void initialize_he(Network& net, Rng& rng) {
    for (std::size_t li = 0; li < net.layers_.size(); ++li) {
        double* p = net.params_.data() + net.offsets_[li];
        const LayerSpec& spec = net.layers_[li];
        if (const auto* d = std::get_if<DenseSpec>(&spec)) {
            const double std_dev = std::sqrt(2.0 / static_cast<double>(d->in));
            for (std::size_t i = 0; i < d->in * d->out; ++i) p[i] = rng.normal() * std_dev;
            std::fill(p + d->in * d->out, p + d->in * d->out + d->out, 0.0);
        } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
            const std::size_t fan_in = c->in_channels * c->kernel * c->kernel;
            const std::size_t weights = c->out_channels * fan_in;
            const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (std::size_t i = 0; i < weights; ++i) p[i] = rng.normal() * std_dev;
            std::fill(p + weights, p + weights + c->out_channels, 0.0);
        }
    }
}

Network build_mlp(std::size_t p, const std::vector<std::size_t>& hidden, Head head,
                  std::size_t num_classes, Rng& rng) {
    const std::size_t out = head == Head::squared_error ? 1 : num_classes;
    std::vector<LayerSpec> layers;
    std::size_t width = p;
    for (std::size_t h : hidden) {
        layers.push_back(DenseSpec{width, h});
        layers.push_back(ReluSpec{});
        width = h;
    }
    layers.push_back(DenseSpec{width, out});
    Network net({p}, std::move(layers), head, num_classes);
    initialize_he(net, rng);
    return net;
}

Network build_conv_net(std::size_t channels, std::size_t height, std::size_t width,
                       std::size_t num_classes, Rng& rng) {
    std::vector<LayerSpec> layers{
        Conv2dSpec{channels, 16, 3}, ReluSpec{}, MaxPool2dSpec{2, 2},
        Conv2dSpec{16, 32, 5},       ReluSpec{}, MaxPool2dSpec{2, 2},
        FlattenSpec{},
    };
    const std::size_t h2 = ((height - 3 + 1) - 2) / 2 + 1;
    const std::size_t w2 = ((width - 3 + 1) - 2) / 2 + 1;
    const std::size_t h4 = ((h2 - 5 + 1) - 2) / 2 + 1;
    const std::size_t w4 = ((w2 - 5 + 1) - 2) / 2 + 1;
    layers.push_back(DenseSpec{32 * h4 * w4, num_classes});
    Network net({channels, height, width}, std::move(layers), Head::softmax_cross_entropy,
                num_classes);
    initialize_he(net, rng);
    return net;
}

void sgd_step(Network& net, std::span<const double> gradient, double learning_rate) {
    std::vector<double>& p = net.parameters();
    if (gradient.size() != p.size())
        throw std::invalid_argument("gradient length does not match parameter count");
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= learning_rate * gradient[i];
}

std::vector<double> per_sample_metric(const Network& net, std::span<const double> rows,
                                      std::size_t cols, std::span<const double> labels,
                                      Metric metric) {
    if (cols == 0 || rows.size() % cols != 0)
        throw std::invalid_argument("row buffer is not a whole number of rows");
    const std::size_t n = rows.size() / cols;
    if (labels.size() != n) throw std::invalid_argument("label count does not match row count");
    if (metric == Metric::squared_error) {
        if (net.head() != Head::squared_error)
            throw std::invalid_argument("squared-error metric needs a squared-error head");
    } else if (net.head() != Head::softmax_cross_entropy) {
        throw std::invalid_argument("classification metrics need a softmax head");
    }

    const std::size_t k = net.output_dim();
    std::vector<double> out(n, 0.0);
    constexpr std::size_t chunk = 512;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t count = std::min(chunk, n - start);
        Tensor batch({count, cols},
                     std::vector<double>(rows.begin() + start * cols,
                                         rows.begin() + (start + count) * cols));
        const Tensor pred = net.forward(batch);
        for (std::size_t b = 0; b < count; ++b) {
            const double* z = &pred.values[b * k];
            switch (metric) {
                case Metric::squared_error: {
                    const double diff = z[0] - labels[start + b];
                    out[start + b] = diff * diff;
                    break;
                }
                case Metric::cross_entropy: {
                    const std::size_t y = checked_label(labels[start + b], k);
                    double m = z[0];
                    for (std::size_t j = 1; j < k; ++j) m = std::max(m, z[j]);
                    double sum = 0.0;
                    for (std::size_t j = 0; j < k; ++j) sum += std::exp(z[j] - m);
                    out[start + b] = std::log(sum) - (z[y] - m);
                    break;
                }
                case Metric::zero_one: {
                    const std::size_t y = checked_label(labels[start + b], k);
                    std::size_t arg = 0;
                    for (std::size_t j = 1; j < k; ++j)
                        if (z[j] > z[arg]) arg = j;
                    out[start + b] = arg == y ? 0.0 : 1.0;
                    break;
                }
            }
        }
    }
    return out;
}

double evaluate(const Network& net, std::span<const double> rows, std::size_t cols,
                std::span<const double> labels, Metric metric) {
    const std::vector<double> values = per_sample_metric(net, rows, cols, labels, metric);
    if (values.empty()) throw std::invalid_argument("cannot evaluate on an empty set");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    return metric == Metric::zero_one ? 1.0 - mean : mean;
}

namespace {

constexpr char kMagic[4] = {'T', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw std::runtime_error("checkpoint truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

std::uint32_t layer_tag(const LayerSpec& spec) {
    if (std::holds_alternative<DenseSpec>(spec)) return 0;
    if (std::holds_alternative<ReluSpec>(spec)) return 1;
    if (std::holds_alternative<Conv2dSpec>(spec)) return 2;
    if (std::holds_alternative<MaxPool2dSpec>(spec)) return 3;
    return 4;
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, net.head() == Head::squared_error ? 0 : 1);
    put_u32(out, static_cast<std::uint32_t>(net.num_classes()));
    put_u32(out, static_cast<std::uint32_t>(net.input_shape().size()));
    for (std::size_t d : net.input_shape()) put_u64(out, d);
    put_u32(out, static_cast<std::uint32_t>(net.layers().size()));
    for (const LayerSpec& spec : net.layers()) {
        put_u32(out, layer_tag(spec));
        if (const auto* d = std::get_if<DenseSpec>(&spec)) {
            put_u64(out, d->in);
            put_u64(out, d->out);
        } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
            put_u64(out, c->in_channels);
            put_u64(out, c->out_channels);
            put_u64(out, c->kernel);
        } else if (const auto* mp = std::get_if<MaxPool2dSpec>(&spec)) {
            put_u64(out, mp->window);
            put_u64(out, mp->stride);
        }
    }
    put_u64(out, net.parameter_count());
    for (double v : net.parameters()) put_f64(out, v);
    atomic_write_file(path, out);
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    ByteReader r{buf};
    r.need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw std::runtime_error("not a network checkpoint: " + path);
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const Head head = r.u32() == 0 ? Head::squared_error : Head::softmax_cross_entropy;
    const std::size_t num_classes = r.u32();
    std::vector<std::size_t> input_shape(r.u32());
    for (std::size_t& d : input_shape) d = r.u64();

    std::vector<LayerSpec> layers;
    const std::uint32_t layer_count = r.u32();
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        switch (r.u32()) {
            case 0: {
                const std::size_t lin = r.u64();
                const std::size_t lout = r.u64();
                layers.push_back(DenseSpec{lin, lout});
                break;
            }
            case 1:
                layers.push_back(ReluSpec{});
                break;
            case 2: {
                const std::size_t ic = r.u64();
                const std::size_t oc = r.u64();
                const std::size_t k = r.u64();
                layers.push_back(Conv2dSpec{ic, oc, k});
                break;
            }
            case 3: {
                const std::size_t win = r.u64();
                const std::size_t stride = r.u64();
                layers.push_back(MaxPool2dSpec{win, stride});
                break;
            }
            case 4:
                layers.push_back(FlattenSpec{});
                break;
            default:
                throw std::runtime_error("unknown layer tag in checkpoint: " + path);
        }
    }

    Network net(std::move(input_shape), std::move(layers), head, num_classes);
    const std::uint64_t count = r.u64();
    if (count != net.parameter_count())
        throw std::runtime_error("checkpoint parameter count does not match its architecture");
    for (std::size_t i = 0; i < count; ++i) net.parameters()[i] = r.f64();
    if (r.pos != buf.size()) throw std::runtime_error("trailing bytes in checkpoint: " + path);
    return net;
}

}  // namespace tsgd
