#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace tsgd {

/// Dense row-major array with an explicit shape; shape[0] is the batch
/// dimension everywhere in this codebase.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), values(element_count(shape), 0.0) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> v)
        : shape(std::move(s)), values(std::move(v)) {}

    [[nodiscard]] std::size_t size() const { return values.size(); }

    static std::size_t element_count(const std::vector<std::size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }
};

}  // namespace tsgd
