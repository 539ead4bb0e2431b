#include "tsgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsgd {

double StandardizationStats::scale(std::size_t col) const {
    const double sd = mode == StandardizeMode::overall ? std_devs[0] : std_devs[col];
    return std::max(sd, epsilon);
}

void validate_dataset(const Dataset& data) {
    if (data.rows < 1 || data.cols < 1) {
        throw std::invalid_argument("dataset must have at least one row and one column");
    }
    if (data.features.size() != data.rows * data.cols) {
        throw std::invalid_argument("feature storage does not match rows x cols");
    }
    if (data.labels.size() != data.rows) {
        throw std::invalid_argument("label count does not match row count");
    }
    for (double v : data.features) {
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite feature");
    }
    if (data.task == Task::classification) {
        if (data.num_classes < 1) throw std::invalid_argument("classification dataset needs num_classes >= 1");
        for (double v : data.labels) {
            const double r = std::round(v);
            if (!std::isfinite(v) || r != v || r < 0 || r >= static_cast<double>(data.num_classes)) {
                throw std::invalid_argument("classification label outside 0..k-1");
            }
        }
    } else {
        for (double v : data.labels) {
            if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite label");
        }
    }
}

namespace {

// Two accumulator passes per column; population variance (divide by n).
void column_stats(const Dataset& data, std::vector<double>& means, std::vector<double>& stds) {
    const std::size_t n = data.rows, p = data.cols;
    means.assign(p, 0.0);
    stds.assign(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = data.row(i);
        for (std::size_t j = 0; j < p; ++j) means[j] += r[j];
    }
    for (std::size_t j = 0; j < p; ++j) means[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = data.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = r[j] - means[j];
            stds[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < p; ++j) stds[j] = std::sqrt(stds[j] / static_cast<double>(n));
}

}  // namespace

StandardizationStats fit_standardization(const Dataset& data, StandardizeMode mode) {
    if (data.rows < 2) throw std::invalid_argument("standardization needs at least 2 rows");
    StandardizationStats stats;
    stats.mode = mode;
    if (mode == StandardizeMode::column_wise) {
        column_stats(data, stats.means, stats.std_devs);
    } else {
        const auto count = static_cast<double>(data.features.size());
        double mean = std::accumulate(data.features.begin(), data.features.end(), 0.0) / count;
        double var = 0.0;
        for (double v : data.features) var += (v - mean) * (v - mean);
        stats.means = {mean};
        stats.std_devs = {std::sqrt(var / count)};
    }
    if (data.task == Task::regression) {
        const auto n = static_cast<double>(data.rows);
        double mean = std::accumulate(data.labels.begin(), data.labels.end(), 0.0) / n;
        double var = 0.0;
        for (double v : data.labels) var += (v - mean) * (v - mean);
        stats.has_label_stats = true;
        stats.label_mean = mean;
        stats.label_std = std::sqrt(var / n);
    }
    return stats;
}

Dataset apply_standardization(const Dataset& data, const StandardizationStats& stats) {
    if (stats.mode == StandardizeMode::column_wise && stats.means.size() != data.cols) {
        throw std::invalid_argument("standardization stats dimension does not match dataset");
    }
    Dataset out = data;
    for (std::size_t i = 0; i < out.rows; ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) {
            const double mean = stats.mode == StandardizeMode::overall ? stats.means[0] : stats.means[j];
            r[j] = (r[j] - mean) / stats.scale(j);
        }
    }
    if (data.task == Task::regression && stats.has_label_stats) {
        const double sd = std::max(stats.label_std, stats.epsilon);
        for (double& y : out.labels) y = (y - stats.label_mean) / sd;
    }
    return out;
}

TargetSet apply_standardization(const TargetSet& targets, const StandardizationStats& stats) {
    if (stats.mode == StandardizeMode::column_wise && stats.means.size() != targets.dim) {
        throw std::invalid_argument("standardization stats dimension does not match targets");
    }
    TargetSet out = targets;
    for (std::size_t i = 0; i < out.count; ++i) {
        double* r = out.targets.data() + i * out.dim;
        for (std::size_t j = 0; j < out.dim; ++j) {
            const double mean = stats.mode == StandardizeMode::overall ? stats.means[0] : stats.means[j];
            r[j] = (r[j] - mean) / stats.scale(j);
        }
    }
    if (stats.has_label_stats) {
        const double sd = std::max(stats.label_std, stats.epsilon);
        for (double& y : out.held_out_labels) y = (y - stats.label_mean) / sd;
    }
    return out;
}

std::vector<std::size_t> sample_indices_without_replacement(std::size_t n, std::size_t g, Rng& rng) {
    if (g > n) throw std::invalid_argument("cannot draw more indices than available");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first g slots end up as the draw.
    for (std::size_t i = 0; i < g; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(g);
    return pool;
}

std::pair<Dataset, TargetSet> split_by_indices(const Dataset& data,
                                               const std::vector<std::size_t>& target_indices) {
    const std::size_t n = data.rows, g = target_indices.size();
    if (g < 1 || g > n - 1) throw std::invalid_argument("target group size must be in [1, n-1]");
    std::vector<char> is_target(n, 0);
    for (std::size_t idx : target_indices) {
        if (idx >= n) throw std::invalid_argument("target index out of range");
        if (is_target[idx]) throw std::invalid_argument("duplicate target index");
        is_target[idx] = 1;
    }

    const bool has_clusters = !data.cluster_ids.empty();
    TargetSet targets;
    targets.count = g;
    targets.dim = data.cols;
    targets.targets.reserve(g * data.cols);
    targets.held_out_labels.reserve(g);
    for (std::size_t idx : target_indices) {
        auto r = data.row(idx);
        targets.targets.insert(targets.targets.end(), r.begin(), r.end());
        targets.held_out_labels.push_back(data.labels[idx]);
        if (has_clusters) targets.cluster_ids.push_back(data.cluster_ids[idx]);
    }

    Dataset train;
    train.rows = n - g;
    train.cols = data.cols;
    train.task = data.task;
    train.num_classes = data.num_classes;
    train.name = data.name;
    train.spatial_shape = data.spatial_shape;
    train.features.reserve(train.rows * train.cols);
    train.labels.reserve(train.rows);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_target[i]) continue;
        auto r = data.row(i);
        train.features.insert(train.features.end(), r.begin(), r.end());
        train.labels.push_back(data.labels[i]);
        if (has_clusters) train.cluster_ids.push_back(data.cluster_ids[i]);
    }
    return {std::move(train), std::move(targets)};
}

std::pair<Dataset, TargetSet> split_for_targeting(const Dataset& data, std::size_t g, Rng& rng) {
    if (g < 1 || g > data.rows - 1) throw std::invalid_argument("target group size must be in [1, n-1]");
    return split_by_indices(data, sample_indices_without_replacement(data.rows, g, rng));
}

}  // namespace tsgd
