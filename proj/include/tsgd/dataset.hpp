#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsgd/rng.hpp"

namespace tsgd {

enum class Task { regression, classification };

/// Labeled samples, features stored row-major (rows x cols).
/// For classification, labels hold class indices 0..num_classes-1 as doubles.
struct Dataset {
    std::vector<double> features;
    std::vector<double> labels;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Task task = Task::regression;
    std::size_t num_classes = 0;  // 0 for regression
    std::string name;

    // Optional metadata.
    std::vector<std::size_t> spatial_shape;  // e.g. {28, 28, 1} for images
    std::vector<int> cluster_ids;            // synthetic generator only

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {features.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {features.data() + i * cols, cols};
    }
};

/// Unlabeled inputs the training should be steered toward. The held-out
/// labels exist for evaluation only; nothing on the training path may
/// read them.
struct TargetSet {
    std::vector<double> targets;  // row-major, count x dim
    std::vector<double> held_out_labels;
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<int> cluster_ids;  // carried over from synthetic datasets

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {targets.data() + i * dim, dim};
    }
};

enum class StandardizeMode { column_wise, overall };

/// Per-column (or single overall) location/scale fitted on training rows.
/// Label stats are present only when fitted on a regression dataset.
struct StandardizationStats {
    StandardizeMode mode = StandardizeMode::column_wise;
    std::vector<double> means;     // length p, or length 1 for overall
    std::vector<double> std_devs;  // same shape, population convention
    double epsilon = 1e-8;
    bool has_label_stats = false;
    double label_mean = 0.0;
    double label_std = 0.0;

    [[nodiscard]] double scale(std::size_t col) const;
};

/// Fit means and standard deviations (population convention, divide by n)
/// on the given rows. Requires at least two rows.
StandardizationStats fit_standardization(const Dataset& data, StandardizeMode mode);

/// Returns a copy with each feature cell replaced by (x - mean) / max(std, epsilon).
/// Regression labels are standardized with the fitted label stats;
/// classification labels are left untouched.
Dataset apply_standardization(const Dataset& data, const StandardizationStats& stats);

/// Same transform for target vectors (and their held-out labels when the
/// stats carry regression label stats, so evaluation happens in the same
/// units the network is trained in).
TargetSet apply_standardization(const TargetSet& targets, const StandardizationStats& stats);

/// Remove the given rows from the dataset and return them as targets.
/// Indices must be distinct and in range; remaining rows keep their order.
std::pair<Dataset, TargetSet> split_by_indices(const Dataset& data,
                                               const std::vector<std::size_t>& target_indices);

/// Draw g rows uniformly at random without replacement as the target set;
/// the remaining rows form the training data. Deterministic given the rng.
std::pair<Dataset, TargetSet> split_for_targeting(const Dataset& data, std::size_t g, Rng& rng);

/// g distinct indices drawn uniformly from [0, n). Used by split_for_targeting
/// and by harness code that restricts the candidate pool first.
std::vector<std::size_t> sample_indices_without_replacement(std::size_t n, std::size_t g, Rng& rng);

void validate_dataset(const Dataset& data);

}  // namespace tsgd
