#pragma once

#include <cstdint>

#include "tsgd/dataset.hpp"

namespace tsgd {

/// Gaussian clusters with deterministic sign-pattern mean directions.
/// Clusters come in +/- pairs along each pattern, so the first two sit in
/// exactly opposite directions. Regression labels follow a distinct linear
/// map per cluster; classification labels are the cluster index, with an
/// optional flip rate for harder tasks.
struct SyntheticSpec {
    std::size_t n_per_cluster = 100;
    std::size_t p = 5;
    std::size_t cluster_count = 2;
    std::uint64_t seed = 0;
    Task task = Task::regression;
    double mean_scale = 4.0;  // per-coordinate cluster-mean magnitude, in noise-std units
    double noise_std = 1.0;
    double label_noise_std = 0.1;  // regression
    double label_flip = 0.0;       // classification: P(label replaced by another class)
};

Dataset generate_synthetic_clustered(const SyntheticSpec& spec);

/// Shorthand with the default regression label model.
Dataset generate_synthetic_clustered(std::size_t n_per_cluster, std::size_t p,
                                     std::size_t cluster_count, std::uint64_t seed);

/// Mean vector of a given cluster under a SyntheticSpec (exposed for tests).
std::vector<double> synthetic_cluster_mean(const SyntheticSpec& spec, std::size_t cluster);

}  // namespace tsgd
