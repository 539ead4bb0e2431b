#include "tsgd/synthetic.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace tsgd {

namespace {

// Unit direction of cluster i: +/- a Walsh-style sign pattern. Pattern 0 is
// all-ones, pattern m flips sign with the parity of popcount(j & m), keeping
// the cluster means spread over every coordinate (standardization then
// rescales all columns comparably instead of flattening one).
double direction_entry(std::size_t cluster, std::size_t j, std::size_t p) {
    const std::size_t pattern = cluster / 2;
    const double sign = cluster % 2 == 0 ? 1.0 : -1.0;
    double entry = 1.0;
    if (pattern > 0 && (std::popcount(j & pattern) % 2) != 0) entry = -1.0;
    return sign * entry / std::sqrt(static_cast<double>(p));
}

}  // namespace

std::vector<double> synthetic_cluster_mean(const SyntheticSpec& spec, std::size_t cluster) {
    std::vector<double> mean(spec.p);
    const double radius = spec.mean_scale * spec.noise_std * std::sqrt(static_cast<double>(spec.p));
    for (std::size_t j = 0; j < spec.p; ++j) {
        mean[j] = radius * direction_entry(cluster, j, spec.p);
    }
    return mean;
}

Dataset generate_synthetic_clustered(const SyntheticSpec& spec) {
    if (spec.n_per_cluster < 1 || spec.p < 1 || spec.cluster_count < 1) {
        throw std::invalid_argument("synthetic spec counts must be >= 1");
    }
    // Sign patterns 0..p-1 are pairwise distinct on p coordinates, so at
    // most 2p clusters have distinct mean directions.
    if (spec.cluster_count > 2 * spec.p) {
        throw std::invalid_argument("at most 2*p clusters fit distinct directions");
    }

    const std::size_t k = spec.cluster_count;
    const std::size_t n = spec.n_per_cluster * k;
    Rng master(spec.seed);
    Rng coeff_rng = master.derive(1);
    Rng feature_rng = master.derive(2);
    Rng label_rng = master.derive(3);

    // Per-cluster linear label maps, drawn up front so the feature stream is
    // identical for both task kinds.
    std::vector<std::vector<double>> coeffs(k, std::vector<double>(spec.p));
    std::vector<double> intercepts(k);
    for (std::size_t c = 0; c < k; ++c) {
        for (auto& a : coeffs[c]) a = coeff_rng.normal();
        intercepts[c] = 2.0 * coeff_rng.normal();
    }

    Dataset data;
    data.rows = n;
    data.cols = spec.p;
    data.task = spec.task;
    data.num_classes = spec.task == Task::classification ? k : 0;
    data.name = "synthetic";
    data.features.resize(n * spec.p);
    data.labels.resize(n);
    data.cluster_ids.resize(n);

    std::size_t row = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const auto mean = synthetic_cluster_mean(spec, c);
        for (std::size_t s = 0; s < spec.n_per_cluster; ++s, ++row) {
            double* x = data.features.data() + row * spec.p;
            for (std::size_t j = 0; j < spec.p; ++j) {
                x[j] = mean[j] + spec.noise_std * feature_rng.normal();
            }
            data.cluster_ids[row] = static_cast<int>(c);
            if (spec.task == Task::regression) {
                double y = intercepts[c];
                for (std::size_t j = 0; j < spec.p; ++j) y += coeffs[c][j] * (x[j] - mean[j]);
                data.labels[row] = y + spec.label_noise_std * label_rng.normal();
            } else {
                std::size_t label = c;
                if (spec.label_flip > 0.0 && k > 1 && label_rng.uniform() < spec.label_flip) {
                    // Replace with a different class, uniform over the others.
                    std::size_t other = label_rng.uniform_index(k - 1);
                    label = other >= c ? other + 1 : other;
                }
                data.labels[row] = static_cast<double>(label);
            }
        }
    }
    validate_dataset(data);
    return data;
}

Dataset generate_synthetic_clustered(std::size_t n_per_cluster, std::size_t p,
                                     std::size_t cluster_count, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_per_cluster = n_per_cluster;
    spec.p = p;
    spec.cluster_count = cluster_count;
    spec.seed = seed;
    return generate_synthetic_clustered(spec);
}

}  // namespace tsgd
