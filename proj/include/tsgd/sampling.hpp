#pragma once

#include <cstddef>
#include <vector>

#include "tsgd/dataset.hpp"
#include "tsgd/rng.hpp"
#include "tsgd/similarity.hpp"

namespace tsgd {

enum class Scheme { weighted_batch, resample_dataset };
enum class ZeroMassFallback { uniform, error };

/// Normalized per-sample drawing probabilities. When the scores sum to
/// zero the plan either degrades to uniform (used_fallback set, so callers
/// can warn) or construction fails, depending on the fallback policy.
struct SamplingPlan {
    std::vector<double> probabilities;
    Scheme scheme = Scheme::weighted_batch;
    double t = 10.0;  // resample size multiplier, only meaningful for resample_dataset
    ZeroMassFallback fallback = ZeroMassFallback::uniform;
    bool used_fallback = false;
};

/// Walker/Vose alias structure: O(n) to build, O(1) per categorical draw.
struct AliasTable {
    std::vector<double> probability_row;  // in [0, 1]
    std::vector<std::size_t> alias_row;

    [[nodiscard]] std::size_t size() const { return probability_row.size(); }

    std::size_t draw(Rng& rng) const {
        const std::size_t slot = rng.uniform_index(size());
        return rng.uniform() < probability_row[slot] ? slot : alias_row[slot];
    }
};

/// A mini-batch assembled from dataset rows (kept contiguous for the
/// network kernels). Indices retained so tests can audit the draw.
struct Batch {
    std::vector<double> inputs;  // row-major, size() x cols
    std::vector<double> labels;
    std::vector<std::size_t> indices;
    std::size_t cols = 0;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
};

SamplingPlan build_plan(const SimilarityScores& scores, Scheme scheme,
                        ZeroMassFallback fallback = ZeroMassFallback::uniform, double t = 10.0);

AliasTable build_alias_table(const SamplingPlan& plan);

/// Probability of each index implied by the table; the build must
/// reproduce the plan probabilities through this to 1e-9.
std::vector<double> reconstruct_probabilities(const AliasTable& table);

/// b independent draws with replacement from the plan's distribution.
std::vector<std::size_t> draw_indices(const AliasTable& table, std::size_t b, Rng& rng);

Batch gather_batch(const Dataset& data, const std::vector<std::size_t>& indices);

Batch draw_batch(const AliasTable& table, const Dataset& data, std::size_t b, Rng& rng);

/// Materialize floor(t*n) i.i.d. draws from the plan as a new dataset, so
/// plain uniform-batching pipelines inherit the weighted distribution as a
/// preprocessing step. The original dataset is untouched.
Dataset resample_dataset(const SamplingPlan& plan, const Dataset& data, double t, Rng& rng);

}  // namespace tsgd
