#include "tsgd/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace tsgd {

SamplingPlan build_plan(const SimilarityScores& scores, Scheme scheme, ZeroMassFallback fallback,
                        double t) {
    const std::size_t n = scores.scores.size();
    if (n < 1) throw std::invalid_argument("build_plan: empty scores");
    for (double s : scores.scores) {
        if (!(s >= 0.0)) throw std::invalid_argument("build_plan: negative or NaN score");
    }

    SamplingPlan plan;
    plan.scheme = scheme;
    plan.t = t;
    plan.fallback = fallback;
    plan.probabilities.resize(n);
    if (scores.total_mass > 0.0) {
        for (std::size_t i = 0; i < n; ++i) plan.probabilities[i] = scores.scores[i] / scores.total_mass;
    } else {
        if (fallback == ZeroMassFallback::error) {
            throw std::runtime_error("build_plan: all similarity scores are zero");
        }
        plan.used_fallback = true;
        const double uniform = 1.0 / static_cast<double>(n);
        for (double& p : plan.probabilities) p = uniform;
    }
    return plan;
}

AliasTable build_alias_table(const SamplingPlan& plan) {
    const std::size_t n = plan.probabilities.size();
    AliasTable table;
    table.probability_row.resize(n);
    table.alias_row.resize(n);

    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = plan.probabilities[i] * static_cast<double>(n);

    std::vector<std::size_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);

    while (!small.empty() && !large.empty()) {
        const std::size_t s = small.back();
        small.pop_back();
        const std::size_t l = large.back();
        large.pop_back();
        table.probability_row[s] = scaled[s];
        table.alias_row[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers hold probability mass 1 up to rounding; self-aliased.
    for (std::size_t l : large) {
        table.probability_row[l] = 1.0;
        table.alias_row[l] = l;
    }
    for (std::size_t s : small) {
        table.probability_row[s] = 1.0;
        table.alias_row[s] = s;
    }
    return table;
}

std::vector<double> reconstruct_probabilities(const AliasTable& table) {
    const std::size_t n = table.size();
    std::vector<double> probs(n, 0.0);
    const double slot_mass = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        probs[i] += table.probability_row[i] * slot_mass;
        probs[table.alias_row[i]] += (1.0 - table.probability_row[i]) * slot_mass;
    }
    return probs;
}

std::vector<std::size_t> draw_indices(const AliasTable& table, std::size_t b, Rng& rng) {
    if (b < 1) throw std::invalid_argument("draw_indices: batch size must be >= 1");
    std::vector<std::size_t> out(b);
    for (std::size_t j = 0; j < b; ++j) out[j] = table.draw(rng);
    return out;
}

Batch gather_batch(const Dataset& data, const std::vector<std::size_t>& indices) {
    Batch batch;
    batch.cols = data.cols;
    batch.inputs.reserve(indices.size() * data.cols);
    batch.labels.reserve(indices.size());
    batch.indices = indices;
    for (std::size_t idx : indices) {
        auto r = data.row(idx);
        batch.inputs.insert(batch.inputs.end(), r.begin(), r.end());
        batch.labels.push_back(data.labels[idx]);
    }
    return batch;
}

Batch draw_batch(const AliasTable& table, const Dataset& data, std::size_t b, Rng& rng) {
    return gather_batch(data, draw_indices(table, b, rng));
}

Dataset resample_dataset(const SamplingPlan& plan, const Dataset& data, double t, Rng& rng) {
    if (plan.probabilities.size() != data.rows) {
        throw std::invalid_argument("resample_dataset: plan size does not match dataset");
    }
    if (!(t > 0.0)) throw std::invalid_argument("resample_dataset: t must be positive");
    const auto m = static_cast<std::size_t>(std::floor(t * static_cast<double>(data.rows)));
    if (m < 1) throw std::invalid_argument("resample_dataset: floor(t*n) must be >= 1");

    const AliasTable table = build_alias_table(plan);
    Dataset out;
    out.rows = m;
    out.cols = data.cols;
    out.task = data.task;
    out.num_classes = data.num_classes;
    out.name = data.name;
    out.spatial_shape = data.spatial_shape;
    out.features.reserve(m * data.cols);
    out.labels.reserve(m);
    const bool has_clusters = !data.cluster_ids.empty();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t idx = table.draw(rng);
        auto r = data.row(idx);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.labels.push_back(data.labels[idx]);
        if (has_clusters) out.cluster_ids.push_back(data.cluster_ids[idx]);
    }
    return out;
}

}  // namespace tsgd
