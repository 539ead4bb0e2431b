#pragma once

#include <span>
#include <vector>

#include "tsgd/dataset.hpp"

namespace tsgd {

/// How a training input is scored against the target set. cosine_max is
/// the angle-based default: max{0, cos(x,w_1), cos(x,w_2), ...}. uniform
/// scores every sample 1, which collapses the weighted schemes onto plain
/// uniform sampling.
enum class MeasureKind { cosine_max, uniform };

struct SimilarityMeasure {
    MeasureKind kind = MeasureKind::cosine_max;
    double epsilon = 1e-8;  // vectors with norm below this count as dissimilar
};

/// One nonnegative score per training sample plus their sum.
struct SimilarityScores {
    std::vector<double> scores;
    double total_mass = 0.0;
};

/// Cosine of the angle between x and w; 0 when either norm is below epsilon.
double cosine(std::span<const double> x, std::span<const double> w, double epsilon = 1e-8);

/// Score one input against every target under the given measure.
double similarity_to_targets(std::span<const double> x, const TargetSet& targets,
                             const SimilarityMeasure& measure = {});

/// Score every row of the dataset; total_mass is summed in row order.
SimilarityScores score_dataset(const Dataset& data, const TargetSet& targets,
                               const SimilarityMeasure& measure = {});

}  // namespace tsgd
