#include "tsgd/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsgd {

double cosine(std::span<const double> x, std::span<const double> w, double epsilon) {
    if (x.size() != w.size()) {
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(w.size()) + ")");
    }
    double dot = 0.0, xx = 0.0, ww = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * w[i];
        xx += x[i] * x[i];
        ww += w[i] * w[i];
    }
    if (std::sqrt(xx) < epsilon || std::sqrt(ww) < epsilon) return 0.0;
    // dot / sqrt(xx*ww) rather than dot / (sqrt(xx)*sqrt(ww)): with w a
    // power-of-two multiple of x this evaluates to exactly 1.0, so the
    // boundary case of the score is exact, not merely close.
    const double c = dot / std::sqrt(xx * ww);
    return std::clamp(c, -1.0, 1.0);
}

double similarity_to_targets(std::span<const double> x, const TargetSet& targets,
                             const SimilarityMeasure& measure) {
    if (targets.count == 0) throw std::invalid_argument("similarity: empty target set");
    if (measure.kind == MeasureKind::uniform) return 1.0;

    double best = 0.0;  // the 0 in the max clips anti-similar inputs
    for (std::size_t t = 0; t < targets.count; ++t) {
        best = std::max(best, cosine(x, targets.row(t), measure.epsilon));
    }
    return best;
}

SimilarityScores score_dataset(const Dataset& data, const TargetSet& targets,
                               const SimilarityMeasure& measure) {
    if (data.cols != targets.dim) {
        throw std::invalid_argument("score_dataset: dataset and targets disagree on dimension");
    }
    SimilarityScores out;
    out.scores.resize(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) {
        out.scores[i] = similarity_to_targets(data.row(i), targets, measure);
    }
    for (double s : out.scores) out.total_mass += s;
    return out;
}

}  // namespace tsgd
