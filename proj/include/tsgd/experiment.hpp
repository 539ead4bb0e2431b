#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsgd/dataset.hpp"
#include "tsgd/network.hpp"
#include "tsgd/rng.hpp"
#include "tsgd/similarity.hpp"

namespace tsgd {

enum class Method {
    standard,                 // shuffled-epoch uniform batching
    targeted_weighted_batch,  // alias-table draws proportional to similarity
    targeted_resample,        // materialized floor(t*n)-row dataset, uniform batching
};

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct ArchitectureSpec {
    enum class Kind { mlp, conv };
    Kind kind = Kind::mlp;
    std::vector<std::size_t> hidden{150, 50};  // mlp only; may be empty (linear model)
};

enum class StandardizeOption { none, column_wise, overall };

struct ExperimentConfig {
    std::vector<Method> methods{Method::standard, Method::targeted_weighted_batch};
    double g = 1.0;  // >= 1 is an absolute count, in (0,1) a fraction of n
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 0.005;
    std::size_t splits = 20;
    std::uint64_t seed = 0;
    double t = 10.0;
    ArchitectureSpec architecture;
    SimilarityMeasure measure;
    // Defaults follow the task: column-wise for regression, overall for
    // classification. nullopt picks by task; none disables standardization.
    std::optional<StandardizeOption> standardize;
    std::optional<int> target_cluster;  // restrict target draws to one synthetic cluster
    std::size_t threads = 1;
};

void validate_config(const ExperimentConfig& config);

// Resolves the g field against a concrete dataset size.
std::size_t resolve_group_size(double g, std::size_t n);

struct MetricTrace {
    Method method = Method::standard;
    std::size_t split = 0;
    std::vector<double> training_loss;       // per epoch, the arm's own objective
    std::vector<double> target_metric;       // per epoch: MSE or accuracy on the targets
    std::vector<double> wall_clock_seconds;  // per epoch, cumulative since arm start
};

struct AggregateCurve {
    Method method = Method::standard;
    std::vector<double> training_mean, training_lower, training_upper;
    std::vector<double> metric_mean, metric_lower, metric_upper;
};

struct ExperimentResult {
    std::vector<MetricTrace> traces;  // ordered by (method index, split)
    std::vector<AggregateCurve> curves;
};

// Quantile with linear interpolation between order statistics (the convention
// every aggregate curve uses). q in [0,1].
double interpolated_quantile(std::span<const double> values, double q);

AggregateCurve aggregate_traces(Method method, std::span<const MetricTrace> traces);

// One partition: g rows become the (standardized) target set, the rest the
// training set. Deterministic in the rng state.
struct SplitData {
    Dataset train;
    TargetSet targets;
};
SplitData prepare_split(const Dataset& data, const ExperimentConfig& config, Rng& rng);

Network make_network(const ArchitectureSpec& arch, const Dataset& train, Rng& init_rng);

// Trains one arm on an already-prepared split, starting from the given
// parameters. Exposed so tests can control the partition and the initial
// network directly (label hygiene, paired-arm comparisons). The trained
// network is copied into trained_out when given.
MetricTrace run_single_arm(const Dataset& train, const TargetSet& targets, Method method,
                           const ExperimentConfig& config, const Network& init, Rng batch_rng,
                           Network* trained_out = nullptr);

// All methods on one shared partition with one shared initialization.
std::vector<MetricTrace> run_split(const Dataset& data, const ExperimentConfig& config,
                                   std::size_t split_index);

ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& config);

struct TStudyEntry {
    double t = 0.0;
    ExperimentResult result;
};
// One resample-method experiment per t value; split seeds depend only on the
// master seed, so curves are paired across t.
std::vector<TStudyEntry> run_t_sensitivity(const Dataset& data, const ExperimentConfig& base,
                                           const std::vector<double>& t_values);

struct GroupStudyEntry {
    double g_requested = 0.0;
    std::size_t g_resolved = 0;
    std::size_t train_rows = 0;
    ExperimentResult result;
};
std::vector<GroupStudyEntry> run_group_study(const Dataset& data, const ExperimentConfig& base,
                                             const std::vector<double>& g_values);

// Plot-ready artifacts: per-epoch rows for every (method, split), and a JSON
// document with the aggregate curves plus the configuration that made them.
void write_metrics_csv(const std::string& path, std::span<const MetricTrace> traces);
std::string metrics_csv_text(std::span<const MetricTrace> traces);
void write_summary_json(const std::string& path, const Dataset& data,
                        const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace tsgd
