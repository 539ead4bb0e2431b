#include "tsgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "tsgd/csv.hpp"
#include "tsgd/sampling.hpp"

namespace tsgd {

namespace {

// Derivation keys for the per-split streams. Partition and initialization
// depend only on (seed, split), so every method and every t value sees the
// same data split and the same starting parameters; batch streams add the
// method so the arms draw independently.
constexpr std::uint64_t kPartitionKey = 0x100000000ULL;
constexpr std::uint64_t kInitKey = 0x200000000ULL;
constexpr std::uint64_t kBatchKey = 0x300000000ULL;

void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

StandardizeOption effective_standardize(const ExperimentConfig& config, Task task) {
    if (config.standardize) return *config.standardize;
    return task == Task::regression ? StandardizeOption::column_wise : StandardizeOption::overall;
}

// Hands out batches as slices of repeated shuffled passes over a fixed
// deck of row indices. A pass's last slice may be short; the next call
// reshuffles and starts the following pass, so decks whose size is not a
// multiple of the epoch length simply straddle epoch boundaries.
class ShuffledStream {
public:
    ShuffledStream(std::vector<std::size_t> deck, Rng& rng) : deck_(std::move(deck)), rng_(rng) {
        shuffle_indices(deck_, rng_);
    }

    std::vector<std::size_t> next(std::size_t want) {
        if (pos_ == deck_.size()) {
            shuffle_indices(deck_, rng_);
            pos_ = 0;
        }
        const std::size_t take = std::min(want, deck_.size() - pos_);
        std::vector<std::size_t> out(deck_.begin() + pos_, deck_.begin() + pos_ + take);
        pos_ += take;
        return out;
    }

private:
    std::vector<std::size_t> deck_;
    Rng& rng_;
    std::size_t pos_ = 0;
};

Metric training_metric_for(Task task) {
    return task == Task::regression ? Metric::squared_error : Metric::cross_entropy;
}

Metric target_metric_for(Task task) {
    return task == Task::regression ? Metric::squared_error : Metric::zero_one;
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::standard: return "standard";
        case Method::targeted_weighted_batch: return "targeted-batch";
        case Method::targeted_resample: return "targeted-resample";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "standard") return Method::standard;
    if (name == "targeted-batch") return Method::targeted_weighted_batch;
    if (name == "targeted-resample") return Method::targeted_resample;
    throw std::invalid_argument(
        "unknown method '" + name +
        "' (expected standard, targeted-batch, or targeted-resample)");
}

void validate_config(const ExperimentConfig& config) {
    if (config.methods.empty()) throw std::invalid_argument("no methods configured");
    if (config.splits < 1) throw std::invalid_argument("splits must be >= 1");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate))
        throw std::invalid_argument("learning rate must be positive");
    if (!(config.t > 0.0) || !std::isfinite(config.t))
        throw std::invalid_argument("t must be positive");
    if (!(config.g > 0.0) || !std::isfinite(config.g))
        throw std::invalid_argument("g must be positive");
    if (config.threads < 1) throw std::invalid_argument("threads must be >= 1");
    for (std::size_t w : config.architecture.hidden)
        if (w < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
}

std::size_t resolve_group_size(double g, std::size_t n) {
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("g must be positive");
    std::size_t resolved = 0;
    if (g < 1.0) {
        resolved = static_cast<std::size_t>(g * static_cast<double>(n));
        if (resolved < 1) resolved = 1;
    } else {
        const double rounded = std::round(g);
        if (std::abs(g - rounded) > 1e-9)
            throw std::invalid_argument("g must be a whole count when >= 1");
        resolved = static_cast<std::size_t>(rounded);
    }
    if (n < 2 || resolved > n - 1)
        throw std::invalid_argument("g = " + std::to_string(resolved) +
                                    " leaves no training rows (n = " + std::to_string(n) + ")");
    return resolved;
}

double interpolated_quantile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

AggregateCurve aggregate_traces(Method method, std::span<const MetricTrace> traces) {
    std::vector<const MetricTrace*> mine;
    for (const MetricTrace& tr : traces)
        if (tr.method == method) mine.push_back(&tr);
    if (mine.empty()) throw std::invalid_argument("no traces for method " + to_string(method));
    const std::size_t epochs = mine.front()->training_loss.size();
    for (const MetricTrace* tr : mine)
        if (tr->training_loss.size() != epochs || tr->target_metric.size() != epochs)
            throw std::invalid_argument("traces have mismatched epoch counts");

    AggregateCurve curve;
    curve.method = method;
    std::vector<double> column(mine.size());
    const auto fill = [&](std::vector<double> MetricTrace::* field, std::vector<double>& mean,
                          std::vector<double>& lower, std::vector<double>& upper) {
        for (std::size_t e = 0; e < epochs; ++e) {
            double sum = 0.0;
            for (std::size_t s = 0; s < mine.size(); ++s) {
                column[s] = ((*mine[s]).*field)[e];
                sum += column[s];
            }
            mean.push_back(sum / static_cast<double>(mine.size()));
            lower.push_back(interpolated_quantile(column, 0.25));
            upper.push_back(interpolated_quantile(column, 0.75));
        }
    };
    fill(&MetricTrace::training_loss, curve.training_mean, curve.training_lower,
         curve.training_upper);
    fill(&MetricTrace::target_metric, curve.metric_mean, curve.metric_lower, curve.metric_upper);
    return curve;
}

SplitData prepare_split(const Dataset& data, const ExperimentConfig& config, Rng& rng) {
    const std::size_t g = resolve_group_size(config.g, data.rows);

    std::vector<std::size_t> chosen;
    if (config.target_cluster) {
        if (data.cluster_ids.size() != data.rows)
            throw std::invalid_argument("target_cluster needs a dataset with cluster metadata");
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < data.rows; ++i)
            if (data.cluster_ids[i] == *config.target_cluster) pool.push_back(i);
        if (pool.size() < g)
            throw std::invalid_argument("cluster " + std::to_string(*config.target_cluster) +
                                        " has only " + std::to_string(pool.size()) + " rows");
        for (std::size_t k : sample_indices_without_replacement(pool.size(), g, rng))
            chosen.push_back(pool[k]);
    } else {
        chosen = sample_indices_without_replacement(data.rows, g, rng);
    }

    auto [train, targets] = split_by_indices(data, chosen);
    const StandardizeOption mode = effective_standardize(config, data.task);
    if (mode != StandardizeOption::none) {
        const StandardizationStats stats = fit_standardization(
            train, mode == StandardizeOption::column_wise ? StandardizeMode::column_wise
                                                          : StandardizeMode::overall);
        train = apply_standardization(train, stats);
        targets = apply_standardization(targets, stats);
    }
    return {std::move(train), std::move(targets)};
}

Network make_network(const ArchitectureSpec& arch, const Dataset& train, Rng& init_rng) {
    const Head head = train.task == Task::regression ? Head::squared_error
                                                     : Head::softmax_cross_entropy;
    if (arch.kind == ArchitectureSpec::Kind::mlp)
        return build_mlp(train.cols, arch.hidden, head, train.num_classes, init_rng);

    if (train.task != Task::classification)
        throw std::invalid_argument("the convolutional architecture is classification-only");
    if (train.spatial_shape.size() != 3 ||
        train.spatial_shape[0] * train.spatial_shape[1] * train.spatial_shape[2] != train.cols)
        throw std::invalid_argument("conv architecture needs image-shaped data");
    return build_conv_net(train.spatial_shape[2], train.spatial_shape[0], train.spatial_shape[1],
                          train.num_classes, init_rng);
}

MetricTrace run_single_arm(const Dataset& train, const TargetSet& targets, Method method,
                           const ExperimentConfig& config, const Network& init, Rng batch_rng,
                           Network* trained_out) {
    const std::size_t n = train.rows;
    if (n == 0) throw std::invalid_argument("training set is empty");
    const std::size_t batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;

    // Per-row weights defining this arm's training objective: uniform for
    // standard, plan probabilities for weighted batching, draw counts for
    // the resample arm. Reported as trainingLoss each epoch.
    std::vector<double> loss_weights(n, 1.0 / static_cast<double>(n));

    AliasTable table;
    std::unique_ptr<ShuffledStream> deck_stream;
    if (method == Method::standard) {
        std::vector<std::size_t> deck(n);
        for (std::size_t i = 0; i < n; ++i) deck[i] = i;
        deck_stream = std::make_unique<ShuffledStream>(std::move(deck), batch_rng);
    } else {
        const SimilarityScores scores = score_dataset(train, targets, config.measure);
        if (method == Method::targeted_weighted_batch) {
            const SamplingPlan plan = build_plan(scores, Scheme::weighted_batch);
            table = build_alias_table(plan);
            loss_weights = plan.probabilities;
        } else {
            const SamplingPlan plan =
                build_plan(scores, Scheme::resample_dataset, ZeroMassFallback::uniform, config.t);
            const auto m = static_cast<std::size_t>(config.t * static_cast<double>(n));
            if (m == 0)
                throw std::invalid_argument("t too small: the resampled dataset would be empty");
            std::vector<std::size_t> deck =
                draw_indices(build_alias_table(plan), m, batch_rng);
            std::fill(loss_weights.begin(), loss_weights.end(), 0.0);
            for (std::size_t i : deck) loss_weights[i] += 1.0 / static_cast<double>(m);
            deck_stream = std::make_unique<ShuffledStream>(std::move(deck), batch_rng);
        }
    }

    Network net = init;
    const Metric train_metric = training_metric_for(train.task);
    const Metric tgt_metric = target_metric_for(train.task);

    MetricTrace trace;
    trace.method = method;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t k = 0; k < batches_per_epoch; ++k) {
            const std::vector<std::size_t> indices =
                deck_stream ? deck_stream->next(config.batch_size)
                            : draw_indices(table, config.batch_size, batch_rng);
            const Batch batch = gather_batch(train, indices);
            Tensor inputs({batch.size(), batch.cols}, batch.inputs);
            const auto [loss, grad] = net.loss_and_gradient(inputs, batch.labels);
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged: non-finite loss (method=" +
                                         to_string(method) + ", epoch=" + std::to_string(epoch + 1) +
                                         ", batch=" + std::to_string(k + 1) + ")");
            sgd_step(net, grad, config.learning_rate);
        }

        const std::vector<double> per =
            per_sample_metric(net, train.features, train.cols, train.labels, train_metric);
        double training_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) training_loss += loss_weights[i] * per[i];
        const double target_value =
            evaluate(net, targets.targets, targets.dim, targets.held_out_labels, tgt_metric);
        if (!std::isfinite(training_loss) || !std::isfinite(target_value))
            throw std::runtime_error("training diverged: non-finite metric (method=" +
                                     to_string(method) + ", epoch=" + std::to_string(epoch + 1) +
                                     ")");

        trace.training_loss.push_back(training_loss);
        trace.target_metric.push_back(target_value);
        trace.wall_clock_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    if (trained_out) *trained_out = std::move(net);
    return trace;
}

std::vector<MetricTrace> run_split(const Dataset& data, const ExperimentConfig& config,
                                   std::size_t split_index) {
    const Rng master(config.seed);
    Rng split_rng = master.derive(kPartitionKey + split_index);
    Rng init_rng = master.derive(kInitKey + split_index);

    try {
        const SplitData split = prepare_split(data, config, split_rng);
        const Network init = make_network(config.architecture, split.train, init_rng);

        std::vector<MetricTrace> traces;
        for (Method method : config.methods) {
            Rng arm_rng = master.derive(kBatchKey + split_index * 8 +
                                        static_cast<std::uint64_t>(method));
            MetricTrace trace =
                run_single_arm(split.train, split.targets, method, config, init, arm_rng);
            trace.split = split_index;
            traces.push_back(std::move(trace));
        }
        return traces;
    } catch (const std::exception& e) {
        throw std::runtime_error("split " + std::to_string(split_index) + ": " + e.what());
    }
}

ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& config) {
    validate_config(config);
    const std::size_t splits = config.splits;
    std::vector<std::vector<MetricTrace>> per_split(splits);

    const std::size_t workers = std::min(config.threads, splits);
    if (workers <= 1) {
        for (std::size_t s = 0; s < splits; ++s) per_split[s] = run_split(data, config, s);
    } else {
        // Splits are independent; results land in per-split slots so the
        // output is identical to the sequential order.
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t s = next.fetch_add(1);
                    if (s >= splits) return;
                    try {
                        per_split[s] = run_split(data, config, s);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (std::thread& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    ExperimentResult out;
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
        for (std::size_t s = 0; s < splits; ++s)
            out.traces.push_back(std::move(per_split[s][mi]));
    for (Method method : config.methods)
        out.curves.push_back(aggregate_traces(method, out.traces));
    return out;
}

std::vector<TStudyEntry> run_t_sensitivity(const Dataset& data, const ExperimentConfig& base,
                                           const std::vector<double>& t_values) {
    if (t_values.empty()) throw std::invalid_argument("no t values given");
    bool has_resample = false;
    for (Method m : base.methods) has_resample |= m == Method::targeted_resample;
    if (!has_resample)
        throw std::invalid_argument("t study needs the targeted-resample method");

    std::vector<TStudyEntry> out;
    for (double t : t_values) {
        ExperimentConfig config = base;
        config.methods = {Method::targeted_resample};
        config.t = t;
        out.push_back({t, run_experiment(data, config)});
    }
    return out;
}

std::vector<GroupStudyEntry> run_group_study(const Dataset& data, const ExperimentConfig& base,
                                             const std::vector<double>& g_values) {
    if (g_values.empty()) throw std::invalid_argument("no g values given");
    std::vector<GroupStudyEntry> out;
    for (double g : g_values) {
        ExperimentConfig config = base;
        config.g = g;
        GroupStudyEntry entry;
        entry.g_requested = g;
        entry.g_resolved = resolve_group_size(g, data.rows);
        entry.train_rows = data.rows - entry.g_resolved;
        entry.result = run_experiment(data, config);
        out.push_back(std::move(entry));
    }
    return out;
}

std::string metrics_csv_text(std::span<const MetricTrace> traces) {
    std::string out = "method,split,epoch,trainingLoss,targetMetric,wallClockSeconds\n";
    for (const MetricTrace& tr : traces) {
        for (std::size_t e = 0; e < tr.training_loss.size(); ++e) {
            out += to_string(tr.method);
            out += ',';
            out += std::to_string(tr.split);
            out += ',';
            out += std::to_string(e + 1);
            out += ',';
            out += format_double(tr.training_loss[e]);
            out += ',';
            out += format_double(tr.target_metric[e]);
            out += ',';
            out += format_double(tr.wall_clock_seconds[e]);
            out += '\n';
        }
    }
    return out;
}

void write_metrics_csv(const std::string& path, std::span<const MetricTrace> traces) {
    atomic_write_file(path, metrics_csv_text(traces));
}

void write_summary_json(const std::string& path, const Dataset& data,
                        const ExperimentConfig& config, const ExperimentResult& result) {
    nlohmann::json j;
    j["dataset"] = {
        {"name", data.name},
        {"rows", data.rows},
        {"cols", data.cols},
        {"task", data.task == Task::regression ? "regression" : "classification"},
    };
    if (data.task == Task::classification) j["dataset"]["classes"] = data.num_classes;

    nlohmann::json methods = nlohmann::json::array();
    for (Method m : config.methods) methods.push_back(to_string(m));
    j["config"] = {
        {"methods", methods},
        {"g", config.g},
        {"epochs", config.epochs},
        {"batchSize", config.batch_size},
        {"learningRate", config.learning_rate},
        {"splits", config.splits},
        {"seed", config.seed},
        {"t", config.t},
        {"measure", config.measure.kind == MeasureKind::cosine_max ? "cosine-max" : "uniform"},
        {"architecture",
         config.architecture.kind == ArchitectureSpec::Kind::mlp ? "mlp" : "conv"},
        {"hidden", config.architecture.hidden},
    };

    nlohmann::json curves = nlohmann::json::array();
    for (const AggregateCurve& c : result.curves) {
        curves.push_back({
            {"method", to_string(c.method)},
            {"trainingLoss",
             {{"mean", c.training_mean}, {"lowerQuartile", c.training_lower},
              {"upperQuartile", c.training_upper}}},
            {"targetMetric",
             {{"mean", c.metric_mean}, {"lowerQuartile", c.metric_lower},
              {"upperQuartile", c.metric_upper}}},
        });
    }
    j["curves"] = std::move(curves);
    atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace tsgd
