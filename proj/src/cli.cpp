#include "tsgd/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "tsgd/idx.hpp"
#include "tsgd/network.hpp"
#include "tsgd/sampling.hpp"
#include "tsgd/synthetic.hpp"

namespace tsgd {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream stream(s);
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double_field(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw std::invalid_argument("manifest field '" + key + "': not a number: '" + value +
                                    "'");
    return v;
}

std::size_t parse_count_field(const std::string& key, const std::string& value) {
    std::size_t v = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("manifest field '" + key + "': not a count: '" + value +
                                    "'");
    return v;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& source) {
    Manifest m;
    std::stringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": empty key");
        m[key] = value;  // later duplicates win
    }
    return m;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, path);
}

bool manifest_has(const Manifest& m, const std::string& key) { return m.count(key) > 0; }

std::string manifest_string(const Manifest& m, const std::string& key,
                            const std::string& fallback) {
    const auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

double manifest_double(const Manifest& m, const std::string& key, double fallback) {
    const auto it = m.find(key);
    return it == m.end() ? fallback : parse_double_field(key, it->second);
}

std::size_t manifest_count(const Manifest& m, const std::string& key, std::size_t fallback) {
    const auto it = m.find(key);
    return it == m.end() ? fallback : parse_count_field(key, it->second);
}

std::uint64_t manifest_u64(const Manifest& m, const std::string& key, std::uint64_t fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    std::uint64_t v = 0;
    const char* begin = it->second.data();
    const char* end = begin + it->second.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("manifest field '" + key + "': not an integer: '" +
                                    it->second + "'");
    return v;
}

bool manifest_flag(const Manifest& m, const std::string& key, bool fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw std::invalid_argument("manifest field '" + key + "': not a boolean: '" + it->second +
                                "'");
}

std::vector<double> manifest_double_list(const Manifest& m, const std::string& key,
                                         const std::vector<double>& fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(it->second))
        out.push_back(parse_double_field(key, item));
    if (out.empty())
        throw std::invalid_argument("manifest field '" + key + "': empty list");
    return out;
}

std::vector<std::size_t> manifest_count_list(const Manifest& m, const std::string& key,
                                             const std::vector<std::size_t>& fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(it->second))
        out.push_back(parse_count_field(key, item));
    return out;
}

namespace {

Task parse_task_field(const std::string& key, const std::string& value) {
    if (value == "regression") return Task::regression;
    if (value == "classification") return Task::classification;
    throw std::invalid_argument("manifest field '" + key +
                                "': expected regression or classification, got '" + value + "'");
}

CsvSchema csv_schema_from_manifest(const Manifest& m) {
    CsvSchema schema;
    schema.label_col = manifest_count(m, "label_col", 0);
    schema.feature_cols = manifest_count_list(m, "feature_cols", {});
    const std::string header = manifest_string(m, "header", "auto");
    if (header == "true")
        schema.header = true;
    else if (header == "false")
        schema.header = false;
    else if (header != "auto")
        throw std::invalid_argument("manifest field 'header': expected auto, true, or false");
    schema.task = parse_task_field("task", manifest_string(m, "task", "regression"));
    schema.num_classes = manifest_count(m, "num_classes", 0);
    schema.label_shift = static_cast<long>(std::llround(manifest_double(m, "label_shift", 0.0)));
    return schema;
}

SyntheticSpec synth_spec_from_manifest(const Manifest& m) {
    SyntheticSpec spec;
    spec.n_per_cluster = manifest_count(m, "synth_n_per_cluster", spec.n_per_cluster);
    spec.p = manifest_count(m, "synth_p", spec.p);
    spec.cluster_count = manifest_count(m, "synth_clusters", spec.cluster_count);
    spec.seed = manifest_u64(m, "synth_seed", manifest_u64(m, "seed", 0));
    spec.task = parse_task_field("synth_task", manifest_string(m, "synth_task", "regression"));
    spec.mean_scale = manifest_double(m, "synth_mean_scale", spec.mean_scale);
    spec.noise_std = manifest_double(m, "synth_noise_std", spec.noise_std);
    spec.label_noise_std = manifest_double(m, "synth_label_noise", spec.label_noise_std);
    spec.label_flip = manifest_double(m, "synth_label_flip", spec.label_flip);
    return spec;
}

// Plain numeric table used for feature-only target files: every cell must
// parse, rows must share a width, an unparseable first row is a header.
std::vector<std::vector<double>> read_numeric_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open targets file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<double> row;
        bool ok = true;
        for (const std::string& cell : split_list(line)) {
            double v = 0.0;
            const char* begin = cell.data();
            const auto [ptr, ec] = std::from_chars(begin, begin + cell.size(), v);
            if (ec != std::errc{} || ptr != begin + cell.size() || !std::isfinite(v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (first_content) {  // header row
                first_content = false;
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": unparseable numeric row");
        }
        first_content = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no target rows");
    return rows;
}

}  // namespace

LoadedData load_dataset_from_manifest(const Manifest& m) {
    const std::string dataset = manifest_string(m, "dataset", "");
    if (dataset.empty())
        throw std::invalid_argument("manifest field 'dataset' is required "
                                    "(a CSV path, 'idx', or 'synth')");

    LoadedData loaded;
    if (dataset == "synth") {
        loaded.source = LoadedData::Source::synth;
        loaded.data = generate_synthetic_clustered(synth_spec_from_manifest(m));
        loaded.schema.task = loaded.data.task;
        loaded.schema.num_classes = loaded.data.num_classes;
    } else if (dataset == "idx") {
        const std::string images = manifest_string(m, "idx_images", "");
        const std::string labels = manifest_string(m, "idx_labels", "");
        if (images.empty() || labels.empty())
            throw std::invalid_argument(
                "idx datasets need manifest fields 'idx_images' and 'idx_labels'");
        const std::size_t limit = manifest_count(m, "limit", 0);
        loaded.source = LoadedData::Source::idx;
        loaded.data = load_idx_images(images, labels,
                                      limit == 0 ? std::nullopt
                                                 : std::optional<std::size_t>(limit));
        loaded.schema.task = Task::classification;
        loaded.schema.num_classes = loaded.data.num_classes;
    } else {
        loaded.source = LoadedData::Source::csv;
        loaded.schema = csv_schema_from_manifest(m);
        loaded.data = load_csv(dataset, loaded.schema, &loaded.header);
    }
    return loaded;
}

TargetSet load_targets_from_manifest(const Manifest& m, const LoadedData& loaded) {
    const Dataset& data = loaded.data;
    if (manifest_has(m, "target_indices")) {
        const std::vector<std::size_t> ids = manifest_count_list(m, "target_indices", {});
        if (ids.empty()) throw std::invalid_argument("manifest field 'target_indices': empty");
        TargetSet targets;
        targets.count = ids.size();
        targets.dim = data.cols;
        for (std::size_t id : ids) {
            if (id >= data.rows)
                throw std::invalid_argument("target_indices: row " + std::to_string(id) +
                                            " out of range (n = " + std::to_string(data.rows) +
                                            ")");
            const auto row = data.row(id);
            targets.targets.insert(targets.targets.end(), row.begin(), row.end());
            targets.held_out_labels.push_back(data.labels[id]);
        }
        return targets;
    }

    const std::string path = manifest_string(m, "targets", "");
    if (path.empty())
        throw std::invalid_argument(
            "targets are required: set 'targets' (a CSV) or 'target_indices' (rows)");

    // A file in the dataset's own layout gives labeled targets; a bare
    // p-column table gives feature-only targets.
    try {
        const Dataset t = load_csv(path, loaded.schema);
        if (t.cols == data.cols) {
            TargetSet targets;
            targets.count = t.rows;
            targets.dim = t.cols;
            targets.targets = t.features;
            targets.held_out_labels = t.labels;
            return targets;
        }
    } catch (const std::exception&) {
        // fall through to the feature-only reading
    }

    const std::vector<std::vector<double>> rows = read_numeric_table(path);
    if (rows.front().size() != data.cols)
        throw std::invalid_argument("targets file " + path + " has " +
                                    std::to_string(rows.front().size()) +
                                    " columns; expected " + std::to_string(data.cols) +
                                    " features or the dataset's full layout");
    TargetSet targets;
    targets.count = rows.size();
    targets.dim = data.cols;
    for (const std::vector<double>& row : rows)
        targets.targets.insert(targets.targets.end(), row.begin(), row.end());
    return targets;
}

namespace {

SimilarityMeasure measure_from_manifest(const Manifest& m) {
    SimilarityMeasure measure;
    const std::string kind = manifest_string(m, "measure", "cosine-max");
    if (kind == "cosine-max")
        measure.kind = MeasureKind::cosine_max;
    else if (kind == "uniform")
        measure.kind = MeasureKind::uniform;
    else
        throw std::invalid_argument(
            "manifest field 'measure': expected cosine-max or uniform, got '" + kind + "'");
    return measure;
}

std::optional<StandardizeOption> standardize_from_manifest(const Manifest& m) {
    if (!manifest_has(m, "standardize")) return std::nullopt;
    const std::string mode = manifest_string(m, "standardize", "");
    if (mode == "none") return StandardizeOption::none;
    if (mode == "column-wise") return StandardizeOption::column_wise;
    if (mode == "overall") return StandardizeOption::overall;
    throw std::invalid_argument(
        "manifest field 'standardize': expected none, column-wise, or overall, got '" + mode +
        "'");
}

ArchitectureSpec architecture_from_manifest(const Manifest& m) {
    ArchitectureSpec arch;
    const std::string kind = manifest_string(m, "arch", "mlp");
    if (kind == "conv")
        arch.kind = ArchitectureSpec::Kind::conv;
    else if (kind != "mlp")
        throw std::invalid_argument("manifest field 'arch': expected mlp or conv, got '" + kind +
                                    "'");
    arch.hidden = manifest_count_list(m, "hidden", arch.hidden);
    return arch;
}

// Image runs get the desk-scale defaults unless the manifest says otherwise.
Manifest with_dataset_defaults(const Manifest& m) {
    Manifest mm = m;
    if (manifest_string(mm, "dataset", "") == "idx") {
        if (!manifest_has(mm, "limit")) mm["limit"] = "10000";
        if (!manifest_has(mm, "epochs")) mm["epochs"] = "20";
        if (!manifest_has(mm, "arch")) mm["arch"] = "conv";
    }
    return mm;
}

std::string out_prefix(const Manifest& m, const std::string& fallback) {
    return manifest_string(m, "out", fallback);
}

std::string final_metric_line(const AggregateCurve& curve) {
    return to_string(curve.method) + ": final mean trainingLoss " +
           format_double(curve.training_mean.back()) + ", final mean targetMetric " +
           format_double(curve.metric_mean.back());
}

}  // namespace

ExperimentConfig experiment_config_from_manifest(const Manifest& m) {
    ExperimentConfig config;
    config.methods.clear();
    for (const std::string& name :
         split_list(manifest_string(m, "method", "standard,targeted-batch")))
        config.methods.push_back(parse_method(name));
    config.g = manifest_double(m, "g", config.g);
    config.epochs = manifest_count(m, "epochs", config.epochs);
    config.batch_size = manifest_count(m, "batch_size", config.batch_size);
    config.learning_rate = manifest_double(m, "lr", config.learning_rate);
    config.splits = manifest_count(m, "splits", config.splits);
    config.seed = manifest_u64(m, "seed", config.seed);
    config.t = manifest_double(m, "t", config.t);
    config.architecture = architecture_from_manifest(m);
    config.measure = measure_from_manifest(m);
    config.standardize = standardize_from_manifest(m);
    if (manifest_has(m, "target_cluster"))
        config.target_cluster = static_cast<int>(manifest_count(m, "target_cluster", 0));
    config.threads = manifest_count(m, "threads", config.threads);
    validate_config(config);
    return config;
}

int cmd_score(const Manifest& m, std::ostream& diagnostics) {
    LoadedData loaded = load_dataset_from_manifest(m);

    // Scores are computed on raw features unless asked otherwise; indexed
    // targets are taken after the transform so self-similarity stays exact.
    const std::optional<StandardizeOption> mode = standardize_from_manifest(m);
    StandardizationStats stats;
    bool transformed = false;
    if (mode && *mode != StandardizeOption::none) {
        stats = fit_standardization(loaded.data, *mode == StandardizeOption::column_wise
                                                     ? StandardizeMode::column_wise
                                                     : StandardizeMode::overall);
        loaded.data = apply_standardization(loaded.data, stats);
        transformed = true;
    }
    TargetSet targets = load_targets_from_manifest(m, loaded);
    if (transformed && !manifest_has(m, "target_indices"))
        targets = apply_standardization(targets, stats);

    const SimilarityScores scores = score_dataset(loaded.data, targets, measure_from_manifest(m));
    const SamplingPlan plan = build_plan(scores, Scheme::weighted_batch);
    if (plan.used_fallback)
        diagnostics << "warning: all similarity scores are zero; "
                       "probabilities fall back to uniform\n";

    std::string csv = "rowIndex,similarity,probability\n";
    for (std::size_t i = 0; i < scores.scores.size(); ++i) {
        csv += std::to_string(i);
        csv += ',';
        csv += format_double(scores.scores[i]);
        csv += ',';
        csv += format_double(plan.probabilities[i]);
        csv += '\n';
    }
    const std::string out = out_prefix(m, "scores.csv");
    atomic_write_file(out, csv);
    diagnostics << "scored " << scores.scores.size() << " rows against " << targets.count
                << " targets -> " << out << "\n";
    return 0;
}

int cmd_resample(const Manifest& m, std::ostream& diagnostics) {
    const LoadedData loaded = load_dataset_from_manifest(m);
    const double t = manifest_double(m, "t", 10.0);

    // Scoring may happen in standardized space, but the emitted rows are
    // always the raw inputs so the file is a drop-in training set.
    LoadedData scoring = loaded;
    const std::optional<StandardizeOption> mode = standardize_from_manifest(m);
    StandardizationStats stats;
    bool transformed = false;
    if (mode && *mode != StandardizeOption::none) {
        stats = fit_standardization(scoring.data, *mode == StandardizeOption::column_wise
                                                      ? StandardizeMode::column_wise
                                                      : StandardizeMode::overall);
        scoring.data = apply_standardization(scoring.data, stats);
        transformed = true;
    }
    TargetSet targets = load_targets_from_manifest(m, scoring);
    if (transformed && !manifest_has(m, "target_indices"))
        targets = apply_standardization(targets, stats);

    const SimilarityScores scores =
        score_dataset(scoring.data, targets, measure_from_manifest(m));
    const SamplingPlan plan = build_plan(scores, Scheme::resample_dataset,
                                         ZeroMassFallback::uniform, t);
    if (plan.used_fallback)
        diagnostics << "warning: all similarity scores are zero; "
                       "probabilities fall back to uniform\n";

    Rng rng(manifest_u64(m, "seed", 0));
    const Dataset resampled = resample_dataset(plan, loaded.data, t, rng);
    const std::string out = out_prefix(m, "resampled.csv");
    write_csv(out, resampled, loaded.schema, loaded.header);
    diagnostics << "resampled " << loaded.data.rows << " rows into " << resampled.rows
                << " (t = " << format_double(t) << ") -> " << out << "\n";
    return 0;
}

int cmd_train(const Manifest& raw, std::ostream& diagnostics) {
    const Manifest m = with_dataset_defaults(raw);
    const LoadedData loaded = load_dataset_from_manifest(m);
    const Method method = parse_method(manifest_string(m, "method", "targeted-batch"));

    ExperimentConfig config;
    config.methods = {method};
    config.epochs = manifest_count(m, "epochs", 200);
    config.batch_size = manifest_count(m, "batch_size", config.batch_size);
    config.learning_rate = manifest_double(m, "lr", config.learning_rate);
    config.seed = manifest_u64(m, "seed", 0);
    config.t = manifest_double(m, "t", config.t);
    config.splits = 1;
    config.architecture = architecture_from_manifest(m);
    config.measure = measure_from_manifest(m);
    config.standardize = standardize_from_manifest(m);
    validate_config(config);

    // Indexed targets are held out of the training set, mirroring the
    // experiment protocol; file targets leave the dataset untouched.
    Dataset train = loaded.data;
    TargetSet targets;
    if (manifest_has(m, "target_indices")) {
        std::vector<std::size_t> ids = manifest_count_list(m, "target_indices", {});
        auto [rest, held] = split_by_indices(loaded.data, ids);
        train = std::move(rest);
        targets = std::move(held);
    } else {
        targets = load_targets_from_manifest(m, loaded);
    }
    if (targets.held_out_labels.size() != targets.count)
        throw std::invalid_argument(
            "train needs labeled targets: use target_indices or a targets file "
            "in the dataset's full layout");

    const StandardizeOption mode =
        config.standardize.value_or(train.task == Task::regression
                                        ? StandardizeOption::column_wise
                                        : StandardizeOption::overall);
    if (mode != StandardizeOption::none) {
        const StandardizationStats stats = fit_standardization(
            train, mode == StandardizeOption::column_wise ? StandardizeMode::column_wise
                                                          : StandardizeMode::overall);
        train = apply_standardization(train, stats);
        targets = apply_standardization(targets, stats);
    }

    const Rng master(config.seed);
    Rng init_rng = master.derive(1);
    const Network init = make_network(config.architecture, train, init_rng);
    Network trained = init;
    MetricTrace trace =
        run_single_arm(train, targets, method, config, init, master.derive(2), &trained);

    const std::string out = out_prefix(m, "train");
    write_metrics_csv(out + "_metrics.csv", {&trace, 1});
    save_network(trained, out + ".net");
    diagnostics << to_string(method) << ": trained " << config.epochs << " epochs on "
                << train.rows << " rows; final trainingLoss "
                << format_double(trace.training_loss.back()) << ", final targetMetric "
                << format_double(trace.target_metric.back()) << "\n"
                << "wrote " << out << "_metrics.csv and " << out << ".net\n";
    return 0;
}

int cmd_experiment(const Manifest& raw, std::ostream& diagnostics) {
    const Manifest m = with_dataset_defaults(raw);
    const ExperimentConfig config = experiment_config_from_manifest(m);
    const LoadedData loaded = load_dataset_from_manifest(m);

    const ExperimentResult result = run_experiment(loaded.data, config);
    const std::string out = out_prefix(m, "experiment");
    write_metrics_csv(out + "_metrics.csv", result.traces);
    write_summary_json(out + "_summary.json", loaded.data, config, result);

    diagnostics << "ran " << config.splits << " splits x " << config.methods.size()
                << " methods on " << loaded.data.rows << " rows\n";
    for (const AggregateCurve& curve : result.curves)
        diagnostics << "  " << final_metric_line(curve) << "\n";
    diagnostics << "wrote " << out << "_metrics.csv and " << out << "_summary.json\n";
    return 0;
}

int cmd_t_study(const Manifest& raw, std::ostream& diagnostics) {
    Manifest m = with_dataset_defaults(raw);
    if (!manifest_has(m, "method")) m["method"] = "targeted-resample";
    const ExperimentConfig base = experiment_config_from_manifest(m);
    const std::vector<double> t_values = manifest_double_list(m, "t_values", {5.0, 20.0});
    const LoadedData loaded = load_dataset_from_manifest(m);

    const std::vector<TStudyEntry> entries = run_t_sensitivity(loaded.data, base, t_values);
    const std::string out = out_prefix(m, "t_study");
    for (const TStudyEntry& entry : entries) {
        const std::string suffix = "_t" + format_double(entry.t);
        write_metrics_csv(out + suffix + "_metrics.csv", entry.result.traces);
        ExperimentConfig config = base;
        config.methods = {Method::targeted_resample};
        config.t = entry.t;
        write_summary_json(out + suffix + "_summary.json", loaded.data, config, entry.result);
        diagnostics << "t = " << format_double(entry.t) << ": "
                    << final_metric_line(entry.result.curves.front()) << "\n";
    }
    diagnostics << "wrote per-t metrics and summaries under prefix " << out << "\n";
    return 0;
}

int cmd_group_study(const Manifest& raw, std::ostream& diagnostics) {
    const Manifest m = with_dataset_defaults(raw);
    const ExperimentConfig base = experiment_config_from_manifest(m);
    const std::vector<double> g_values = manifest_double_list(m, "g_values", {1.0, 5.0});
    const LoadedData loaded = load_dataset_from_manifest(m);

    const std::vector<GroupStudyEntry> entries = run_group_study(loaded.data, base, g_values);
    const std::string out = out_prefix(m, "group_study");
    nlohmann::json index = nlohmann::json::array();
    for (const GroupStudyEntry& entry : entries) {
        const std::string suffix = "_g" + std::to_string(entry.g_resolved);
        write_metrics_csv(out + suffix + "_metrics.csv", entry.result.traces);
        ExperimentConfig config = base;
        config.g = entry.g_requested;
        write_summary_json(out + suffix + "_summary.json", loaded.data, config, entry.result);

        nlohmann::json item = {
            {"gRequested", entry.g_requested},
            {"gResolved", entry.g_resolved},
            {"trainingRows", entry.train_rows},
            {"metrics", out + suffix + "_metrics.csv"},
            {"summary", out + suffix + "_summary.json"},
        };
        index.push_back(std::move(item));
        diagnostics << "g = " << entry.g_resolved << " (" << entry.train_rows
                    << " training rows):\n";
        for (const AggregateCurve& curve : entry.result.curves)
            diagnostics << "  " << final_metric_line(curve) << "\n";
    }
    atomic_write_file(out + "_groups.json", index.dump(2) + "\n");
    diagnostics << "wrote per-g outputs and " << out << "_groups.json\n";
    return 0;
}

int cmd_synth(const Manifest& m, std::ostream& diagnostics) {
    const SyntheticSpec spec = synth_spec_from_manifest(m);
    const Dataset data = generate_synthetic_clustered(spec);
    CsvSchema schema;
    schema.task = data.task;
    schema.num_classes = data.num_classes;
    const std::string out = out_prefix(m, "synth.csv");
    write_csv(out, data, schema);
    diagnostics << "generated " << data.rows << " rows (" << spec.cluster_count
                << " clusters, p = " << spec.p << ") -> " << out << "\n";
    return 0;
}

int run_command(const std::string& verb, const Manifest& m, std::ostream& diagnostics) {
    if (verb == "score") return cmd_score(m, diagnostics);
    if (verb == "resample") return cmd_resample(m, diagnostics);
    if (verb == "train") return cmd_train(m, diagnostics);
    if (verb == "experiment") return cmd_experiment(m, diagnostics);
    if (verb == "t-study") return cmd_t_study(m, diagnostics);
    if (verb == "group-study") return cmd_group_study(m, diagnostics);
    if (verb == "synth") return cmd_synth(m, diagnostics);
    throw std::invalid_argument("unknown command '" + verb +
                                "' (expected score, resample, train, experiment, t-study, "
                                "group-study, or synth)");
}

}  // namespace tsgd
