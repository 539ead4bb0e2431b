#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tsgd/cli.hpp"

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;  // manifest key the flag overrides
    const char* desc;
};

const std::vector<FlagSpec> kDataFlags = {
    {"--dataset", "dataset", "CSV path, 'idx', or 'synth'"},
    {"--label-col", "label_col", "CSV column holding the label"},
    {"--feature-cols", "feature_cols", "comma-separated CSV feature columns"},
    {"--header", "header", "CSV header handling: auto, true, or false"},
    {"--task", "task", "regression or classification"},
    {"--num-classes", "num_classes", "class count (0 = infer)"},
    {"--label-shift", "label_shift", "subtracted from raw class labels"},
    {"--idx-images", "idx_images", "IDX image file"},
    {"--idx-labels", "idx_labels", "IDX label file"},
    {"--limit", "limit", "keep only the first N samples (0 = all)"},
};

const std::vector<FlagSpec> kTargetFlags = {
    {"--targets", "targets", "CSV of target rows (full layout or features only)"},
    {"--target-indices", "target_indices", "comma-separated dataset rows used as targets"},
};

const std::vector<FlagSpec> kTrainingFlags = {
    {"--method", "method", "standard, targeted-batch, or targeted-resample"},
    {"--epochs", "epochs", "training epochs"},
    {"--batch-size", "batch_size", "mini-batch size"},
    {"--lr", "lr", "SGD learning rate"},
    {"--t", "t", "resampled dataset size multiplier"},
    {"--arch", "arch", "mlp or conv"},
    {"--hidden", "hidden", "comma-separated hidden widths for mlp"},
    {"--measure", "measure", "cosine-max or uniform"},
    {"--standardize", "standardize", "none, column-wise, or overall"},
};

const std::vector<FlagSpec> kExperimentFlags = {
    {"--g", "g", "target-group size (count, or fraction of n when < 1)"},
    {"--splits", "splits", "number of random splits"},
    {"--threads", "threads", "parallel split workers"},
    {"--target-cluster", "target_cluster", "draw targets from one synthetic cluster"},
};

const std::vector<FlagSpec> kSynthFlags = {
    {"--synth-n", "synth_n_per_cluster", "samples per cluster"},
    {"--synth-p", "synth_p", "feature dimension"},
    {"--synth-clusters", "synth_clusters", "cluster count"},
    {"--synth-task", "synth_task", "regression or classification"},
    {"--synth-mean-scale", "synth_mean_scale", "cluster-mean magnitude in noise units"},
    {"--synth-noise-std", "synth_noise_std", "within-cluster standard deviation"},
    {"--synth-label-noise", "synth_label_noise", "regression label noise"},
    {"--synth-label-flip", "synth_label_flip", "classification label flip rate"},
};

struct VerbState {
    std::string manifest_path;
    std::vector<std::string> set_pairs;
    // flag storage must outlive parsing; list keeps addresses stable
    std::vector<std::unique_ptr<std::string>> storage;
    std::vector<std::pair<CLI::Option*, std::pair<std::string, std::string*>>> bindings;
};

void add_flags(CLI::App* sub, VerbState& state, const std::vector<FlagSpec>& specs) {
    for (const FlagSpec& spec : specs) {
        state.storage.push_back(std::make_unique<std::string>());
        std::string* slot = state.storage.back().get();
        CLI::Option* opt =
            sub->add_option(spec.flag, *slot,
                            std::string(spec.desc) + " (manifest key: " + spec.key + ")");
        state.bindings.emplace_back(opt, std::make_pair(std::string(spec.key), slot));
    }
}

void add_common(CLI::App* sub, VerbState& state) {
    sub->add_option("--manifest", state.manifest_path,
                    "key = value configuration file; flags override its entries");
    sub->add_option("--set", state.set_pairs,
                    "extra manifest entry as key=value (repeatable)");
    add_flags(sub, state,
              {{"--seed", "seed", "master random seed"},
               {"--out", "out", "output path or prefix"}});
}

tsgd::Manifest build_manifest(const VerbState& state) {
    tsgd::Manifest m;
    if (!state.manifest_path.empty()) m = tsgd::load_manifest(state.manifest_path);
    for (const std::string& pair : state.set_pairs) {
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("--set expects key=value, got '" + pair + "'");
        m[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    for (const auto& [opt, kv] : state.bindings)
        if (opt->count() > 0) m[kv.first] = *kv.second;
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"targetsgd: similarity-targeted SGD training and experiment harness"};
    app.require_subcommand(1);

    std::map<std::string, VerbState> states;

    CLI::App* score = app.add_subcommand(
        "score", "write per-row similarity scores and drawing probabilities");
    add_common(score, states["score"]);
    add_flags(score, states["score"], kDataFlags);
    add_flags(score, states["score"], kTargetFlags);
    add_flags(score, states["score"],
              {{"--measure", "measure", "cosine-max or uniform"},
               {"--standardize", "standardize", "none, column-wise, or overall"}});

    CLI::App* resample = app.add_subcommand(
        "resample", "materialize a similarity-weighted resampled dataset as CSV");
    add_common(resample, states["resample"]);
    add_flags(resample, states["resample"], kDataFlags);
    add_flags(resample, states["resample"], kTargetFlags);
    add_flags(resample, states["resample"],
              {{"--t", "t", "resampled dataset size multiplier"},
               {"--measure", "measure", "cosine-max or uniform"},
               {"--standardize", "standardize", "none, column-wise, or overall"}});

    CLI::App* train = app.add_subcommand(
        "train", "train one method once; write metrics and a parameter checkpoint");
    add_common(train, states["train"]);
    add_flags(train, states["train"], kDataFlags);
    add_flags(train, states["train"], kTargetFlags);
    add_flags(train, states["train"], kTrainingFlags);

    CLI::App* experiment = app.add_subcommand(
        "experiment", "standard-vs-targeted comparison over repeated splits");
    add_common(experiment, states["experiment"]);
    add_flags(experiment, states["experiment"], kDataFlags);
    add_flags(experiment, states["experiment"], kTrainingFlags);
    add_flags(experiment, states["experiment"], kExperimentFlags);

    CLI::App* t_study = app.add_subcommand(
        "t-study", "rerun the resample method across several t values with paired splits");
    add_common(t_study, states["t-study"]);
    add_flags(t_study, states["t-study"], kDataFlags);
    add_flags(t_study, states["t-study"], kTrainingFlags);
    add_flags(t_study, states["t-study"], kExperimentFlags);
    add_flags(t_study, states["t-study"],
              {{"--t-values", "t_values", "comma-separated t values"}});

    CLI::App* group_study = app.add_subcommand(
        "group-study", "rerun the comparison across several target-group sizes");
    add_common(group_study, states["group-study"]);
    add_flags(group_study, states["group-study"], kDataFlags);
    add_flags(group_study, states["group-study"], kTrainingFlags);
    add_flags(group_study, states["group-study"], kExperimentFlags);
    add_flags(group_study, states["group-study"],
              {{"--g-values", "g_values", "comma-separated group sizes or fractions"}});

    CLI::App* synth = app.add_subcommand(
        "synth", "generate the clustered synthetic dataset as CSV");
    add_common(synth, states["synth"]);
    add_flags(synth, states["synth"], kSynthFlags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const CLI::App* parsed = app.get_subcommands().front();
    const std::string verb = parsed->get_name();
    try {
        const tsgd::Manifest m = build_manifest(states[verb]);
        return tsgd::run_command(verb, m, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"command", verb}, {"error", e.what()}}.dump() << "\n";
        return 1;
    }
}
