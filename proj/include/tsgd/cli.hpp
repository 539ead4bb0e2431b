#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tsgd/csv.hpp"
#include "tsgd/dataset.hpp"
#include "tsgd/experiment.hpp"

namespace tsgd {

/// Flat key-value configuration shared by manifest files and command-line
/// flags; flags simply overwrite the keys they map to. Keys are documented
/// in the README.
using Manifest = std::map<std::string, std::string>;

/// Parse `key = value` lines; '#' starts a comment, blank lines are
/// ignored, later duplicates win. `source` names the input in errors.
Manifest parse_manifest(const std::string& text, const std::string& source);
Manifest load_manifest(const std::string& path);

// Typed field readers. Errors name the offending field and value.
std::string manifest_string(const Manifest& m, const std::string& key,
                            const std::string& fallback);
bool manifest_has(const Manifest& m, const std::string& key);
double manifest_double(const Manifest& m, const std::string& key, double fallback);
std::size_t manifest_count(const Manifest& m, const std::string& key, std::size_t fallback);
std::uint64_t manifest_u64(const Manifest& m, const std::string& key, std::uint64_t fallback);
bool manifest_flag(const Manifest& m, const std::string& key, bool fallback);
std::vector<double> manifest_double_list(const Manifest& m, const std::string& key,
                                         const std::vector<double>& fallback);
std::vector<std::size_t> manifest_count_list(const Manifest& m, const std::string& key,
                                             const std::vector<std::size_t>& fallback);

/// A dataset plus enough source details to re-export rows in the input layout.
struct LoadedData {
    enum class Source { csv, idx, synth };
    Dataset data;
    Source source = Source::csv;
    CsvSchema schema;                 // meaningful for csv sources
    std::vector<std::string> header;  // original column names, if the file had them
};

/// Resolve the `dataset` key: a CSV path, `idx` (with idx_images/idx_labels),
/// or `synth` (with the synth_* knobs).
LoadedData load_dataset_from_manifest(const Manifest& m);

/// Resolve `targets` (a CSV of target rows) or `target_indices` (rows of the
/// loaded dataset). Indexed targets keep their labels as held-out labels; a
/// feature-only targets file yields an empty held_out_labels vector.
TargetSet load_targets_from_manifest(const Manifest& m, const LoadedData& loaded);

ExperimentConfig experiment_config_from_manifest(const Manifest& m);

// Command implementations. Human-readable progress and warnings go to
// `diagnostics` (the CLI passes stderr); data goes only to files. Each
// returns a process exit code.
int cmd_score(const Manifest& m, std::ostream& diagnostics);
int cmd_resample(const Manifest& m, std::ostream& diagnostics);
int cmd_train(const Manifest& m, std::ostream& diagnostics);
int cmd_experiment(const Manifest& m, std::ostream& diagnostics);
int cmd_t_study(const Manifest& m, std::ostream& diagnostics);
int cmd_group_study(const Manifest& m, std::ostream& diagnostics);
int cmd_synth(const Manifest& m, std::ostream& diagnostics);

int run_command(const std::string& verb, const Manifest& m, std::ostream& diagnostics);

}  // namespace tsgd
