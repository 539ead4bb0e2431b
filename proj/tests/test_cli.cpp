#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "temp_dir.hpp"
#include "tsgd/cli.hpp"
#include "tsgd/csv.hpp"
#include "tsgd/network.hpp"

using namespace tsgd;

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

// 60-row regression table the commands can chew through quickly.
Manifest synth_manifest() {
    return Manifest{
        {"dataset", "synth"}, {"synth_n_per_cluster", "20"}, {"synth_p", "4"},
        {"synth_clusters", "3"}, {"synth_seed", "11"},
    };
}

}  // namespace

TEST_CASE("manifests parse keys, comments and duplicates") {
    const Manifest m = parse_manifest(
        "# leading comment\n"
        "alpha = 1\n"
        "  beta=two words  # trailing comment\n"
        "\n"
        "alpha = 3\n",
        "inline");
    CHECK(m.size() == 2);
    CHECK(m.at("alpha") == "3");  // later duplicate wins
    CHECK(m.at("beta") == "two words");
}

TEST_CASE("manifest syntax errors carry the source and line") {
    try {
        parse_manifest("ok = 1\nnot a pair\n", "conf");
        FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("conf:2") != std::string::npos);
        CHECK(msg.find("not a pair") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_manifest("= value\n", "conf"), std::invalid_argument);
    CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.conf"), std::runtime_error);
}

TEST_CASE("load_manifest reads a file") {
    TempDir dir;
    const std::string path = dir.file("run.conf");
    write_text(path, "dataset = synth\nepochs = 5\n");
    const Manifest m = load_manifest(path);
    CHECK(m.at("dataset") == "synth");
    CHECK(m.at("epochs") == "5");
}

TEST_CASE("typed readers fall back and report bad values by field") {
    const Manifest m{{"d", "2.5"}, {"n", "7"}, {"u", "123"}, {"f", "yes"},
                     {"dl", "1, 2.5 ,3"}, {"nl", "4,5"}, {"bad", "x"}};
    CHECK(manifest_double(m, "d", 0.0) == 2.5);
    CHECK(manifest_double(m, "missing", -1.5) == -1.5);
    CHECK(manifest_count(m, "n", 0) == 7);
    CHECK(manifest_u64(m, "u", 0) == 123);
    CHECK(manifest_flag(m, "f", false));
    CHECK(manifest_flag(m, "missing", true));
    CHECK(manifest_double_list(m, "dl", {}) == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(manifest_count_list(m, "nl", {}) == std::vector<std::size_t>{4, 5});
    CHECK(manifest_string(m, "missing", "dflt") == "dflt");
    CHECK(manifest_has(m, "d"));
    CHECK_FALSE(manifest_has(m, "missing"));

    for (auto reader : {+[](const Manifest& mm) { (void)manifest_double(mm, "bad", 0.0); },
                        +[](const Manifest& mm) { (void)manifest_count(mm, "bad", 0); },
                        +[](const Manifest& mm) { (void)manifest_u64(mm, "bad", 0); },
                        +[](const Manifest& mm) { (void)manifest_flag(mm, "bad", false); }}) {
        try {
            reader(m);
            FAIL("expected a field error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("'bad'") != std::string::npos);
        }
    }
}

TEST_CASE("experiment config defaults match the documented baseline") {
    const ExperimentConfig config = experiment_config_from_manifest(Manifest{});
    REQUIRE(config.methods.size() == 2);
    CHECK(config.methods[0] == Method::standard);
    CHECK(config.methods[1] == Method::targeted_weighted_batch);
    CHECK(config.g == 1.0);
    CHECK(config.epochs == 200);
    CHECK(config.batch_size == 64);
    CHECK(config.learning_rate == 0.005);
    CHECK(config.splits == 20);
    CHECK(config.seed == 0);
    CHECK(config.t == 10.0);
    CHECK(config.architecture.kind == ArchitectureSpec::Kind::mlp);
    CHECK(config.architecture.hidden == std::vector<std::size_t>{150, 50});
    CHECK(config.measure.kind == MeasureKind::cosine_max);
    CHECK_FALSE(config.standardize.has_value());
    CHECK_FALSE(config.target_cluster.has_value());
    CHECK(config.threads == 1);
}

TEST_CASE("experiment config honors every override") {
    const Manifest m{
        {"method", "targeted-resample, standard"}, {"g", "0.25"}, {"epochs", "9"},
        {"batch_size", "32"}, {"lr", "0.01"}, {"splits", "4"}, {"seed", "99"},
        {"t", "2.5"}, {"arch", "mlp"}, {"hidden", "12,8"}, {"measure", "uniform"},
        {"standardize", "none"}, {"target_cluster", "1"}, {"threads", "2"},
    };
    const ExperimentConfig config = experiment_config_from_manifest(m);
    REQUIRE(config.methods.size() == 2);
    CHECK(config.methods[0] == Method::targeted_resample);
    CHECK(config.methods[1] == Method::standard);
    CHECK(config.g == 0.25);
    CHECK(config.epochs == 9);
    CHECK(config.batch_size == 32);
    CHECK(config.learning_rate == 0.01);
    CHECK(config.splits == 4);
    CHECK(config.seed == 99);
    CHECK(config.t == 2.5);
    CHECK(config.architecture.hidden == std::vector<std::size_t>{12, 8});
    CHECK(config.measure.kind == MeasureKind::uniform);
    REQUIRE(config.standardize.has_value());
    CHECK(*config.standardize == StandardizeOption::none);
    REQUIRE(config.target_cluster.has_value());
    CHECK(*config.target_cluster == 1);
    CHECK(config.threads == 2);

    CHECK_THROWS_AS(experiment_config_from_manifest(Manifest{{"method", "sgd"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(experiment_config_from_manifest(Manifest{{"lr", "-1"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(experiment_config_from_manifest(Manifest{{"measure", "dot"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(experiment_config_from_manifest(Manifest{{"standardize", "rows"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(experiment_config_from_manifest(Manifest{{"arch", "rnn"}}),
                    std::invalid_argument);
}

TEST_CASE("datasets load from synth and csv sources") {
    const LoadedData synth = load_dataset_from_manifest(synth_manifest());
    CHECK(synth.source == LoadedData::Source::synth);
    CHECK(synth.data.rows == 60);
    CHECK(synth.data.cols == 4);

    TempDir dir;
    const std::string csv = dir.file("d.csv");
    write_text(csv, "y,a,b\n1,2,3\n4,5,6\n");
    const LoadedData file = load_dataset_from_manifest(Manifest{{"dataset", csv}});
    CHECK(file.source == LoadedData::Source::csv);
    CHECK(file.data.rows == 2);
    CHECK(file.header == std::vector<std::string>{"y", "a", "b"});

    CHECK_THROWS_AS(load_dataset_from_manifest(Manifest{}), std::invalid_argument);
    CHECK_THROWS_AS(load_dataset_from_manifest(Manifest{{"dataset", "idx"}}),
                    std::invalid_argument);  // idx_images / idx_labels missing
}

TEST_CASE("targets resolve from indices or files") {
    TempDir dir;
    const std::string csv = dir.file("d.csv");
    write_text(csv, "10,1,0\n20,0,1\n30,1,1\n");
    const LoadedData loaded = load_dataset_from_manifest(Manifest{{"dataset", csv}});

    Manifest m{{"dataset", csv}, {"target_indices", "2,0"}};
    const TargetSet indexed = load_targets_from_manifest(m, loaded);
    CHECK(indexed.count == 2);
    CHECK(indexed.targets == std::vector<double>{1, 1, 1, 0});
    CHECK(indexed.held_out_labels == std::vector<double>{30, 10});

    // Feature-only target file: two columns, no labels.
    const std::string tpath = dir.file("targets.csv");
    write_text(tpath, "1,0\n0.5,0.5\n");
    const TargetSet from_file =
        load_targets_from_manifest(Manifest{{"dataset", csv}, {"targets", tpath}}, loaded);
    CHECK(from_file.count == 2);
    CHECK(from_file.dim == 2);
    CHECK(from_file.held_out_labels.empty());

    // Full-layout target file: labels come along.
    const std::string full = dir.file("full_targets.csv");
    write_text(full, "7,1,0\n");
    const TargetSet labeled =
        load_targets_from_manifest(Manifest{{"dataset", csv}, {"targets", full}}, loaded);
    CHECK(labeled.count == 1);
    CHECK(labeled.held_out_labels == std::vector<double>{7});

    CHECK_THROWS_AS(load_targets_from_manifest(Manifest{{"dataset", csv}}, loaded),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        load_targets_from_manifest(Manifest{{"target_indices", "9"}}, loaded),
        std::invalid_argument);
    const std::string wide = dir.file("wide.csv");
    write_text(wide, "1,2,3,4,5\n");
    CHECK_THROWS_AS(
        load_targets_from_manifest(Manifest{{"targets", wide}}, loaded),
        std::invalid_argument);
}

TEST_CASE("score writes similarities and normalized probabilities") {
    TempDir dir;
    const std::string csv = dir.file("d.csv");
    // Features: (1,0), (0,1), (-1,0), (2,0). Target: row 0.
    write_text(csv, "0,1,0\n0,0,1\n0,-1,0\n0,2,0\n");
    const std::string out = dir.file("scores.csv");
    std::ostringstream diag;
    const int rc = cmd_score(Manifest{{"dataset", csv}, {"target_indices", "0"}, {"out", out}},
                             diag);
    CHECK(rc == 0);
    CHECK(diag.str().find("warning") == std::string::npos);

    const auto rows = read_csv_cells(out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"rowIndex", "similarity", "probability"});
    CHECK(rows[1][0] == "0");
    CHECK(std::stod(rows[1][1]) == 1.0);   // self-similarity is exactly one
    CHECK(std::stod(rows[2][1]) == 0.0);   // orthogonal
    CHECK(std::stod(rows[3][1]) == 0.0);   // anti-aligned, clipped
    CHECK(std::stod(rows[4][1]) == 1.0);   // positive multiple
    CHECK(std::stod(rows[1][2]) == 0.5);
    CHECK(std::stod(rows[4][2]) == 0.5);

    double total = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) total += std::stod(rows[i][2]);
    CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("score probabilities sum to one on a big synthetic table") {
    TempDir dir;
    const std::string out = dir.file("scores.csv");
    Manifest m = synth_manifest();
    m["synth_n_per_cluster"] = "400";  // 1200 rows
    m["target_indices"] = "0,5,10";
    m["out"] = out;
    std::ostringstream diag;
    CHECK(cmd_score(m, diag) == 0);
    const auto rows = read_csv_cells(out);
    REQUIRE(rows.size() == 1201);
    double total = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double s = std::stod(rows[i][1]);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        total += std::stod(rows[i][2]);
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("score falls back to uniform with a warning when nothing matches") {
    TempDir dir;
    const std::string csv = dir.file("d.csv");
    write_text(csv, "0,1,0\n0,2,0\n");
    const std::string targets = dir.file("t.csv");
    write_text(targets, "0,1\n");  // orthogonal to every row
    const std::string out = dir.file("scores.csv");
    std::ostringstream diag;
    const int rc =
        cmd_score(Manifest{{"dataset", csv}, {"targets", targets}, {"out", out}}, diag);
    CHECK(rc == 0);
    CHECK(diag.str().find("warning: all similarity scores are zero") != std::string::npos);
    const auto rows = read_csv_cells(out);
    CHECK(std::stod(rows[1][2]) == 0.5);
    CHECK(std::stod(rows[2][2]) == 0.5);
}

TEST_CASE("score can standardize before measuring") {
    TempDir dir;
    const std::string csv = dir.file("d.csv");
    write_text(csv, "0,5,1\n0,6,2\n0,7,3\n0,8,4\n");
    const std::string out = dir.file("scores.csv");
    std::ostringstream diag;
    const int rc = cmd_score(Manifest{{"dataset", csv}, {"target_indices", "3"},
                                      {"standardize", "column-wise"}, {"out", out}},
                             diag);
    CHECK(rc == 0);
    const auto rows = read_csv_cells(out);
    // The indexed target is read after the transform, so its own row still
    // scores exactly one.
    CHECK(std::stod(rows[4][1]) == 1.0);
}

TEST_CASE("resample writes floor(t*n) rows and reruns byte-identically") {
    TempDir dir;
    const std::string csv = dir.file("d.csv");
    std::string content = "y,x1,x2\n";
    for (int i = 0; i < 10; ++i) {
        content += std::to_string(i) + "," + std::to_string(i) + ".5," +
                   std::to_string(10 - i) + "\n";
    }
    write_text(csv, content);
    const std::string input_before = read_text(csv);

    const std::string out = dir.file("resampled.csv");
    Manifest m{{"dataset", csv}, {"target_indices", "0"}, {"t", "2"}, {"seed", "5"},
               {"out", out}};
    std::ostringstream diag;
    CHECK(cmd_resample(m, diag) == 0);
    const auto rows = read_csv_cells(out);
    REQUIRE(rows.size() == 21);  // header + floor(2*10)
    CHECK(rows[0] == std::vector<std::string>{"y", "x1", "x2"});

    // Every output row is one of the input rows, verbatim.
    const auto source = read_csv_cells(csv);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        bool found = false;
        for (std::size_t j = 1; j < source.size(); ++j) found |= rows[i] == source[j];
        CHECK(found);
    }

    const std::string first = read_text(out);
    std::ostringstream diag2;
    CHECK(cmd_resample(m, diag2) == 0);
    CHECK(read_text(out) == first);

    // The input file is untouched.
    CHECK(read_text(csv) == input_before);

    // Fractional t shrinks the output.
    m["t"] = "0.5";
    std::ostringstream diag3;
    CHECK(cmd_resample(m, diag3) == 0);
    CHECK(read_csv_cells(out).size() == 6);  // header + 5
}

TEST_CASE("train writes a loadable checkpoint and a metrics trace") {
    TempDir dir;
    const std::string prefix = dir.file("run");
    Manifest m = synth_manifest();
    m["method"] = "targeted-batch";
    m["target_indices"] = "0,1";
    m["epochs"] = "3";
    m["batch_size"] = "16";
    m["lr"] = "0.01";
    m["hidden"] = "5";
    m["out"] = prefix;
    std::ostringstream diag;
    CHECK(cmd_train(m, diag) == 0);

    const auto metrics = read_csv_cells(prefix + "_metrics.csv");
    REQUIRE(metrics.size() == 4);  // header + 3 epochs
    CHECK(metrics[0][0] == "method");
    CHECK(metrics[1][0] == "targeted-batch");

    const Network net = load_network(prefix + ".net");
    CHECK(net.input_shape() == std::vector<std::size_t>{4});
    CHECK(net.head() == Head::squared_error);
    CHECK(diag.str().find("targeted-batch: trained 3 epochs on 58 rows") != std::string::npos);
}

TEST_CASE("train refuses unlabeled target files") {
    TempDir dir;
    const std::string csv = dir.file("d.csv");
    write_text(csv, "1,2,3\n4,5,6\n7,8,9\n");
    const std::string targets = dir.file("t.csv");
    write_text(targets, "2,3\n");  // features only, no label column
    Manifest m{{"dataset", csv}, {"targets", targets}, {"epochs", "1"},
               {"out", dir.file("run")}};
    std::ostringstream diag;
    CHECK_THROWS_WITH_AS(cmd_train(m, diag), doctest::Contains("train needs labeled targets"),
                         std::invalid_argument);
}

TEST_CASE("experiment writes metrics and summary artifacts") {
    TempDir dir;
    const std::string prefix = dir.file("exp");
    Manifest m = synth_manifest();
    m["epochs"] = "2";
    m["splits"] = "2";
    m["batch_size"] = "16";
    m["lr"] = "0.01";
    m["hidden"] = "5";
    m["g"] = "2";
    m["out"] = prefix;
    std::ostringstream diag;
    CHECK(cmd_experiment(m, diag) == 0);

    const auto metrics = read_csv_cells(prefix + "_metrics.csv");
    // Header + 2 methods x 2 splits x 2 epochs.
    REQUIRE(metrics.size() == 9);
    CHECK(metrics[0] == std::vector<std::string>{"method", "split", "epoch", "trainingLoss",
                                                 "targetMetric", "wallClockSeconds"});

    std::ifstream in(prefix + "_summary.json");
    const nlohmann::json summary = nlohmann::json::parse(in);
    CHECK(summary["dataset"]["rows"] == 60);
    CHECK(summary["curves"].size() == 2);
    CHECK(diag.str().find("ran 2 splits x 2 methods") != std::string::npos);
}

TEST_CASE("experiment validates its config before touching any files") {
    Manifest m{{"dataset", "/nonexistent/file.csv"}, {"lr", "-0.5"}};
    std::ostringstream diag;
    try {
        cmd_experiment(m, diag);
        FAIL("expected a config error");
    } catch (const std::invalid_argument& e) {
        // The learning-rate check fires, not the missing-file one.
        CHECK(std::string(e.what()).find("learning rate") != std::string::npos);
    }
}

TEST_CASE("t-study defaults to the resample method and writes per-t outputs") {
    TempDir dir;
    const std::string prefix = dir.file("ts");
    Manifest m = synth_manifest();
    m["epochs"] = "2";
    m["splits"] = "2";
    m["batch_size"] = "16";
    m["lr"] = "0.01";
    m["hidden"] = "5";
    m["t_values"] = "1,2";
    m["out"] = prefix;
    std::ostringstream diag;
    CHECK(cmd_t_study(m, diag) == 0);
    for (const std::string t : {"1", "2"}) {
        const auto metrics = read_csv_cells(prefix + "_t" + t + "_metrics.csv");
        REQUIRE(metrics.size() == 5);  // header + 1 method x 2 splits x 2 epochs
        CHECK(metrics[1][0] == "targeted-resample");
        std::ifstream in(prefix + "_t" + t + "_summary.json");
        const nlohmann::json summary = nlohmann::json::parse(in);
        CHECK(summary["config"]["t"] == std::stod(t));
    }
}

TEST_CASE("group-study writes per-g outputs plus an index") {
    TempDir dir;
    const std::string prefix = dir.file("gs");
    Manifest m = synth_manifest();
    m["method"] = "standard";
    m["epochs"] = "2";
    m["splits"] = "2";
    m["batch_size"] = "16";
    m["lr"] = "0.01";
    m["hidden"] = "5";
    m["g_values"] = "1,5";
    m["out"] = prefix;
    std::ostringstream diag;
    CHECK(cmd_group_study(m, diag) == 0);

    std::ifstream in(prefix + "_groups.json");
    const nlohmann::json index = nlohmann::json::parse(in);
    REQUIRE(index.size() == 2);
    CHECK(index[0]["gResolved"] == 1);
    CHECK(index[0]["trainingRows"] == 59);
    CHECK(index[1]["gResolved"] == 5);
    CHECK(index[1]["trainingRows"] == 55);
    for (const auto& entry : index) {
        CHECK(read_csv_cells(entry["metrics"].get<std::string>()).size() == 5);
        std::ifstream s(entry["summary"].get<std::string>());
        CHECK(nlohmann::json::parse(s).contains("curves"));
    }
}

TEST_CASE("synth generates a reloadable table deterministically") {
    TempDir dir;
    const std::string out = dir.file("synth.csv");
    Manifest m = synth_manifest();
    m["out"] = out;
    std::ostringstream diag;
    CHECK(cmd_synth(m, diag) == 0);

    const Dataset back = load_csv(out, CsvSchema{});
    CHECK(back.rows == 60);
    CHECK(back.cols == 4);

    const std::string first = read_text(out);
    std::ostringstream diag2;
    CHECK(cmd_synth(m, diag2) == 0);
    CHECK(read_text(out) == first);

    // The generated labels reload with full precision.
    const LoadedData direct = load_dataset_from_manifest(synth_manifest());
    CHECK(back.labels == direct.data.labels);
    CHECK(back.features == direct.data.features);
}

TEST_CASE("run_command dispatches and rejects unknown verbs") {
    TempDir dir;
    const std::string out = dir.file("synth.csv");
    Manifest m = synth_manifest();
    m["out"] = out;
    std::ostringstream diag;
    CHECK(run_command("synth", m, diag) == 0);
    CHECK_THROWS_WITH_AS(run_command("frobnicate", m, diag),
                         doctest::Contains("unknown command"), std::invalid_argument);
}
