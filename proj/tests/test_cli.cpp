#include "cli.h"

#include "iduqa/dataset.h"
#include "iduqa/eval.h"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kDataDir = IDUQA_DATA_DIR;

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

// The CLI prints to the real streams; capture both around each call.
RunResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    RunResult result;
    try {
        result.code = iduqa::cli::run(args);
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string lexicon_arg() { return (kDataDir / "lexicon.json").string(); }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero") {
    auto result = run_cli({"--help"});
    CHECK(result.code == 0);
    CHECK(result.out.find("pipeline") != std::string::npos);
}

TEST_CASE("unknown subcommand fails with a json error record") {
    auto result = run_cli({"frobnicate"});
    CHECK(result.code != 0);
    CHECK(result.err.find("\"error\"") != std::string::npos);
}

TEST_CASE("missing required options fail") {
    auto result = run_cli({"chunk", "--in", "whatever.json"});
    CHECK(result.code != 0);
    CHECK(result.err.find("error") != std::string::npos);
}

TEST_CASE("lexicon validate reports the shipped counts") {
    auto result = run_cli({"lexicon", "validate", "--lexicon", lexicon_arg()});
    REQUIRE(result.code == 0);
    auto doc = json::parse(result.out);
    CHECK(doc["ok"] == true);
    CHECK(doc["keyword_groups"] == 6);
    CHECK(doc["keyword_phrases"] == 67);
    CHECK(doc["query_groups"] == 9);
    CHECK(doc["questions"] == 81);
    CHECK(doc["mapping_rules"] == 10);
}

TEST_CASE("lexicon validate with a bad path fails") {
    auto result = run_cli({"lexicon", "validate", "--lexicon", "no/such/file.json"});
    CHECK(result.code != 0);
    CHECK(result.err.find("\"error\"") != std::string::npos);
}

TEST_CASE("query answers a history question from a raw note file") {
    auto note_path = fs::temp_directory_path() / "iduqa-cli-note.txt";
    std::ofstream(note_path) << "pt x, 200 yrs old. he has a history of smoking with 50 pack "
                                "years, quit 10 years ago. social ethanol user. no history of "
                                "idu. remote history of marijuana use. family hx: none. physical "
                                "exam: deferred. provider: name.";
    auto result = run_cli({"query", "--lexicon", lexicon_arg(), "--note-file", note_path.string(),
                           "--question", "Does the patient have a history of IDU?"});
    REQUIRE(result.code == 0);
    auto doc = json::parse(result.out);
    CHECK(doc["classification"]["method"] == "exact");
    REQUIRE(doc["answers"].size() == 1);
    CHECK(doc["answers"][0]["text"] == "no history of idu");
    fs::remove(note_path);
}

TEST_CASE("dataset build without an input path fails") {
    auto result = run_cli({"dataset", "build", "--lexicon", lexicon_arg(), "--out", "x.json"});
    CHECK(result.code == 1);
    CHECK(result.err.find("input path") != std::string::npos);
}

TEST_CASE("dataset build without a lexicon fails") {
    auto result = run_cli({"dataset", "build", "--in", "notes.json", "--out", "x.json"});
    CHECK(result.code == 1);
    CHECK(result.err.find("lexicon path") != std::string::npos);
}

TEST_CASE("stage chain from manifest to report") {
    auto tmp = fs::temp_directory_path() / "iduqa-cli-chain";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    auto manifest = (kDataDir / "corpus" / "manifest.tsv").string();

    auto cleaned = run_cli({"--log-level", "off", "corpus", "clean", "--in", manifest, "--out",
                            (tmp / "cleaned.json").string()});
    REQUIRE(cleaned.code == 0);
    CHECK(json::parse(cleaned.out)["notes"] == 40);

    auto filtered = run_cli({"corpus", "filter", "--lexicon", lexicon_arg(), "--in",
                             (tmp / "cleaned.json").string(), "--out",
                             (tmp / "filtered.json").string(), "--drop-outliers"});
    REQUIRE(filtered.code == 0);
    auto filter_doc = json::parse(filtered.out);
    CHECK(filter_doc["kept"] == 30);
    CHECK(filter_doc["dropped_no_keyword"] == 9);
    CHECK(filter_doc["dropped_outliers"] == 1);

    auto build = [&](const fs::path& out) {
        return run_cli({"dataset", "build", "--lexicon", lexicon_arg(), "--in",
                        (tmp / "filtered.json").string(), "--out", out.string()});
    };
    auto built = build(tmp / "dataset.json");
    REQUIRE(built.code == 0);
    auto build_doc = json::parse(built.out);
    CHECK(build_doc["samples"] == 568);
    CHECK(build_doc["impossible"] == 0);

    // Same inputs, second output file: the artifact must be byte-identical.
    REQUIRE(build(tmp / "dataset2.json").code == 0);
    CHECK(read_file(tmp / "dataset.json") == read_file(tmp / "dataset2.json"));

    auto split = run_cli({"--seed", "3", "dataset", "split", "--in",
                          (tmp / "dataset.json").string(), "--out-dir",
                          (tmp / "split").string()});
    REQUIRE(split.code == 0);
    auto split_doc = json::parse(split.out);
    CHECK(split_doc["train"]["patients"] == 16);
    CHECK(split_doc["dev"]["patients"] == 2);
    CHECK(split_doc["test"]["patients"] == 2);

    auto chunked = run_cli({"chunk", "--in", (tmp / "split" / "test.json").string(), "--out",
                            (tmp / "chunks.json").string()});
    REQUIRE(chunked.code == 0);
    CHECK(json::parse(chunked.out)["chunks"].get<size_t>() > 0);

    // Gold-copy predictions score perfectly through the eval subcommands.
    auto test_set = iduqa::load_dataset(tmp / "split" / "test.json");
    iduqa::Predictions predictions;
    for (const auto& sample : test_set.samples) {
        predictions[sample.id] =
            sample.answers.empty() ? std::string() : sample.answers.front().text;
    }
    iduqa::save_predictions(predictions, tmp / "preds.json");

    auto scored = run_cli({"eval", "score", "--dataset", (tmp / "split" / "test.json").string(),
                           "--preds", (tmp / "preds.json").string()});
    REQUIRE(scored.code == 0);
    CHECK(json::parse(scored.out)["em"] == 100.0);

    auto analyzed = run_cli({"eval", "analyze", "--dataset",
                             (tmp / "split" / "test.json").string(), "--preds",
                             (tmp / "preds.json").string(), "--by", "group"});
    REQUIRE(analyzed.code == 0);
    CHECK(analyzed.out.rfind("group,count,em", 0) == 0);

    auto ci = run_cli({"--seed", "5", "eval", "ci", "--dataset",
                       (tmp / "split" / "test.json").string(), "--preds",
                       (tmp / "preds.json").string(), "--reps", "200"});
    REQUIRE(ci.code == 0);
    CHECK(json::parse(ci.out)["em"]["point"] == 100.0);

    auto reported = run_cli({"--seed", "5", "eval", "report", "--dataset",
                             (tmp / "split" / "test.json").string(), "--preds",
                             (tmp / "preds.json").string(), "--out-dir",
                             (tmp / "report").string(), "--reps", "200"});
    REQUIRE(reported.code == 0);
    CHECK(fs::exists(tmp / "report" / "report.md"));
    CHECK(fs::exists(tmp / "report" / "aggregates.csv"));

    fs::remove_all(tmp);
}

TEST_CASE("split without a seed fails") {
    auto tmp = fs::temp_directory_path() / "iduqa-cli-noseed";
    fs::remove_all(tmp);
    auto result = run_cli({"dataset", "split", "--in", "missing.json", "--out-dir", tmp.string()});
    CHECK(result.code == 1);
}

} // TEST_SUITE
