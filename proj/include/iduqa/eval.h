#pragma once

// Scoring of prediction files against gold datasets: exact match, perfect
// recall, token F1, bootstrap confidence intervals, quartile-bin and
// per-group breakdowns, answer/context ratios, and report rendering.

#include "iduqa/dataset.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iduqa {

using Predictions = std::map<std::string, std::string>;

Predictions load_predictions(const std::filesystem::path& path);
void save_predictions(const Predictions& predictions, const std::filesystem::path& path);

struct SampleScore {
    std::string sample_id;
    int em = 0;             // {0,1}
    int perfect_recall = 0; // {0,1}
    double f1 = 0.0;        // [0,1]
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;

    bool operator==(const SampleScore&) const = default;
};

struct TokenF1 {
    double f1 = 0.0;
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;

    bool operator==(const TokenF1&) const = default;
};

/// 1 iff the trimmed strings are equal character-for-character.
int em_score(const std::string& pred, const std::string& gold);

/// 1 iff trimmed gold is a contiguous, case-sensitive substring of
/// trimmed pred; an empty gold requires an empty pred.
int perfect_recall_score(const std::string& pred, const std::string& gold);

/// Scoring tokens: lowercased whitespace words with leading/trailing
/// ASCII punctuation stripped; empty tokens dropped.
std::vector<std::string> f1_tokens(const std::string& text);

/// Multiset token overlap. Both token lists empty scores 1; exactly one
/// empty scores 0.
TokenF1 token_f1(const std::string& pred, const std::string& gold);

struct ConfidenceInterval {
    double point = 0.0;
    double low = 0.0;
    double high = 0.0;
    double level = 0.95;
    size_t replicates = 0;
    uint64_t seed = 0;

    bool operator==(const ConfidenceInterval&) const = default;
};

/// Nonparametric percentile bootstrap of the mean: resample
/// n-with-replacement `replicates` times; interval endpoints are the
/// (1-level)/2 and 1-(1-level)/2 quantiles of the replicate means.
ConfidenceInterval bootstrap_ci(const std::vector<double>& scores, double level,
                                size_t replicates, uint64_t seed);

struct BinRow {
    size_t low = 0; // [low, high] word-count range of the bin's samples
    size_t high = 0;
    size_t count = 0;
    double em = 0.0;
    double perfect_recall = 0.0;
    double f1 = 0.0;

    bool operator==(const BinRow&) const = default;
};

struct BinTable {
    std::string key; // note_length | question_length | answer_length
    std::vector<BinRow> bins;

    bool operator==(const BinTable&) const = default;
};

struct GroupRow {
    std::string group_id;
    size_t count = 0;
    double em = 0.0;
    double perfect_recall = 0.0;
    double f1 = 0.0;

    bool operator==(const GroupRow&) const = default;
};

struct RatioLists {
    std::vector<double> pred; // percentages, samples with em = 0 only
    std::vector<double> gold;

    bool operator==(const RatioLists&) const = default;
};

struct MetricReport {
    std::vector<SampleScore> sample_scores; // dataset sample order
    double em = 0.0;             // aggregates are means x 100
    double perfect_recall = 0.0;
    double f1 = 0.0;
    double no_answer_accuracy = 0.0; // EM-only, over impossible samples
    size_t sample_count = 0;
    size_t impossible_count = 0;
    std::optional<ConfidenceInterval> em_ci;
    std::optional<ConfidenceInterval> perfect_recall_ci;
    std::optional<ConfidenceInterval> f1_ci;
    std::vector<BinTable> bins;
    std::vector<GroupRow> groups;
    RatioLists ratios;
};

/// Per-sample scores and aggregate means. Gold is the first listed
/// answer (empty for impossible samples). Missing prediction ids are an
/// error listing the ids; extra ids only warn.
MetricReport score_predictions(const Dataset& dataset, const Predictions& predictions);

/// Sorts samples by the key's word length, cuts four near-equal bins
/// (boundary ties join the lower bin), and aggregates each bin.
/// key is one of note_length, question_length, answer_length; needs >= 4
/// samples.
BinTable bin_metrics(const Dataset& dataset, const std::vector<SampleScore>& scores,
                     const std::string& key);

/// Aggregates per query group, sorted by group id; empty groups omitted.
std::vector<GroupRow> per_group_metrics(const Dataset& dataset,
                                        const std::vector<SampleScore>& scores);

/// 100 * answer words / context words for predictions and gold answers,
/// restricted to samples whose exact match is 0.
RatioLists answer_context_ratios(const Dataset& dataset, const Predictions& predictions);

struct BootstrapParams {
    double level = 0.95;
    size_t replicates = 10000;
    uint64_t seed = 0;
};

/// score_predictions plus confidence intervals, all three bin tables,
/// the per-group table, and the ratio lists.
MetricReport build_report(const Dataset& dataset, const Predictions& predictions,
                          const BootstrapParams& params);

/// Writes report.md, aggregates.csv, bins_<key>.csv x3, groups.csv, and
/// ratios.csv into out_dir. Byte-deterministic for identical reports.
void render_report(const MetricReport& report, const std::filesystem::path& out_dir);

} // namespace iduqa
