#include "iduqa/eval.h"

#include "iduqa/rng.h"
#include "iduqa/stats.h"
#include "iduqa/text.h"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace iduqa {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Matches C-locale ispunct: printable, not alphanumeric, not space.
bool is_strippable_punct(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x21 || u > 0x7e) {
        return false;
    }
    return !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'));
}

std::string gold_answer(const QASample& sample) {
    if (sample.is_impossible || sample.answers.empty()) {
        return "";
    }
    return sample.answers.front().text;
}

double mean_times_100(const std::vector<double>& values) {
    if (values.empty()) {
        return 0.0;
    }
    return 100.0 * mean(values);
}

std::string fixed2(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

struct Aggregate {
    size_t count = 0;
    double em_sum = 0.0;
    double pr_sum = 0.0;
    double f1_sum = 0.0;

    void add(const SampleScore& score) {
        ++count;
        em_sum += score.em;
        pr_sum += score.perfect_recall;
        f1_sum += score.f1;
    }
    double em() const { return count ? 100.0 * em_sum / static_cast<double>(count) : 0.0; }
    double pr() const { return count ? 100.0 * pr_sum / static_cast<double>(count) : 0.0; }
    double f1() const { return count ? 100.0 * f1_sum / static_cast<double>(count) : 0.0; }
};

} // namespace

Predictions load_predictions(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(path.string() + ": predictions parse failure: " + e.what());
    }
    if (!doc.is_object()) {
        throw Error(path.string() + ": predictions file must be an object of sample_id -> string");
    }
    Predictions predictions;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_string()) {
            throw Error(path.string() + ": prediction for '" + key + "' is not a string");
        }
        predictions[key] = value.get<std::string>();
    }
    return predictions;
}

void save_predictions(const Predictions& predictions, const std::filesystem::path& path) {
    json doc = json::object();
    for (const auto& [id, text] : predictions) {
        doc[id] = text;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write predictions file '" + path.string() + "'");
    }
    out << doc.dump(2) << "\n";
}

int em_score(const std::string& pred, const std::string& gold) {
    return trim_view(pred) == trim_view(gold) ? 1 : 0;
}

int perfect_recall_score(const std::string& pred, const std::string& gold) {
    auto p = trim_view(pred);
    auto g = trim_view(gold);
    if (g.empty()) {
        return p.empty() ? 1 : 0;
    }
    return p.find(g) != std::string_view::npos ? 1 : 0;
}

std::vector<std::string> f1_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    for (auto word : split_words(text)) {
        size_t begin = 0;
        size_t end = word.size();
        while (begin < end && is_strippable_punct(word[begin])) {
            ++begin;
        }
        while (end > begin && is_strippable_punct(word[end - 1])) {
            --end;
        }
        if (begin < end) {
            tokens.push_back(to_lower(std::string(word.substr(begin, end - begin))));
        }
    }
    return tokens;
}

TokenF1 token_f1(const std::string& pred, const std::string& gold) {
    auto pred_tokens = f1_tokens(pred);
    auto gold_tokens = f1_tokens(gold);

    TokenF1 result;
    if (pred_tokens.empty() && gold_tokens.empty()) {
        result.f1 = 1.0;
        return result;
    }

    std::map<std::string, size_t> gold_counts;
    for (const auto& token : gold_tokens) {
        ++gold_counts[token];
    }
    size_t tp = 0;
    for (const auto& token : pred_tokens) {
        auto it = gold_counts.find(token);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++tp;
        }
    }
    result.tp = tp;
    result.fp = pred_tokens.size() - tp;
    result.fn = gold_tokens.size() - tp;
    if (tp > 0) {
        double precision = static_cast<double>(tp) / static_cast<double>(pred_tokens.size());
        double recall = static_cast<double>(tp) / static_cast<double>(gold_tokens.size());
        result.f1 = 2.0 * precision * recall / (precision + recall);
    }
    return result;
}

ConfidenceInterval bootstrap_ci(const std::vector<double>& scores, double level,
                                size_t replicates, uint64_t seed) {
    if (scores.empty()) {
        throw Error("bootstrap_ci requires at least one score");
    }
    if (level <= 0.0 || level >= 1.0) {
        throw Error("bootstrap confidence level must lie in (0, 1)");
    }
    if (replicates == 0) {
        throw Error("bootstrap needs at least one replicate");
    }

    std::mt19937_64 gen(seed);
    size_t n = scores.size();
    std::vector<double> means;
    means.reserve(replicates);
    for (size_t r = 0; r < replicates; ++r) {
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            sum += scores[static_cast<size_t>(gen() % n)];
        }
        means.push_back(sum / static_cast<double>(n));
    }
    std::sort(means.begin(), means.end());

    ConfidenceInterval ci;
    ci.point = mean(scores);
    ci.low = quantile_sorted(means, (1.0 - level) / 2.0);
    ci.high = quantile_sorted(means, 1.0 - (1.0 - level) / 2.0);
    ci.level = level;
    ci.replicates = replicates;
    ci.seed = seed;
    return ci;
}

MetricReport score_predictions(const Dataset& dataset, const Predictions& predictions) {
    std::vector<std::string> missing;
    for (const auto& sample : dataset.samples) {
        if (!predictions.count(sample.id)) {
            missing.push_back(sample.id);
        }
    }
    if (!missing.empty()) {
        std::string listed;
        size_t shown = std::min<size_t>(missing.size(), 10);
        for (size_t i = 0; i < shown; ++i) {
            listed += (i ? ", " : "") + missing[i];
        }
        if (missing.size() > shown) {
            listed += ", ...";
        }
        throw Error("predictions missing " + std::to_string(missing.size()) + " sample ids: " +
                    listed);
    }
    std::set<std::string> known;
    for (const auto& sample : dataset.samples) {
        known.insert(sample.id);
    }
    size_t extra = 0;
    for (const auto& [id, text] : predictions) {
        if (!known.count(id)) {
            ++extra;
        }
    }
    if (extra > 0) {
        log_warning("predictions contain " + std::to_string(extra) +
                    " ids not present in the dataset; they are ignored");
    }

    MetricReport report;
    std::vector<double> em_values;
    std::vector<double> impossible_em;
    for (const auto& sample : dataset.samples) {
        const auto& pred = predictions.at(sample.id);
        auto gold = gold_answer(sample);

        SampleScore score;
        score.sample_id = sample.id;
        score.em = em_score(pred, gold);
        score.perfect_recall = perfect_recall_score(pred, gold);
        auto f1 = token_f1(pred, gold);
        score.f1 = f1.f1;
        score.tp = f1.tp;
        score.fp = f1.fp;
        score.fn = f1.fn;

        if (sample.is_impossible) {
            impossible_em.push_back(score.em);
        }
        em_values.push_back(score.em);
        report.sample_scores.push_back(std::move(score));
    }

    report.sample_count = dataset.samples.size();
    report.impossible_count = impossible_em.size();
    std::vector<double> pr_values;
    std::vector<double> f1_values;
    for (const auto& score : report.sample_scores) {
        pr_values.push_back(score.perfect_recall);
        f1_values.push_back(score.f1);
    }
    report.em = mean_times_100(em_values);
    report.perfect_recall = mean_times_100(pr_values);
    report.f1 = mean_times_100(f1_values);
    report.no_answer_accuracy = mean_times_100(impossible_em);
    return report;
}

BinTable bin_metrics(const Dataset& dataset, const std::vector<SampleScore>& scores,
                     const std::string& key) {
    if (scores.size() != dataset.samples.size()) {
        throw Error("bin_metrics needs one score per dataset sample");
    }
    if (scores.size() < 4) {
        throw Error("quartile binning needs at least 4 samples, got " +
                    std::to_string(scores.size()));
    }
    if (key != "note_length" && key != "question_length" && key != "answer_length") {
        throw Error("unknown bin key '" + key + "'");
    }

    std::map<std::string, size_t> context_words;
    for (const auto& note : dataset.notes) {
        context_words[note.note_id] = word_count(note.context);
    }
    auto length_of = [&](const QASample& sample) -> size_t {
        if (key == "note_length") {
            return context_words.at(sample.note_id);
        }
        if (key == "question_length") {
            return word_count(sample.question);
        }
        return sample.is_impossible || sample.answers.empty()
                   ? 0
                   : word_count(sample.answers.front().text);
    };

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<size_t> lengths(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        lengths[i] = length_of(dataset.samples[i]);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return lengths[a] < lengths[b]; });

    size_t n = order.size();
    std::array<size_t, 5> cuts{0, 0, 0, 0, n};
    for (size_t k = 1; k <= 3; ++k) {
        size_t cut = static_cast<size_t>(
            std::llround(static_cast<double>(n) * static_cast<double>(k) / 4.0));
        cut = std::max(cut, cuts[k - 1]);
        // Boundary ties fall into the lower bin.
        while (cut > 0 && cut < n && lengths[order[cut]] == lengths[order[cut - 1]]) {
            ++cut;
        }
        cuts[k] = std::min(cut, n);
    }

    BinTable table;
    table.key = key;
    for (size_t b = 0; b < 4; ++b) {
        BinRow row;
        Aggregate agg;
        for (size_t i = cuts[b]; i < cuts[b + 1]; ++i) {
            size_t idx = order[i];
            agg.add(scores[idx]);
            size_t len = lengths[idx];
            if (row.count == 0) {
                row.low = len;
                row.high = len;
            } else {
                row.low = std::min(row.low, len);
                row.high = std::max(row.high, len);
            }
            ++row.count;
        }
        row.em = agg.em();
        row.perfect_recall = agg.pr();
        row.f1 = agg.f1();
        table.bins.push_back(row);
    }
    return table;
}

std::vector<GroupRow> per_group_metrics(const Dataset& dataset,
                                        const std::vector<SampleScore>& scores) {
    if (scores.size() != dataset.samples.size()) {
        throw Error("per_group_metrics needs one score per dataset sample");
    }
    std::map<std::string, Aggregate> by_group;
    for (size_t i = 0; i < scores.size(); ++i) {
        by_group[dataset.samples[i].query_group_id].add(scores[i]);
    }
    std::vector<GroupRow> rows;
    for (const auto& [group_id, agg] : by_group) {
        rows.push_back({group_id, agg.count, agg.em(), agg.pr(), agg.f1()});
    }
    return rows;
}

RatioLists answer_context_ratios(const Dataset& dataset, const Predictions& predictions) {
    std::map<std::string, size_t> context_words;
    for (const auto& note : dataset.notes) {
        context_words[note.note_id] = word_count(note.context);
    }

    RatioLists ratios;
    for (const auto& sample : dataset.samples) {
        auto it = predictions.find(sample.id);
        if (it == predictions.end()) {
            throw Error("prediction missing for sample '" + sample.id + "'");
        }
        auto gold = gold_answer(sample);
        if (em_score(it->second, gold) == 1) {
            continue;
        }
        auto words = context_words.at(sample.note_id);
        if (words == 0) {
            continue;
        }
        double denom = static_cast<double>(words);
        ratios.pred.push_back(100.0 * static_cast<double>(word_count(it->second)) / denom);
        ratios.gold.push_back(100.0 * static_cast<double>(word_count(gold)) / denom);
    }
    return ratios;
}

MetricReport build_report(const Dataset& dataset, const Predictions& predictions,
                          const BootstrapParams& params) {
    auto report = score_predictions(dataset, predictions);
    if (!report.sample_scores.empty()) {
        std::vector<double> em_values;
        std::vector<double> pr_values;
        std::vector<double> f1_values;
        for (const auto& score : report.sample_scores) {
            em_values.push_back(100.0 * score.em);
            pr_values.push_back(100.0 * score.perfect_recall);
            f1_values.push_back(100.0 * score.f1);
        }
        report.em_ci = bootstrap_ci(em_values, params.level, params.replicates, params.seed);
        report.perfect_recall_ci =
            bootstrap_ci(pr_values, params.level, params.replicates, params.seed + 1);
        report.f1_ci = bootstrap_ci(f1_values, params.level, params.replicates, params.seed + 2);
    }
    if (report.sample_scores.size() >= 4) {
        for (const char* key : {"note_length", "question_length", "answer_length"}) {
            report.bins.push_back(bin_metrics(dataset, report.sample_scores, key));
        }
    }
    report.groups = per_group_metrics(dataset, report.sample_scores);
    report.ratios = answer_context_ratios(dataset, predictions);
    return report;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write report file '" + path.string() + "'");
    }
    out << content;
}

std::string ci_cell(const std::optional<ConfidenceInterval>& ci, bool low) {
    if (!ci) {
        return "";
    }
    return fixed2(low ? ci->low : ci->high);
}

std::string ratio_summary_line(const char* name, const std::vector<double>& values) {
    std::string line = "| ";
    line += name;
    line += " | " + std::to_string(values.size());
    if (values.empty()) {
        line += " | - | - | - |";
        return line;
    }
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    line += " | " + fixed2(mean(values));
    line += " | " + fixed2(quantile_sorted(sorted, 0.5));
    line += " | " + fixed2(sorted.back()) + " |";
    return line;
}

} // namespace

void render_report(const MetricReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    // aggregates.csv
    {
        std::string csv = "metric,score,ci_low,ci_high\n";
        csv += "em," + fixed2(report.em) + "," + ci_cell(report.em_ci, true) + "," +
               ci_cell(report.em_ci, false) + "\n";
        csv += "perfect_recall," + fixed2(report.perfect_recall) + "," +
               ci_cell(report.perfect_recall_ci, true) + "," +
               ci_cell(report.perfect_recall_ci, false) + "\n";
        csv += "f1," + fixed2(report.f1) + "," + ci_cell(report.f1_ci, true) + "," +
               ci_cell(report.f1_ci, false) + "\n";
        csv += "no_answer_accuracy," + fixed2(report.no_answer_accuracy) + ",,\n";
        write_text(out_dir / "aggregates.csv", csv);
    }

    // bins_<key>.csv
    for (const auto& table : report.bins) {
        std::string csv = "bin,low,high,count,em,perfect_recall,f1\n";
        for (size_t b = 0; b < table.bins.size(); ++b) {
            const auto& row = table.bins[b];
            csv += std::to_string(b + 1) + "," + std::to_string(row.low) + "," +
                   std::to_string(row.high) + "," + std::to_string(row.count) + "," +
                   fixed2(row.em) + "," + fixed2(row.perfect_recall) + "," + fixed2(row.f1) + "\n";
        }
        write_text(out_dir / ("bins_" + table.key + ".csv"), csv);
    }

    // groups.csv
    {
        std::string csv = "group,count,em,perfect_recall,f1\n";
        for (const auto& row : report.groups) {
            csv += row.group_id + "," + std::to_string(row.count) + "," + fixed2(row.em) + "," +
                   fixed2(row.perfect_recall) + "," + fixed2(row.f1) + "\n";
        }
        write_text(out_dir / "groups.csv", csv);
    }

    // ratios.csv
    {
        std::string csv = "kind,ratio\n";
        for (double value : report.ratios.pred) {
            csv += "pred," + fixed2(value) + "\n";
        }
        for (double value : report.ratios.gold) {
            csv += "gold," + fixed2(value) + "\n";
        }
        write_text(out_dir / "ratios.csv", csv);
    }

    // report.md
    {
        std::string md = "# Evaluation Report\n\n";
        md += "Samples scored: " + std::to_string(report.sample_count) + " (" +
              std::to_string(report.impossible_count) + " no-answer)\n\n";

        md += "## Aggregates\n\n";
        md += "| metric | score | ci_low | ci_high |\n|---|---|---|---|\n";
        auto agg_row = [&](const char* name, double value,
                           const std::optional<ConfidenceInterval>& ci) {
            md += std::string("| ") + name + " | " + fixed2(value) + " | " +
                  (ci ? fixed2(ci->low) : std::string("-")) + " | " +
                  (ci ? fixed2(ci->high) : std::string("-")) + " |\n";
        };
        agg_row("em", report.em, report.em_ci);
        agg_row("perfect_recall", report.perfect_recall, report.perfect_recall_ci);
        agg_row("f1", report.f1, report.f1_ci);
        md += "\nNo-answer accuracy (EM over " + std::to_string(report.impossible_count) +
              " impossible samples): " +
              (report.impossible_count ? fixed2(report.no_answer_accuracy) : std::string("n/a")) +
              "\n";

        for (const auto& table : report.bins) {
            md += "\n## Bins by " + table.key + "\n\n";
            md += "| bin | range (words) | count | em | perfect_recall | f1 |\n";
            md += "|---|---|---|---|---|---|\n";
            for (size_t b = 0; b < table.bins.size(); ++b) {
                const auto& row = table.bins[b];
                md += "| " + std::to_string(b + 1) + " | [" + std::to_string(row.low) + ", " +
                      std::to_string(row.high) + "] | " + std::to_string(row.count) + " | " +
                      fixed2(row.em) + " | " + fixed2(row.perfect_recall) + " | " +
                      fixed2(row.f1) + " |\n";
            }
        }

        md += "\n## Query groups\n\n";
        md += "| group | count | em | perfect_recall | f1 |\n|---|---|---|---|---|\n";
        for (const auto& row : report.groups) {
            md += "| " + row.group_id + " | " + std::to_string(row.count) + " | " +
                  fixed2(row.em) + " | " + fixed2(row.perfect_recall) + " | " + fixed2(row.f1) +
                  " |\n";
        }

        md += "\n## Answer/context ratios (em = 0 samples)\n\n";
        md += "| kind | count | mean % | median % | max % |\n|---|---|---|---|---|\n";
        md += ratio_summary_line("pred", report.ratios.pred) + "\n";
        md += ratio_summary_line("gold", report.ratios.gold) + "\n";

        write_text(out_dir / "report.md", md);
    }
}

} // namespace iduqa
