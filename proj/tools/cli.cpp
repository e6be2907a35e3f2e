#include "cli.h"

#include "iduqa/chunker.h"
#include "iduqa/config.h"
#include "iduqa/corpus.h"
#include "iduqa/dataset.h"
#include "iduqa/eval.h"
#include "iduqa/extract.h"
#include "iduqa/lexicon.h"
#include "iduqa/question_bank.h"
#include "iduqa/rng.h"
#include "iduqa/stats.h"
#include "iduqa/text.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace iduqa::cli {

using nlohmann::json;

namespace {

struct Context {
    std::string config_path;
    uint64_t seed_flag = 0;
    bool seed_given = false;
    std::string log_level_flag;
    std::optional<RunConfig> config;

    void finalize() {
        if (!config_path.empty()) {
            config = load_run_config(config_path);
        }
        if (!log_level_flag.empty()) {
            set_log_level(parse_log_level(log_level_flag));
        } else if (config && config->log_level) {
            set_log_level(*config->log_level);
        }
    }

    std::optional<uint64_t> seed() const {
        if (seed_given) {
            return seed_flag;
        }
        if (config && config->seed) {
            return config->seed;
        }
        return std::nullopt;
    }

    uint64_t require_seed(const std::string& stage) const {
        auto s = seed();
        if (!s) {
            throw Error(stage + ": a seed is required (--seed or the config file)");
        }
        return *s;
    }

    std::filesystem::path lexicon_path(const std::string& flag) const {
        if (!flag.empty()) {
            return flag;
        }
        if (config && !config->lexicon_path.empty()) {
            return config->lexicon_path;
        }
        throw Error("a lexicon path is required (--lexicon or the config file)");
    }

    std::filesystem::path input_path(const std::string& flag) const {
        if (!flag.empty()) {
            return flag;
        }
        if (config && !config->corpus_path.empty()) {
            return config->corpus_path;
        }
        throw Error("an input path is required (--in or the config file)");
    }

    std::vector<std::string> abbreviations() const {
        if (config) {
            return sentence_abbreviations(*config);
        }
        return default_protected_abbreviations();
    }

    ChunkPolicy chunk_policy() const {
        return config ? config->chunk : ChunkPolicy{};
    }

    Pairing pairing(const std::string& mode_flag, size_t k_flag,
                    const std::string& stage) const {
        Pairing pairing;
        auto mode = mode_flag;
        if (mode.empty() && config) {
            mode = config->pairing_mode == Pairing::Mode::sample_k ? "sample_k" : "all_variants";
        }
        if (mode.empty() || mode == "all_variants") {
            return pairing;
        }
        if (mode != "sample_k") {
            throw Error("unknown pairing mode '" + mode + "'");
        }
        size_t k = k_flag ? k_flag : (config ? config->pairing_k : 0);
        if (k == 0) {
            throw Error("pairing mode 'sample_k' needs a positive --k");
        }
        return Pairing::sample_k(k, require_seed(stage));
    }

    BootstrapParams bootstrap(double level_flag, size_t reps_flag,
                              const std::string& stage) const {
        BootstrapParams params;
        params.level = level_flag > 0 ? level_flag
                                      : (config ? config->bootstrap_level : params.level);
        params.replicates =
            reps_flag > 0 ? reps_flag : (config ? config->bootstrap_replicates : params.replicates);
        params.seed = require_seed(stage);
        return params;
    }
};

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write file '" + path.string() + "'");
    }
    out << content;
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        write_text_file(out_path, doc.dump(2) + "\n");
    }
}

// Manifests and cleaned-corpus files are both accepted as note input.
std::vector<Note> load_notes_any(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        return load_corpus(path);
    }
    return load_manifest(path);
}

std::vector<Note> ensure_cleaned(std::vector<Note> notes) {
    for (auto& note : notes) {
        if (note.cleaned_text.empty()) {
            note.cleaned_text = clean_note(note.raw_text);
        }
    }
    return notes;
}

std::string fixed2(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::array<double, 3> parse_ratios(const std::string& text) {
    std::array<double, 3> ratios{};
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == ',') {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);
    if (parts.size() != 3) {
        throw Error("--ratios expects three comma-separated numbers, got '" + text + "'");
    }
    for (size_t i = 0; i < 3; ++i) {
        try {
            ratios[i] = std::stod(parts[i]);
        } catch (const std::exception&) {
            throw Error("--ratios component '" + parts[i] + "' is not a number");
        }
    }
    return ratios;
}

json classification_to_json(const Classification& c) {
    const char* method = c.method == ClassifyMethod::exact   ? "exact"
                         : c.method == ClassifyMethod::fuzzy ? "fuzzy"
                                                             : "none";
    return {{"method", method}, {"group", c.group_id}, {"score", c.score}};
}

json ci_to_json(const ConfidenceInterval& ci) {
    return {{"point", ci.point}, {"low", ci.low},           {"high", ci.high},
            {"level", ci.level}, {"replicates", ci.replicates}, {"seed", ci.seed}};
}

std::string bins_csv(const BinTable& table) {
    std::string csv = "bin,low,high,count,em,perfect_recall,f1\n";
    for (size_t b = 0; b < table.bins.size(); ++b) {
        const auto& row = table.bins[b];
        csv += std::to_string(b + 1) + "," + std::to_string(row.low) + "," +
               std::to_string(row.high) + "," + std::to_string(row.count) + "," +
               fixed2(row.em) + "," + fixed2(row.perfect_recall) + "," + fixed2(row.f1) + "\n";
    }
    return csv;
}

std::string groups_csv(const std::vector<GroupRow>& rows) {
    std::string csv = "group,count,em,perfect_recall,f1\n";
    for (const auto& row : rows) {
        csv += row.group_id + "," + std::to_string(row.count) + "," + fixed2(row.em) + "," +
               fixed2(row.perfect_recall) + "," + fixed2(row.f1) + "\n";
    }
    return csv;
}

std::string ratios_csv(const RatioLists& ratios) {
    std::string csv = "kind,ratio\n";
    for (double value : ratios.pred) {
        csv += "pred," + fixed2(value) + "\n";
    }
    for (double value : ratios.gold) {
        csv += "gold," + fixed2(value) + "\n";
    }
    return csv;
}

// ---- stages --------------------------------------------------------------

void stage_lexicon_validate(const Context& ctx, const std::string& lexicon_flag) {
    auto lexicon = load_lexicon(ctx.lexicon_path(lexicon_flag));
    auto matchers = compile_matchers(lexicon);
    auto bank = expand_question_bank(lexicon);
    size_t phrases = 0;
    for (const auto& group : lexicon.keyword_groups) {
        phrases += group.phrases.size();
    }
    emit(json{{"ok", true},
              {"version", lexicon.version},
              {"keyword_groups", lexicon.keyword_groups.size()},
              {"keyword_phrases", phrases},
              {"query_groups", lexicon.query_groups.size()},
              {"questions", bank.total_questions()},
              {"mapping_rules", lexicon.mapping_rules.size()}},
         "");
    (void)matchers;
}

void stage_corpus_clean(const Context& ctx, const std::string& in, const std::string& out) {
    auto notes = clean_notes(load_notes_any(ctx.input_path(in)));
    save_corpus(notes, out);
    emit(json{{"notes", notes.size()}, {"out", out}}, "");
}

void stage_corpus_filter(const Context& ctx, const std::string& lexicon_flag,
                         const std::string& in, const std::string& out,
                         const std::string& dropped_out, bool drop_outliers) {
    auto lexicon = load_lexicon(ctx.lexicon_path(lexicon_flag));
    auto matchers = compile_matchers(lexicon);
    auto notes = ensure_cleaned(load_notes_any(ctx.input_path(in)));

    auto [kept, dropped] = filter_by_keywords(notes, matchers);
    size_t outliers = 0;
    if (drop_outliers) {
        auto [kept2, outlier_notes] = drop_length_outliers(kept);
        outliers = outlier_notes.size();
        kept = std::move(kept2);
        dropped.insert(dropped.end(), outlier_notes.begin(), outlier_notes.end());
    }
    save_corpus(kept, out);
    if (!dropped_out.empty()) {
        save_corpus(dropped, dropped_out);
    }
    emit(json{{"kept", kept.size()},
              {"dropped_no_keyword", dropped.size() - outliers},
              {"dropped_outliers", outliers},
              {"out", out}},
         "");
}

void stage_corpus_stats(const Context& ctx, const std::string& in, const std::string& dataset_path,
                        const std::string& out) {
    auto notes = ensure_cleaned(load_notes_any(ctx.input_path(in)));
    CorpusStats stats;
    if (dataset_path.empty()) {
        stats = corpus_stats(notes);
    } else {
        stats = corpus_stats(notes, load_dataset(dataset_path));
    }
    auto doc = json::parse(corpus_stats_to_json(stats));
    emit(doc, out);
}

void stage_annotate(const Context& ctx, const std::string& lexicon_flag, const std::string& in,
                    const std::string& out) {
    auto lexicon = load_lexicon(ctx.lexicon_path(lexicon_flag));
    auto matchers = compile_matchers(lexicon);
    auto notes = ensure_cleaned(load_notes_any(ctx.input_path(in)));
    auto abbreviations = ctx.abbreviations();

    std::vector<NoteAnnotations> annotations;
    size_t total_answers = 0;
    for (const auto& note : notes) {
        if (!matchers.has_keyword(note.cleaned_text)) {
            continue;
        }
        NoteAnnotations record;
        record.note_id = note.note_id;
        record.answers = extract_note(note, lexicon, matchers, abbreviations);
        total_answers += record.answers.size();
        annotations.push_back(std::move(record));
    }
    save_annotations(annotations, out);
    emit(json{{"notes", annotations.size()}, {"answers", total_answers}, {"out", out}}, "");
}

void stage_dataset_build(const Context& ctx, const std::string& lexicon_flag,
                         const std::string& in, const std::string& out, bool skip_no_answer,
                         const std::string& pairing_mode, size_t pairing_k) {
    auto lexicon = load_lexicon(ctx.lexicon_path(lexicon_flag));
    auto matchers = compile_matchers(lexicon);
    auto bank = expand_question_bank(lexicon);
    auto notes = ensure_cleaned(load_notes_any(ctx.input_path(in)));
    auto pairing = ctx.pairing(pairing_mode, pairing_k, "dataset build");

    auto dataset = assemble_dataset(notes, lexicon, matchers, bank, pairing, !skip_no_answer);
    save_dataset(dataset, out);
    size_t impossible = 0;
    for (const auto& sample : dataset.samples) {
        impossible += sample.is_impossible ? 1 : 0;
    }
    emit(json{{"notes", dataset.notes.size()},
              {"samples", dataset.samples.size()},
              {"impossible", impossible},
              {"out", out}},
         "");
}

void stage_dataset_split(const Context& ctx, const std::string& in, const std::string& out_dir,
                         const std::string& ratios_flag) {
    auto dataset = load_dataset(in);
    auto ratios = ratios_flag.empty()
                      ? (ctx.config ? ctx.config->split_ratios : std::array<double, 3>{0.8, 0.1, 0.1})
                      : parse_ratios(ratios_flag);
    auto seed = ctx.require_seed("dataset split");
    auto split = split_by_patient(dataset, ratios, seed);

    std::filesystem::create_directories(out_dir);
    save_dataset(split.train, std::filesystem::path(out_dir) / "train.json");
    save_dataset(split.dev, std::filesystem::path(out_dir) / "dev.json");
    save_dataset(split.test, std::filesystem::path(out_dir) / "test.json");

    auto patients = [](const Dataset& d) {
        std::set<std::string> ids;
        for (const auto& note : d.notes) {
            ids.insert(note.patient_id);
        }
        return ids.size();
    };
    emit(json{{"seed", seed},
              {"train", {{"patients", patients(split.train)}, {"samples", split.train.samples.size()}}},
              {"dev", {{"patients", patients(split.dev)}, {"samples", split.dev.samples.size()}}},
              {"test", {{"patients", patients(split.test)}, {"samples", split.test.samples.size()}}},
              {"out_dir", out_dir}},
         "");
}

void stage_dataset_stats(const std::string& in, const std::string& out) {
    auto dataset = load_dataset(in);
    size_t impossible = 0;
    for (const auto& sample : dataset.samples) {
        impossible += sample.is_impossible ? 1 : 0;
    }
    json groups = json::object();
    for (const auto& [group_id, count] : group_histogram(dataset)) {
        groups[group_id] = count;
    }
    emit(json{{"notes", dataset.notes.size()},
              {"samples", dataset.samples.size()},
              {"impossible", impossible},
              {"groups", groups}},
         out);
}

void stage_chunk(const Context& ctx, const std::string& in, const std::string& out,
                 size_t max_seq, size_t stride, size_t max_q, size_t max_answer, size_t reserve) {
    auto dataset = load_dataset(in);
    auto policy = ctx.chunk_policy();
    if (max_seq) {
        policy.max_sequence_tokens = max_seq;
    }
    if (stride) {
        policy.document_stride_tokens = stride;
    }
    if (max_q) {
        policy.max_question_tokens = max_q;
    }
    if (max_answer) {
        policy.max_answer_tokens = max_answer;
    }
    policy.reserve_tokens = reserve ? reserve : policy.reserve_tokens;

    auto chunks = chunk_dataset(dataset, policy, whitespace_tokenizer());
    save_chunks(chunks, out);
    size_t with_answer = 0;
    for (const auto& chunk : chunks) {
        with_answer += chunk.is_answer_present ? 1 : 0;
    }
    emit(json{{"chunks", chunks.size()}, {"with_answer", with_answer}, {"out", out}}, "");
}

void stage_query(const Context& ctx, const std::string& lexicon_flag,
                 const std::string& note_file, const std::string& question) {
    auto lexicon = load_lexicon(ctx.lexicon_path(lexicon_flag));
    auto matchers = compile_matchers(lexicon);
    auto bank = expand_question_bank(lexicon);

    Note note;
    note.note_id = "query-note";
    note.patient_id = "query-patient";
    note.date = "1970-01-01";
    note.raw_text = read_text_file(note_file);
    note.cleaned_text = clean_note(note.raw_text);

    auto result = answer_question(note, question, lexicon, matchers, bank, ctx.abbreviations());
    json answers = json::array();
    for (const auto& answer : result.answers) {
        answers.push_back({{"text", answer.text},
                           {"start", answer.start},
                           {"end", answer.end},
                           {"query_groups", answer.query_group_ids}});
    }
    emit(json{{"classification", classification_to_json(result.classification)},
              {"answers", std::move(answers)}},
         "");
}

void stage_eval_score(const std::string& dataset_path, const std::string& preds_path,
                      const std::string& out) {
    auto dataset = load_dataset(dataset_path);
    auto predictions = load_predictions(preds_path);
    auto report = score_predictions(dataset, predictions);

    json samples = json::array();
    for (const auto& score : report.sample_scores) {
        samples.push_back({{"id", score.sample_id},
                           {"em", score.em},
                           {"perfect_recall", score.perfect_recall},
                           {"f1", score.f1},
                           {"tp", score.tp},
                           {"fp", score.fp},
                           {"fn", score.fn}});
    }
    emit(json{{"em", report.em},
              {"perfect_recall", report.perfect_recall},
              {"f1", report.f1},
              {"no_answer_accuracy", report.no_answer_accuracy},
              {"sample_count", report.sample_count},
              {"impossible_count", report.impossible_count},
              {"samples", std::move(samples)}},
         out);
}

void stage_eval_analyze(const std::string& dataset_path, const std::string& preds_path,
                        const std::string& by, const std::string& out) {
    auto dataset = load_dataset(dataset_path);
    auto predictions = load_predictions(preds_path);
    auto report = score_predictions(dataset, predictions);

    std::string csv;
    if (by == "note_length" || by == "question_length" || by == "answer_length") {
        csv = bins_csv(bin_metrics(dataset, report.sample_scores, by));
    } else if (by == "group") {
        csv = groups_csv(per_group_metrics(dataset, report.sample_scores));
    } else if (by == "ratio") {
        csv = ratios_csv(answer_context_ratios(dataset, predictions));
    } else {
        throw Error("--by must be one of note_length, question_length, answer_length, group, "
                    "ratio; got '" + by + "'");
    }
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(out, csv);
    }
}

void stage_eval_ci(const Context& ctx, const std::string& dataset_path,
                   const std::string& preds_path, double level, size_t reps,
                   const std::string& out) {
    auto dataset = load_dataset(dataset_path);
    auto predictions = load_predictions(preds_path);
    auto params = ctx.bootstrap(level, reps, "eval ci");
    auto report = score_predictions(dataset, predictions);

    std::vector<double> em_values;
    std::vector<double> pr_values;
    std::vector<double> f1_values;
    for (const auto& score : report.sample_scores) {
        em_values.push_back(100.0 * score.em);
        pr_values.push_back(100.0 * score.perfect_recall);
        f1_values.push_back(100.0 * score.f1);
    }
    emit(json{{"em", ci_to_json(bootstrap_ci(em_values, params.level, params.replicates,
                                             params.seed))},
              {"perfect_recall", ci_to_json(bootstrap_ci(pr_values, params.level,
                                                         params.replicates, params.seed + 1))},
              {"f1", ci_to_json(bootstrap_ci(f1_values, params.level, params.replicates,
                                             params.seed + 2))}},
         out);
}

void stage_eval_report(const Context& ctx, const std::string& dataset_path,
                       const std::string& preds_path, const std::string& out_dir, double level,
                       size_t reps) {
    auto dataset = load_dataset(dataset_path);
    auto predictions = load_predictions(preds_path);
    auto params = ctx.bootstrap(level, reps, "eval report");
    auto report = build_report(dataset, predictions, params);
    render_report(report, out_dir);
    emit(json{{"out_dir", out_dir},
              {"em", report.em},
              {"perfect_recall", report.perfect_recall},
              {"f1", report.f1}},
         "");
}

void stage_pipeline_all(const Context& ctx, const std::string& out_dir_flag) {
    if (!ctx.config) {
        throw Error("pipeline all: --config is required");
    }
    const auto& config = *ctx.config;
    if (config.lexicon_path.empty() || config.corpus_path.empty()) {
        throw Error("pipeline all: config must set 'lexicon' and 'corpus'");
    }
    std::filesystem::path out_dir =
        !out_dir_flag.empty() ? std::filesystem::path(out_dir_flag) : config.out_dir;
    if (out_dir.empty()) {
        throw Error("pipeline all: an output directory is required (config out_dir or --out-dir)");
    }
    auto seed = ctx.require_seed("pipeline all");
    std::filesystem::create_directories(out_dir);

    auto lexicon = load_lexicon(config.lexicon_path);
    auto matchers = compile_matchers(lexicon);
    auto bank = expand_question_bank(lexicon);
    auto abbreviations = sentence_abbreviations(config);

    // 1. Clean.
    auto cleaned = clean_notes(load_notes_any(config.corpus_path));
    save_corpus(cleaned, out_dir / "cleaned.json");

    // 2. Keyword filter + outlier removal; keyword-free notes are kept
    //    aside to become no-answer samples.
    auto [keyword_notes, no_keyword_notes] = filter_by_keywords(cleaned, matchers);
    auto [kept_notes, outlier_notes] = drop_length_outliers(keyword_notes);
    save_corpus(kept_notes, out_dir / "filtered.json");
    log_info("pipeline: " + std::to_string(kept_notes.size()) + " keyword notes kept, " +
             std::to_string(no_keyword_notes.size()) + " keyword-free, " +
             std::to_string(outlier_notes.size()) + " outliers dropped");

    std::set<std::string> dataset_note_ids;
    for (const auto& note : kept_notes) {
        dataset_note_ids.insert(note.note_id);
    }
    for (const auto& note : no_keyword_notes) {
        dataset_note_ids.insert(note.note_id);
    }
    std::vector<Note> dataset_notes;
    for (const auto& note : cleaned) {
        if (dataset_note_ids.count(note.note_id)) {
            dataset_notes.push_back(note);
        }
    }

    // 3. Annotations for audit.
    std::vector<NoteAnnotations> annotations;
    for (const auto& note : kept_notes) {
        annotations.push_back({note.note_id, extract_note(note, lexicon, matchers, abbreviations)});
    }
    save_annotations(annotations, out_dir / "annotations.json");

    // 4. Dataset (with no-answer samples).
    Pairing pairing;
    if (config.pairing_mode == Pairing::Mode::sample_k) {
        pairing = Pairing::sample_k(config.pairing_k, seed);
    }
    auto dataset = assemble_dataset(dataset_notes, lexicon, matchers, bank, pairing, true);
    save_dataset(dataset, out_dir / "dataset.json");

    // 5. Patient-level split.
    auto split = split_by_patient(dataset, config.split_ratios, seed);
    save_dataset(split.train, out_dir / "train.json");
    save_dataset(split.dev, out_dir / "dev.json");
    save_dataset(split.test, out_dir / "test.json");

    // 6. Statistics.
    write_text_file(out_dir / "stats.json", corpus_stats_to_json(corpus_stats(dataset_notes, dataset)));
    {
        size_t impossible = 0;
        for (const auto& sample : dataset.samples) {
            impossible += sample.is_impossible ? 1 : 0;
        }
        json groups = json::object();
        for (const auto& [group_id, count] : group_histogram(dataset)) {
            groups[group_id] = count;
        }
        write_text_file(out_dir / "dataset_stats.json",
                        json{{"notes", dataset.notes.size()},
                             {"samples", dataset.samples.size()},
                             {"impossible", impossible},
                             {"groups", std::move(groups)}}
                                .dump(2) +
                            "\n");
    }

    // 7. Model-input chunks.
    save_chunks(chunk_dataset(dataset, config.chunk, whitespace_tokenizer()),
                out_dir / "chunks.json");

    // 8. Rule-based predictions on the test split.
    Predictions predictions;
    {
        std::map<std::string, const DatasetNote*> notes_by_id;
        for (const auto& note : split.test.notes) {
            notes_by_id[note.note_id] = &note;
        }
        for (const auto& sample : split.test.samples) {
            const auto* dnote = notes_by_id.at(sample.note_id);
            Note note{dnote->note_id, dnote->patient_id, "1970-01-01", dnote->context,
                      dnote->context};
            auto result = answer_question(note, sample.question, lexicon, matchers, bank,
                                          abbreviations);
            predictions[sample.id] =
                result.answers.empty() ? std::string() : result.answers.front().text;
        }
    }
    save_predictions(predictions, out_dir / "predictions.json");

    // 9. Full evaluation report on the test split.
    BootstrapParams params{config.bootstrap_level, config.bootstrap_replicates, seed};
    auto report = build_report(split.test, predictions, params);
    render_report(report, out_dir / "report");

    emit(json{{"out_dir", out_dir.string()},
              {"notes", dataset.notes.size()},
              {"samples", dataset.samples.size()},
              {"test_samples", split.test.samples.size()},
              {"em", report.em},
              {"perfect_recall", report.perfect_recall},
              {"f1", report.f1},
              {"no_answer_accuracy", report.no_answer_accuracy}},
         "");
}

} // namespace

int run(const std::vector<std::string>& args) {
    Context ctx;

    CLI::App app{"rule-based clinical QA dataset pipeline"};
    app.require_subcommand(1);
    app.add_option("--config", ctx.config_path, "run configuration file");
    auto* seed_opt = app.add_option("--seed", ctx.seed_flag, "seed for randomized stages");
    app.add_option("--log-level", ctx.log_level_flag, "debug|info|warning|error|off");

    auto add_sub = [](CLI::App* parent, const std::string& name, const std::string& desc) {
        auto* sub = parent->add_subcommand(name, desc);
        sub->fallthrough();
        return sub;
    };

    // lexicon validate
    auto* lexicon_cmd = add_sub(&app, "lexicon", "knowledge-base commands");
    lexicon_cmd->require_subcommand(1);
    std::string lx_lexicon;
    auto* lexicon_validate = add_sub(lexicon_cmd, "validate", "load and validate a lexicon");
    lexicon_validate->add_option("--lexicon", lx_lexicon, "lexicon file");

    // corpus clean|filter|stats
    auto* corpus_cmd = add_sub(&app, "corpus", "note ingestion commands");
    corpus_cmd->require_subcommand(1);
    std::string cc_in, cc_out;
    auto* corpus_clean = add_sub(corpus_cmd, "clean", "clean raw notes");
    corpus_clean->add_option("--in", cc_in, "manifest or corpus file");
    corpus_clean->add_option("--out", cc_out, "cleaned corpus file")->required();

    std::string cf_lexicon, cf_in, cf_out, cf_dropped;
    bool cf_outliers = false;
    auto* corpus_filter = add_sub(corpus_cmd, "filter", "keep keyword-bearing notes");
    corpus_filter->add_option("--lexicon", cf_lexicon, "lexicon file");
    corpus_filter->add_option("--in", cf_in, "cleaned corpus file");
    corpus_filter->add_option("--out", cf_out, "kept notes file")->required();
    corpus_filter->add_option("--dropped", cf_dropped, "where to write dropped notes");
    corpus_filter->add_flag("--drop-outliers", cf_outliers, "also drop length outliers");

    std::string cs_in, cs_dataset, cs_out;
    auto* corpus_stats_cmd = add_sub(corpus_cmd, "stats", "corpus statistics");
    corpus_stats_cmd->add_option("--in", cs_in, "cleaned corpus file");
    corpus_stats_cmd->add_option("--dataset", cs_dataset, "dataset file for sample statistics");
    corpus_stats_cmd->add_option("--out", cs_out, "output file (default stdout)");

    // annotate
    std::string an_lexicon, an_in, an_out;
    auto* annotate_cmd = add_sub(&app, "annotate", "extract answers from keyword notes");
    annotate_cmd->add_option("--lexicon", an_lexicon, "lexicon file");
    annotate_cmd->add_option("--in", an_in, "cleaned corpus file");
    annotate_cmd->add_option("--out", an_out, "annotations file")->required();

    // dataset build|split|stats
    auto* dataset_cmd = add_sub(&app, "dataset", "QA dataset commands");
    dataset_cmd->require_subcommand(1);
    std::string db_lexicon, db_in, db_out, db_pairing;
    size_t db_k = 0;
    bool db_skip_no_answer = false;
    auto* dataset_build = add_sub(dataset_cmd, "build", "assemble QA samples");
    dataset_build->add_option("--lexicon", db_lexicon, "lexicon file");
    dataset_build->add_option("--in", db_in, "cleaned corpus file");
    dataset_build->add_option("--out", db_out, "dataset file")->required();
    dataset_build->add_flag("--skip-no-answer", db_skip_no_answer,
                            "do not add no-answer samples for keyword-free notes");
    dataset_build->add_option("--pairing", db_pairing, "all_variants|sample_k");
    dataset_build->add_option("--k", db_k, "variants per answer and group for sample_k");

    std::string ds_in, ds_out_dir, ds_ratios;
    auto* dataset_split = add_sub(dataset_cmd, "split", "patient-level split");
    dataset_split->add_option("--in", ds_in, "dataset file")->required();
    dataset_split->add_option("--out-dir", ds_out_dir, "directory for train/dev/test")->required();
    dataset_split->add_option("--ratios", ds_ratios, "e.g. 0.8,0.1,0.1");

    std::string dst_in, dst_out;
    auto* dataset_stats = add_sub(dataset_cmd, "stats", "dataset statistics");
    dataset_stats->add_option("--in", dst_in, "dataset file")->required();
    dataset_stats->add_option("--out", dst_out, "output file (default stdout)");

    // chunk
    std::string ch_in, ch_out;
    size_t ch_max_seq = 0, ch_stride = 0, ch_max_q = 0, ch_max_answer = 0, ch_reserve = 0;
    auto* chunk_cmd = add_sub(&app, "chunk", "sliding-window model inputs");
    chunk_cmd->add_option("--in", ch_in, "dataset file")->required();
    chunk_cmd->add_option("--out", ch_out, "chunks file")->required();
    chunk_cmd->add_option("--max-seq", ch_max_seq, "maximum sequence tokens (default 512)");
    chunk_cmd->add_option("--stride", ch_stride, "document stride tokens (default 128)");
    chunk_cmd->add_option("--max-q", ch_max_q, "maximum question tokens (default 20)");
    chunk_cmd->add_option("--max-answer", ch_max_answer, "maximum answer tokens (default 100)");
    chunk_cmd->add_option("--reserve", ch_reserve, "reserved tokens per window (default 0)");

    // query
    std::string q_lexicon, q_note_file, q_question;
    auto* query_cmd = add_sub(&app, "query", "answer one question against one note");
    query_cmd->add_option("--lexicon", q_lexicon, "lexicon file");
    query_cmd->add_option("--note-file", q_note_file, "raw note text file")->required();
    query_cmd->add_option("--question", q_question, "question text")->required();

    // eval score|analyze|ci|report
    auto* eval_cmd = add_sub(&app, "eval", "scoring and analysis");
    eval_cmd->require_subcommand(1);
    std::string es_dataset, es_preds, es_out;
    auto* eval_score = add_sub(eval_cmd, "score", "score predictions");
    eval_score->add_option("--dataset", es_dataset, "gold dataset file")->required();
    eval_score->add_option("--preds", es_preds, "predictions file")->required();
    eval_score->add_option("--out", es_out, "output file (default stdout)");

    std::string ea_dataset, ea_preds, ea_by, ea_out;
    auto* eval_analyze = add_sub(eval_cmd, "analyze", "breakdowns as CSV");
    eval_analyze->add_option("--dataset", ea_dataset, "gold dataset file")->required();
    eval_analyze->add_option("--preds", ea_preds, "predictions file")->required();
    eval_analyze
        ->add_option("--by", ea_by, "note_length|question_length|answer_length|group|ratio")
        ->required();
    eval_analyze->add_option("--out", ea_out, "output file (default stdout)");

    std::string ec_dataset, ec_preds, ec_out;
    double ec_level = 0.0;
    size_t ec_reps = 0;
    auto* eval_ci = add_sub(eval_cmd, "ci", "bootstrap confidence intervals");
    eval_ci->add_option("--dataset", ec_dataset, "gold dataset file")->required();
    eval_ci->add_option("--preds", ec_preds, "predictions file")->required();
    eval_ci->add_option("--level", ec_level, "confidence level (default 0.95)");
    eval_ci->add_option("--reps", ec_reps, "bootstrap replicates (default 10000)");
    eval_ci->add_option("--out", ec_out, "output file (default stdout)");

    std::string er_dataset, er_preds, er_out_dir;
    double er_level = 0.0;
    size_t er_reps = 0;
    auto* eval_report = add_sub(eval_cmd, "report", "full report with all breakdowns");
    eval_report->add_option("--dataset", er_dataset, "gold dataset file")->required();
    eval_report->add_option("--preds", er_preds, "predictions file")->required();
    eval_report->add_option("--out-dir", er_out_dir, "report directory")->required();
    eval_report->add_option("--level", er_level, "confidence level (default 0.95)");
    eval_report->add_option("--reps", er_reps, "bootstrap replicates (default 10000)");

    // pipeline all
    auto* pipeline_cmd = add_sub(&app, "pipeline", "composed stages");
    pipeline_cmd->require_subcommand(1);
    std::string pa_out_dir;
    auto* pipeline_all = add_sub(pipeline_cmd, "all", "run the whole pipeline from a config");
    pipeline_all->add_option("--out-dir", pa_out_dir, "override the config output directory");

    std::string command = "cli";
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        ctx.seed_given = seed_opt->count() > 0;
        ctx.finalize();

        if (lexicon_validate->parsed()) {
            command = "lexicon validate";
            stage_lexicon_validate(ctx, lx_lexicon);
        } else if (corpus_clean->parsed()) {
            command = "corpus clean";
            stage_corpus_clean(ctx, cc_in, cc_out);
        } else if (corpus_filter->parsed()) {
            command = "corpus filter";
            stage_corpus_filter(ctx, cf_lexicon, cf_in, cf_out, cf_dropped, cf_outliers);
        } else if (corpus_stats_cmd->parsed()) {
            command = "corpus stats";
            stage_corpus_stats(ctx, cs_in, cs_dataset, cs_out);
        } else if (annotate_cmd->parsed()) {
            command = "annotate";
            stage_annotate(ctx, an_lexicon, an_in, an_out);
        } else if (dataset_build->parsed()) {
            command = "dataset build";
            stage_dataset_build(ctx, db_lexicon, db_in, db_out, db_skip_no_answer, db_pairing,
                                db_k);
        } else if (dataset_split->parsed()) {
            command = "dataset split";
            stage_dataset_split(ctx, ds_in, ds_out_dir, ds_ratios);
        } else if (dataset_stats->parsed()) {
            command = "dataset stats";
            stage_dataset_stats(dst_in, dst_out);
        } else if (chunk_cmd->parsed()) {
            command = "chunk";
            stage_chunk(ctx, ch_in, ch_out, ch_max_seq, ch_stride, ch_max_q, ch_max_answer,
                        ch_reserve);
        } else if (query_cmd->parsed()) {
            command = "query";
            stage_query(ctx, q_lexicon, q_note_file, q_question);
        } else if (eval_score->parsed()) {
            command = "eval score";
            stage_eval_score(es_dataset, es_preds, es_out);
        } else if (eval_analyze->parsed()) {
            command = "eval analyze";
            stage_eval_analyze(ea_dataset, ea_preds, ea_by, ea_out);
        } else if (eval_ci->parsed()) {
            command = "eval ci";
            stage_eval_ci(ctx, ec_dataset, ec_preds, ec_level, ec_reps, ec_out);
        } else if (eval_report->parsed()) {
            command = "eval report";
            stage_eval_report(ctx, er_dataset, er_preds, er_out_dir, er_level, er_reps);
        } else if (pipeline_all->parsed()) {
            command = "pipeline all";
            stage_pipeline_all(ctx, pa_out_dir);
        } else {
            throw Error("no subcommand given");
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help and friends
        }
        std::cerr << json{{"error", e.what()}, {"command", command}}.dump() << "\n";
        return e.get_exit_code();
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"command", command}}.dump() << "\n";
        return 1;
    }
}

} // namespace iduqa::cli
