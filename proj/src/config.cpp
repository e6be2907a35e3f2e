#include "iduqa/config.h"

#include "iduqa/extract.h"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace iduqa {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute()) {
        return p;
    }
    return base_dir / p;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir,
                           const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(origin + ": config parse failure: " + e.what());
    }
    if (!doc.is_object()) {
        throw Error(origin + ": config root must be an object");
    }

    RunConfig config;
    auto path_field = [&](const char* key) -> std::filesystem::path {
        if (!doc.contains(key)) {
            return {};
        }
        if (!doc[key].is_string()) {
            throw Error(origin + ": config field '" + key + "' must be a path string");
        }
        return resolve(base_dir, doc[key].get<std::string>());
    };
    config.lexicon_path = path_field("lexicon");
    config.corpus_path = path_field("corpus");
    config.out_dir = path_field("out_dir");

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            throw Error(origin + ": config field 'seed' must be a non-negative integer");
        }
        config.seed = doc["seed"].get<uint64_t>();
    }

    if (doc.contains("split_ratios")) {
        const auto& r = doc["split_ratios"];
        if (!r.is_array() || r.size() != 3 || !r[0].is_number() || !r[1].is_number() ||
            !r[2].is_number()) {
            throw Error(origin + ": config field 'split_ratios' must be three numbers");
        }
        config.split_ratios = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
    }

    if (doc.contains("chunk")) {
        const auto& c = doc["chunk"];
        if (!c.is_object()) {
            throw Error(origin + ": config field 'chunk' must be an object");
        }
        auto chunk_field = [&](const char* key, size_t fallback) -> size_t {
            if (!c.contains(key)) {
                return fallback;
            }
            if (!c[key].is_number_unsigned()) {
                throw Error(origin + ": config field 'chunk." + key +
                            "' must be a non-negative integer");
            }
            return c[key].get<size_t>();
        };
        config.chunk.max_sequence_tokens =
            chunk_field("max_sequence_tokens", config.chunk.max_sequence_tokens);
        config.chunk.document_stride_tokens =
            chunk_field("document_stride_tokens", config.chunk.document_stride_tokens);
        config.chunk.max_question_tokens =
            chunk_field("max_question_tokens", config.chunk.max_question_tokens);
        config.chunk.max_answer_tokens =
            chunk_field("max_answer_tokens", config.chunk.max_answer_tokens);
        config.chunk.reserve_tokens = chunk_field("reserve_tokens", config.chunk.reserve_tokens);
    }

    if (doc.contains("pairing")) {
        const auto& p = doc["pairing"];
        if (!p.is_object() || !p.contains("mode") || !p["mode"].is_string()) {
            throw Error(origin + ": config field 'pairing' must be {mode, k?}");
        }
        auto mode = p["mode"].get<std::string>();
        if (mode == "all_variants") {
            config.pairing_mode = Pairing::Mode::all_variants;
        } else if (mode == "sample_k") {
            config.pairing_mode = Pairing::Mode::sample_k;
            if (!p.contains("k") || !p["k"].is_number_unsigned() || p["k"].get<size_t>() == 0) {
                throw Error(origin + ": pairing mode 'sample_k' needs a positive 'k'");
            }
            config.pairing_k = p["k"].get<size_t>();
        } else {
            throw Error(origin + ": unknown pairing mode '" + mode + "'");
        }
    }

    if (doc.contains("bootstrap")) {
        const auto& b = doc["bootstrap"];
        if (!b.is_object()) {
            throw Error(origin + ": config field 'bootstrap' must be an object");
        }
        if (b.contains("level")) {
            if (!b["level"].is_number()) {
                throw Error(origin + ": config field 'bootstrap.level' must be a number");
            }
            config.bootstrap_level = b["level"].get<double>();
        }
        if (b.contains("replicates")) {
            if (!b["replicates"].is_number_unsigned()) {
                throw Error(origin + ": config field 'bootstrap.replicates' must be an integer");
            }
            config.bootstrap_replicates = b["replicates"].get<size_t>();
        }
    }

    if (doc.contains("log_level")) {
        if (!doc["log_level"].is_string()) {
            throw Error(origin + ": config field 'log_level' must be a string");
        }
        config.log_level = parse_log_level(doc["log_level"].get<std::string>());
    }

    if (doc.contains("sentence_abbreviations")) {
        const auto& a = doc["sentence_abbreviations"];
        if (!a.is_array()) {
            throw Error(origin + ": config field 'sentence_abbreviations' must be an array");
        }
        for (const auto& item : a) {
            if (!item.is_string()) {
                throw Error(origin + ": sentence_abbreviations entries must be strings");
            }
            config.sentence_abbreviations.push_back(item.get<std::string>());
        }
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path(), path.string());
}

std::vector<std::string> sentence_abbreviations(const RunConfig& config) {
    auto list = default_protected_abbreviations();
    list.insert(list.end(), config.sentence_abbreviations.begin(),
                config.sentence_abbreviations.end());
    return list;
}

} // namespace iduqa
