#include "iduqa/lexicon.h"

#include "iduqa/text.h"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace iduqa {

using nlohmann::json;

namespace {

// Expands parenthesized suffix groups inside one alternation unit:
// "inject(s/ed)" -> {inject, injects, injected}. The bare stem always
// comes first. Recurses so several groups in one unit compose.
std::vector<std::string> expand_unit(const std::string& unit) {
    auto open = unit.find('(');
    if (open == std::string::npos) {
        if (unit.find(')') != std::string::npos) {
            throw Error("unbalanced ')' in phrase pattern '" + unit + "'");
        }
        return {unit};
    }
    auto close = unit.find(')', open + 1);
    if (close == std::string::npos) {
        throw Error("unbalanced '(' in phrase pattern '" + unit + "'");
    }
    std::string stem = unit.substr(0, open);
    std::string content = unit.substr(open + 1, close - open - 1);
    std::string tail = unit.substr(close + 1);

    std::vector<std::string> suffixes{""};
    std::string current;
    for (char c : content) {
        if (c == '/') {
            suffixes.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    suffixes.push_back(current);

    std::vector<std::string> out;
    for (const auto& sfx : suffixes) {
        for (auto& expanded : expand_unit(stem + sfx + tail)) {
            out.push_back(std::move(expanded));
        }
    }
    return out;
}

// Splits one whitespace-delimited word into its top-level alternatives:
// slashes alternate only at paren depth 0, so "inject(s/ed)" stays whole
// while "iv/intravenous" splits.
std::vector<std::string> word_alternatives(const std::string& word) {
    std::vector<std::string> units;
    std::string current;
    int depth = 0;
    for (char c : word) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
            if (depth < 0) {
                throw Error("unbalanced ')' in phrase pattern '" + word + "'");
            }
        }
        if (c == '/' && depth == 0) {
            units.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    units.push_back(current);

    std::vector<std::string> out;
    for (const auto& unit : units) {
        for (auto& expanded : expand_unit(unit)) {
            out.push_back(std::move(expanded));
        }
    }
    return out;
}

void append_unique(std::vector<std::string>& dst, std::set<std::string>& seen,
                   const std::string& phrase) {
    if (seen.insert(phrase).second) {
        dst.push_back(phrase);
    }
}

// A phrase entry is either a pattern string (expanded) or
// {"literal": "..."} which bypasses the grammar entirely.
std::vector<std::string> expand_phrase_entry(const json& entry, const std::string& field) {
    if (entry.is_string()) {
        return expand_phrase_pattern(entry.get<std::string>());
    }
    if (entry.is_object() && entry.contains("literal") && entry["literal"].is_string()) {
        return {to_lower(entry["literal"].get<std::string>())};
    }
    throw Error(field + ": phrase entry must be a string or {\"literal\": ...}");
}

std::vector<std::string> load_phrase_list(const json& arr, const std::string& field) {
    if (!arr.is_array()) {
        throw Error(field + ": expected an array of phrases");
    }
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (size_t i = 0; i < arr.size(); ++i) {
        auto field_i = field + "[" + std::to_string(i) + "]";
        for (const auto& phrase : expand_phrase_entry(arr[i], field_i)) {
            if (trim(phrase).empty()) {
                throw Error(field_i + ": empty phrase");
            }
            append_unique(out, seen, phrase);
        }
    }
    return out;
}

std::string require_string(const json& obj, const std::string& key, const std::string& field) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(field + "." + key + ": missing or not a string");
    }
    return obj[key].get<std::string>();
}

// Phrases that use grammar metacharacters must round-trip through the
// literal form, otherwise load(save(lexicon)) would re-expand them.
json phrase_to_json(const std::string& phrase) {
    if (phrase.find('/') != std::string::npos || phrase.find('(') != std::string::npos ||
        phrase.find(')') != std::string::npos) {
        return json{{"literal", phrase}};
    }
    return json(phrase);
}

json phrase_list_to_json(const std::vector<std::string>& phrases) {
    json arr = json::array();
    for (const auto& phrase : phrases) {
        arr.push_back(phrase_to_json(phrase));
    }
    return arr;
}

void check_phrases(const std::vector<std::string>& phrases, const std::string& field) {
    if (phrases.empty()) {
        throw Error(field + ": must contain at least one phrase");
    }
    std::set<std::string> seen;
    for (size_t i = 0; i < phrases.size(); ++i) {
        const auto& phrase = phrases[i];
        auto field_i = field + "[" + std::to_string(i) + "]";
        if (trim(phrase).empty()) {
            throw Error(field_i + ": empty phrase");
        }
        if (phrase != to_lower(phrase)) {
            throw Error(field_i + ": phrase '" + phrase + "' is not lowercase");
        }
        if (!seen.insert(phrase).second) {
            throw Error(field_i + ": duplicate phrase '" + phrase + "'");
        }
    }
}

} // namespace

std::vector<std::string> expand_phrase_pattern(const std::string& pattern) {
    auto lowered = to_lower(pattern);
    std::vector<std::string> words;
    {
        std::string current;
        for (char c : lowered) {
            if (is_space_char(c)) {
                if (!current.empty()) {
                    words.push_back(current);
                    current.clear();
                }
            } else {
                current += c;
            }
        }
        if (!current.empty()) {
            words.push_back(current);
        }
    }
    if (words.empty()) {
        throw Error("empty phrase pattern");
    }

    std::vector<std::string> results{""};
    for (size_t w = 0; w < words.size(); ++w) {
        auto alternatives = word_alternatives(words[w]);
        std::vector<std::string> next;
        next.reserve(results.size() * alternatives.size());
        for (const auto& prefix : results) {
            for (const auto& alt : alternatives) {
                next.push_back(w == 0 ? alt : prefix + " " + alt);
            }
        }
        results = std::move(next);
    }
    return results;
}

std::vector<std::string> expand_question_template(const std::string& tmpl) {
    // Parse into fixed segments and alternative slots, then take the
    // cartesian product with the leftmost slot varying slowest.
    std::vector<std::string> results{""};
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '}') {
            throw Error("unbalanced '}' in question template '" + tmpl + "'");
        }
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close == std::string::npos) {
                throw Error("unbalanced '{' in question template '" + tmpl + "'");
            }
            auto inner = tmpl.substr(i + 1, close - i - 1);
            if (inner.find('{') != std::string::npos) {
                throw Error("nested '{' in question template '" + tmpl + "'");
            }
            std::vector<std::string> alternatives;
            std::string current;
            for (char c : inner) {
                if (c == '|') {
                    alternatives.push_back(current);
                    current.clear();
                } else {
                    current += c;
                }
            }
            alternatives.push_back(current);

            std::vector<std::string> next;
            next.reserve(results.size() * alternatives.size());
            for (const auto& prefix : results) {
                for (const auto& alt : alternatives) {
                    next.push_back(prefix + alt);
                }
            }
            results = std::move(next);
            i = close + 1;
        } else {
            for (auto& r : results) {
                r += tmpl[i];
            }
            ++i;
        }
    }
    return results;
}

const QueryGroup* Lexicon::find_query_group(const std::string& id) const {
    for (const auto& group : query_groups) {
        if (group.id == id) {
            return &group;
        }
    }
    return nullptr;
}

const MappingRule& Lexicon::default_rule() const {
    for (const auto& rule : mapping_rules) {
        if (rule.is_default) {
            return rule;
        }
    }
    throw Error("lexicon has no default mapping rule");
}

Lexicon parse_lexicon(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(origin + ": lexicon parse failure: " + e.what());
    }
    if (!doc.is_object()) {
        throw Error(origin + ": lexicon root must be an object");
    }

    Lexicon lex;
    lex.version = require_string(doc, "version", "lexicon");

    if (!doc.contains("keyword_groups") || !doc["keyword_groups"].is_array()) {
        throw Error("keyword_groups: missing or not an array");
    }
    for (size_t i = 0; i < doc["keyword_groups"].size(); ++i) {
        const auto& g = doc["keyword_groups"][i];
        auto field = "keyword_groups[" + std::to_string(i) + "]";
        KeywordGroup group;
        group.id = require_string(g, "id", field);
        group.label = require_string(g, "label", field);
        group.phrases = load_phrase_list(g.value("phrases", json::array()), field + ".phrases");
        lex.keyword_groups.push_back(std::move(group));
    }

    if (!doc.contains("phrase_book") || !doc["phrase_book"].is_object()) {
        throw Error("phrase_book: missing or not an object");
    }
    const auto& pb = doc["phrase_book"];
    auto load_class = [&](const char* key) {
        if (!pb.contains(key)) {
            throw Error(std::string("phrase_book.") + key + ": missing");
        }
        return load_phrase_list(pb[key], std::string("phrase_book.") + key);
    };
    lex.phrase_book.negation_phrases = load_class("negation_phrases");
    lex.phrase_book.temporal_phrases = load_class("temporal_phrases");
    lex.phrase_book.additional_temporal_phrases = load_class("additional_temporal_phrases");
    lex.phrase_book.substance_phrases = load_class("substance_phrases");
    lex.phrase_book.trackmark_phrases = load_class("trackmark_phrases");

    if (!doc.contains("query_groups") || !doc["query_groups"].is_array()) {
        throw Error("query_groups: missing or not an array");
    }
    for (size_t i = 0; i < doc["query_groups"].size(); ++i) {
        const auto& g = doc["query_groups"][i];
        auto field = "query_groups[" + std::to_string(i) + "]";
        QueryGroup group;
        group.id = require_string(g, "id", field);
        group.label = require_string(g, "label", field);
        if (!g.contains("question_templates") || !g["question_templates"].is_array()) {
            throw Error(field + ".question_templates: missing or not an array");
        }
        for (size_t t = 0; t < g["question_templates"].size(); ++t) {
            const auto& tmpl = g["question_templates"][t];
            if (!tmpl.is_string()) {
                throw Error(field + ".question_templates[" + std::to_string(t) +
                            "]: not a string");
            }
            group.question_templates.push_back(tmpl.get<std::string>());
        }
        lex.query_groups.push_back(std::move(group));
    }

    if (!doc.contains("mapping_rules") || !doc["mapping_rules"].is_array()) {
        throw Error("mapping_rules: missing or not an array");
    }
    for (size_t i = 0; i < doc["mapping_rules"].size(); ++i) {
        const auto& r = doc["mapping_rules"][i];
        auto field = "mapping_rules[" + std::to_string(i) + "]";
        MappingRule rule;
        rule.query_group_id = require_string(r, "query_group_id", field);
        rule.is_default = r.value("is_default", false);
        rule.trigger_phrases =
            load_phrase_list(r.value("trigger_phrases", json::array()), field + ".trigger_phrases");
        lex.mapping_rules.push_back(std::move(rule));
    }

    validate_lexicon(lex);
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open lexicon file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str(), path.string());
}

std::string lexicon_to_json(const Lexicon& lexicon) {
    json doc;
    doc["version"] = lexicon.version;
    doc["keyword_groups"] = json::array();
    for (const auto& group : lexicon.keyword_groups) {
        doc["keyword_groups"].push_back({{"id", group.id},
                                         {"label", group.label},
                                         {"phrases", phrase_list_to_json(group.phrases)}});
    }
    doc["phrase_book"] = {
        {"negation_phrases", phrase_list_to_json(lexicon.phrase_book.negation_phrases)},
        {"temporal_phrases", phrase_list_to_json(lexicon.phrase_book.temporal_phrases)},
        {"additional_temporal_phrases",
         phrase_list_to_json(lexicon.phrase_book.additional_temporal_phrases)},
        {"substance_phrases", phrase_list_to_json(lexicon.phrase_book.substance_phrases)},
        {"trackmark_phrases", phrase_list_to_json(lexicon.phrase_book.trackmark_phrases)}};
    doc["query_groups"] = json::array();
    for (const auto& group : lexicon.query_groups) {
        doc["query_groups"].push_back({{"id", group.id},
                                       {"label", group.label},
                                       {"question_templates", group.question_templates}});
    }
    doc["mapping_rules"] = json::array();
    for (const auto& rule : lexicon.mapping_rules) {
        doc["mapping_rules"].push_back({{"query_group_id", rule.query_group_id},
                                        {"trigger_phrases", phrase_list_to_json(rule.trigger_phrases)},
                                        {"is_default", rule.is_default}});
    }
    return doc.dump(2) + "\n";
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
    validate_lexicon(lexicon);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write lexicon file '" + path.string() + "'");
    }
    out << lexicon_to_json(lexicon);
}

void validate_lexicon(const Lexicon& lexicon) {
    if (trim(lexicon.version).empty()) {
        throw Error("version: must be a non-empty string");
    }

    if (lexicon.keyword_groups.empty()) {
        throw Error("keyword_groups: must contain at least one group");
    }
    std::set<std::string> keyword_ids;
    for (size_t i = 0; i < lexicon.keyword_groups.size(); ++i) {
        const auto& group = lexicon.keyword_groups[i];
        auto field = "keyword_groups[" + std::to_string(i) + "]";
        if (trim(group.id).empty()) {
            throw Error(field + ".id: must be a non-empty identifier");
        }
        if (!keyword_ids.insert(group.id).second) {
            throw Error(field + ".id: duplicate keyword group '" + group.id + "'");
        }
        check_phrases(group.phrases, field + ".phrases");
    }

    check_phrases(lexicon.phrase_book.negation_phrases, "phrase_book.negation_phrases");
    check_phrases(lexicon.phrase_book.temporal_phrases, "phrase_book.temporal_phrases");
    check_phrases(lexicon.phrase_book.additional_temporal_phrases,
                  "phrase_book.additional_temporal_phrases");
    check_phrases(lexicon.phrase_book.substance_phrases, "phrase_book.substance_phrases");
    check_phrases(lexicon.phrase_book.trackmark_phrases, "phrase_book.trackmark_phrases");

    if (lexicon.query_groups.empty()) {
        throw Error("query_groups: must contain at least one group");
    }
    std::set<std::string> group_ids;
    for (size_t i = 0; i < lexicon.query_groups.size(); ++i) {
        const auto& group = lexicon.query_groups[i];
        auto field = "query_groups[" + std::to_string(i) + "]";
        if (trim(group.id).empty()) {
            throw Error(field + ".id: must be a non-empty identifier");
        }
        if (!group_ids.insert(group.id).second) {
            throw Error(field + ".id: duplicate query group '" + group.id + "'");
        }
        if (group.question_templates.empty()) {
            throw Error(field + ".question_templates: must contain at least one template");
        }
        for (size_t t = 0; t < group.question_templates.size(); ++t) {
            auto field_t = field + ".question_templates[" + std::to_string(t) + "]";
            auto expanded = expand_question_template(group.question_templates[t]);
            if (expanded.empty()) {
                throw Error(field_t + ": expands to no questions");
            }
            for (const auto& question : expanded) {
                auto trimmed = trim(question);
                if (trimmed.empty()) {
                    throw Error(field_t + ": expands to an empty question");
                }
                if (trimmed.back() != '?') {
                    throw Error(field_t + ": question '" + trimmed + "' does not end with '?'");
                }
            }
        }
    }

    if (lexicon.mapping_rules.empty()) {
        throw Error("mapping_rules: must contain at least one rule");
    }
    size_t default_count = 0;
    for (size_t i = 0; i < lexicon.mapping_rules.size(); ++i) {
        const auto& rule = lexicon.mapping_rules[i];
        auto field = "mapping_rules[" + std::to_string(i) + "]";
        if (!group_ids.count(rule.query_group_id)) {
            throw Error(field + ": unknown query group '" + rule.query_group_id + "'");
        }
        if (rule.is_default) {
            ++default_count;
        } else if (rule.trigger_phrases.empty()) {
            throw Error(field + ".trigger_phrases: non-default rule needs at least one phrase");
        }
        for (size_t p = 0; p < rule.trigger_phrases.size(); ++p) {
            const auto& phrase = rule.trigger_phrases[p];
            if (trim(phrase).empty()) {
                throw Error(field + ".trigger_phrases[" + std::to_string(p) + "]: empty phrase");
            }
            if (phrase != to_lower(phrase)) {
                throw Error(field + ".trigger_phrases[" + std::to_string(p) + "]: phrase '" +
                            phrase + "' is not lowercase");
            }
        }
    }
    if (default_count != 1) {
        throw Error("mapping_rules: expected exactly one default rule, found " +
                    std::to_string(default_count));
    }
}

} // namespace iduqa
