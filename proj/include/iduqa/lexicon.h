#pragma once

// The domain knowledge base: keyword groups, the co-occurring phrase book,
// query groups with question templates, and answer-to-question mapping rules.
// It ships as an editable JSON file so the phrase lists can be revised
// without rebuilding; load_lexicon expands the alternation shorthand and
// validates every invariant.

#include "iduqa/common.h"

#include <filesystem>
#include <string>
#include <vector>

namespace iduqa {

struct KeywordGroup {
    std::string id;
    std::string label;
    std::vector<std::string> phrases; // expanded, lowercase, duplicate-free

    bool operator==(const KeywordGroup&) const = default;
};

struct PhraseBook {
    std::vector<std::string> negation_phrases;            // NP
    std::vector<std::string> temporal_phrases;            // TemP
    std::vector<std::string> additional_temporal_phrases; // ATP
    std::vector<std::string> substance_phrases;           // SP
    std::vector<std::string> trackmark_phrases;           // TMP

    bool operator==(const PhraseBook&) const = default;
};

struct QueryGroup {
    std::string id;
    std::string label;
    std::vector<std::string> question_templates; // raw templates with {a|b} slots

    bool operator==(const QueryGroup&) const = default;
};

struct MappingRule {
    std::string query_group_id;
    std::vector<std::string> trigger_phrases; // expanded, lowercase
    bool is_default = false;

    bool operator==(const MappingRule&) const = default;
};

struct Lexicon {
    std::vector<KeywordGroup> keyword_groups;
    PhraseBook phrase_book;
    std::vector<QueryGroup> query_groups;
    std::vector<MappingRule> mapping_rules;
    std::string version;

    const QueryGroup* find_query_group(const std::string& id) const;
    const MappingRule& default_rule() const;

    bool operator==(const Lexicon&) const = default;
};

/// Expands one phrase pattern of the lexicon shorthand grammar:
/// `a/b/c` alternates at word granularity, `word(s/ed)` expands a
/// parenthesized suffix group to the bare stem plus each suffixed form.
/// Results are lowercased; order is word-major, first alternative first.
std::vector<std::string> expand_phrase_pattern(const std::string& pattern);

/// Expands a `{a|b}` question template; alternatives are taken verbatim at
/// phrase granularity. Throws on unbalanced braces.
std::vector<std::string> expand_question_template(const std::string& tmpl);

Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(const std::string& json_text, const std::string& origin = "<string>");

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);
std::string lexicon_to_json(const Lexicon& lexicon);

/// Re-checks every Lexicon invariant (used by load and `lexicon validate`).
void validate_lexicon(const Lexicon& lexicon);

} // namespace iduqa
