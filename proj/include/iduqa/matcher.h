#pragma once

// Whole-word, case-insensitive phrase matching over note text. Multi-word
// phrases tolerate a single run of whitespace between words; word
// boundaries are enforced only where a phrase edge is a word character, so
// "idu" never fires inside "residual" while "e.g." still matches its dot.

#include "iduqa/lexicon.h"

#include <cstddef>
#include <string>
#include <vector>

namespace iduqa {

enum class PhraseClass {
    negation,            // NP
    substance,           // SP
    temporal,            // TemP
    additional_temporal, // ATP
    trackmark,           // TMP
};

const char* phrase_class_name(PhraseClass cls);
PhraseClass parse_phrase_class(const std::string& name);

struct PhraseHit {
    size_t start = 0; // character offsets, [start, end)
    size_t end = 0;
    std::string phrase;

    bool operator==(const PhraseHit&) const = default;
};

struct Match {
    size_t start = 0;
    size_t end = 0;
    std::string phrase;
    PhraseClass phrase_class = PhraseClass::negation;

    bool operator==(const Match&) const = default;
};

struct KeywordHit {
    size_t start = 0;
    size_t end = 0;
    std::string phrase;
    std::string keyword_group_id;

    bool operator==(const KeywordHit&) const = default;
};

class MatcherSet {
public:
    static MatcherSet compile(const Lexicon& lexicon);

    /// All keyword occurrences, sorted by (start, end, group, phrase).
    std::vector<KeywordHit> keyword_hits(const std::string& text) const;

    /// All occurrences of one phrase-book class, sorted by (start, end, phrase).
    std::vector<Match> class_hits(const std::string& text, PhraseClass cls) const;

    /// All occurrences of one mapping rule's trigger phrases.
    std::vector<PhraseHit> rule_trigger_hits(const std::string& text, size_t rule_index) const;

    bool has_keyword(const std::string& text) const;

    size_t rule_count() const { return rule_triggers_.size(); }

private:
    struct CompiledPhrase {
        std::string phrase;
        std::vector<std::string> words;
    };

    static CompiledPhrase compile_phrase(const std::string& phrase);

    std::vector<std::pair<std::string, std::vector<CompiledPhrase>>> keyword_groups_;
    std::vector<std::vector<CompiledPhrase>> classes_; // indexed by PhraseClass
    std::vector<std::vector<CompiledPhrase>> rule_triggers_;
};

inline MatcherSet compile_matchers(const Lexicon& lexicon) {
    return MatcherSet::compile(lexicon);
}

} // namespace iduqa
