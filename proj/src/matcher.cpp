#include "iduqa/matcher.h"

#include "iduqa/text.h"

#include <algorithm>

namespace iduqa {

namespace {

constexpr size_t class_count = 5;

// Emits every occurrence of the phrase in the lowercased text as a
// [start, end) pair. Word boundaries apply at the phrase edges when those
// edges are word characters; interior gaps accept any whitespace run.
template <typename Emit>
void find_occurrences(const std::string& lower, const std::vector<std::string>& words,
                      Emit&& emit) {
    const auto& first = words.front();
    size_t from = 0;
    while (true) {
        size_t start = lower.find(first, from);
        if (start == std::string::npos) {
            return;
        }
        from = start + 1;
        if (is_word_char(first.front()) && start > 0 && is_word_char(lower[start - 1])) {
            continue;
        }
        size_t pos = start + first.size();
        bool ok = true;
        for (size_t w = 1; w < words.size(); ++w) {
            if (pos >= lower.size() || !is_space_char(lower[pos])) {
                ok = false;
                break;
            }
            while (pos < lower.size() && is_space_char(lower[pos])) {
                ++pos;
            }
            if (lower.compare(pos, words[w].size(), words[w]) != 0) {
                ok = false;
                break;
            }
            pos += words[w].size();
        }
        if (!ok) {
            continue;
        }
        if (is_word_char(words.back().back()) && pos < lower.size() && is_word_char(lower[pos])) {
            continue;
        }
        emit(start, pos);
    }
}

} // namespace

const char* phrase_class_name(PhraseClass cls) {
    switch (cls) {
    case PhraseClass::negation:
        return "NP";
    case PhraseClass::substance:
        return "SP";
    case PhraseClass::temporal:
        return "TemP";
    case PhraseClass::additional_temporal:
        return "ATP";
    case PhraseClass::trackmark:
        return "TMP";
    }
    throw Error("unknown phrase class");
}

PhraseClass parse_phrase_class(const std::string& name) {
    if (name == "NP") {
        return PhraseClass::negation;
    }
    if (name == "SP") {
        return PhraseClass::substance;
    }
    if (name == "TemP") {
        return PhraseClass::temporal;
    }
    if (name == "ATP") {
        return PhraseClass::additional_temporal;
    }
    if (name == "TMP") {
        return PhraseClass::trackmark;
    }
    throw Error("unknown phrase class '" + name + "'");
}

MatcherSet::CompiledPhrase MatcherSet::compile_phrase(const std::string& phrase) {
    CompiledPhrase compiled;
    compiled.phrase = phrase;
    for (auto word : split_words(phrase)) {
        compiled.words.emplace_back(word);
    }
    if (compiled.words.empty()) {
        throw Error("cannot compile matcher for blank phrase '" + phrase + "'");
    }
    return compiled;
}

MatcherSet MatcherSet::compile(const Lexicon& lexicon) {
    MatcherSet set;
    for (const auto& group : lexicon.keyword_groups) {
        std::vector<CompiledPhrase> compiled;
        compiled.reserve(group.phrases.size());
        for (const auto& phrase : group.phrases) {
            compiled.push_back(compile_phrase(phrase));
        }
        set.keyword_groups_.emplace_back(group.id, std::move(compiled));
    }

    set.classes_.resize(class_count);
    auto compile_class = [&](PhraseClass cls, const std::vector<std::string>& phrases) {
        auto& dst = set.classes_[static_cast<size_t>(cls)];
        for (const auto& phrase : phrases) {
            dst.push_back(compile_phrase(phrase));
        }
    };
    compile_class(PhraseClass::negation, lexicon.phrase_book.negation_phrases);
    compile_class(PhraseClass::substance, lexicon.phrase_book.substance_phrases);
    compile_class(PhraseClass::temporal, lexicon.phrase_book.temporal_phrases);
    compile_class(PhraseClass::additional_temporal,
                  lexicon.phrase_book.additional_temporal_phrases);
    compile_class(PhraseClass::trackmark, lexicon.phrase_book.trackmark_phrases);

    for (const auto& rule : lexicon.mapping_rules) {
        std::vector<CompiledPhrase> compiled;
        compiled.reserve(rule.trigger_phrases.size());
        for (const auto& phrase : rule.trigger_phrases) {
            compiled.push_back(compile_phrase(phrase));
        }
        set.rule_triggers_.push_back(std::move(compiled));
    }
    return set;
}

std::vector<KeywordHit> MatcherSet::keyword_hits(const std::string& text) const {
    auto lower = to_lower(text);
    std::vector<KeywordHit> hits;
    for (const auto& [group_id, phrases] : keyword_groups_) {
        for (const auto& compiled : phrases) {
            find_occurrences(lower, compiled.words, [&](size_t start, size_t end) {
                hits.push_back({start, end, compiled.phrase, group_id});
            });
        }
    }
    std::sort(hits.begin(), hits.end(), [](const KeywordHit& a, const KeywordHit& b) {
        return std::tie(a.start, a.end, a.keyword_group_id, a.phrase) <
               std::tie(b.start, b.end, b.keyword_group_id, b.phrase);
    });
    return hits;
}

std::vector<Match> MatcherSet::class_hits(const std::string& text, PhraseClass cls) const {
    auto lower = to_lower(text);
    std::vector<Match> hits;
    for (const auto& compiled : classes_[static_cast<size_t>(cls)]) {
        find_occurrences(lower, compiled.words, [&](size_t start, size_t end) {
            hits.push_back({start, end, compiled.phrase, cls});
        });
    }
    std::sort(hits.begin(), hits.end(), [](const Match& a, const Match& b) {
        return std::tie(a.start, a.end, a.phrase) < std::tie(b.start, b.end, b.phrase);
    });
    return hits;
}

std::vector<PhraseHit> MatcherSet::rule_trigger_hits(const std::string& text,
                                                     size_t rule_index) const {
    if (rule_index >= rule_triggers_.size()) {
        throw Error("mapping rule index " + std::to_string(rule_index) + " out of range");
    }
    auto lower = to_lower(text);
    std::vector<PhraseHit> hits;
    for (const auto& compiled : rule_triggers_[rule_index]) {
        find_occurrences(lower, compiled.words, [&](size_t start, size_t end) {
            hits.push_back({start, end, compiled.phrase});
        });
    }
    std::sort(hits.begin(), hits.end(), [](const PhraseHit& a, const PhraseHit& b) {
        return std::tie(a.start, a.end, a.phrase) < std::tie(b.start, b.end, b.phrase);
    });
    return hits;
}

bool MatcherSet::has_keyword(const std::string& text) const {
    auto lower = to_lower(text);
    for (const auto& [group_id, phrases] : keyword_groups_) {
        for (const auto& compiled : phrases) {
            bool found = false;
            find_occurrences(lower, compiled.words, [&](size_t, size_t) { found = true; });
            if (found) {
                return true;
            }
        }
    }
    return false;
}

} // namespace iduqa
