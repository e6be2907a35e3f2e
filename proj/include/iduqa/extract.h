#pragma once

// The annotation core: sentence splitting, keyword-sentence selection,
// answer-span shrinking via co-occurring trigger phrases, query-group
// mapping, and deterministic single-note question answering.

#include "iduqa/corpus.h"
#include "iduqa/matcher.h"
#include "iduqa/question_bank.h"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iduqa {

struct Sentence {
    size_t start = 0; // offsets into cleaned_text, [start, end)
    size_t end = 0;
    std::string text;

    bool operator==(const Sentence&) const = default;
};

struct AnswerTrigger {
    std::string phrase;
    PhraseClass phrase_class = PhraseClass::negation;

    bool operator==(const AnswerTrigger&) const = default;
};

struct AnswerSpan {
    size_t start = 0; // note-relative character offsets, [start, end)
    size_t end = 0;
    std::optional<AnswerTrigger> trigger;

    bool operator==(const AnswerSpan&) const = default;
};

struct AnnotatedAnswer {
    size_t start = 0;
    size_t end = 0;
    std::string text;
    size_t sentence_index = 0;
    std::optional<AnswerTrigger> trigger;
    std::vector<KeywordHit> keyword_hits; // note-relative
    std::vector<std::string> query_group_ids;

    bool operator==(const AnnotatedAnswer&) const = default;
};

struct NoteAnnotations {
    std::string note_id;
    std::vector<AnnotatedAnswer> answers;

    bool operator==(const NoteAnnotations&) const = default;
};

/// Abbreviations that never terminate a sentence despite their periods.
const std::vector<std::string>& default_protected_abbreviations();

/// Splits cleaned text into trimmed sentences. Boundaries fall at
/// newlines (excluded from the sentence) and after runs of . ! ?
/// followed by whitespace, unless the token ending in the run is a
/// protected abbreviation.
std::vector<Sentence>
sentencize(const std::string& cleaned_text,
           const std::vector<std::string>& protected_abbreviations =
               default_protected_abbreviations());

/// Keeps only sentences with at least one keyword hit; hits are reported
/// note-relative, in positional order.
std::vector<std::pair<Sentence, std::vector<KeywordHit>>>
find_keyword_sentences(const std::vector<Sentence>& sentences, const MatcherSet& matchers);

/// Shrinks one keyword sentence to an answer span. Left boundary: the
/// trigger nearest before the leftmost hit, classes competing as
/// negation > substance > temporal (trackmark phrases join the temporal
/// tier when the sentence's keyword is "track marks"); no trigger means
/// the sentence start. Right boundary: the end of the first
/// additional-temporal match after the rightmost hit, else sentence end.
/// Trailing sentence punctuation is excluded.
AnswerSpan parse_answer(const Sentence& sentence, const std::vector<KeywordHit>& hits,
                        const MatcherSet& matchers);

/// Every query group whose mapping-rule triggers hit the answer text, in
/// lexicon rule order; falls back to the default rule's group.
std::vector<std::string> map_query_groups(const std::string& answer_text, const Lexicon& lexicon,
                                          const MatcherSet& matchers);

/// One fully populated answer per keyword-bearing sentence, in document order.
std::vector<AnnotatedAnswer>
extract_note(const Note& note, const Lexicon& lexicon, const MatcherSet& matchers,
             const std::vector<std::string>& protected_abbreviations =
                 default_protected_abbreviations());

enum class ClassifyMethod { exact, fuzzy, none };

struct Classification {
    ClassifyMethod method = ClassifyMethod::none;
    std::string group_id; // empty when method == none
    double score = 0.0;   // fallback overlap score (exact matches score 1)

    bool operator==(const Classification&) const = default;
};

/// Exact normalized lookup in the bank, then a bag-of-words fallback
/// against each group's question vocabulary and mapping triggers.
Classification classify_question(const std::string& question, const QuestionBank& bank,
                                 const Lexicon& lexicon);

struct QueryResult {
    Classification classification;
    std::vector<AnnotatedAnswer> answers;
};

/// Classifies the question, extracts the note, and returns the answers
/// whose groups include the classified group. Unclassifiable questions
/// yield an empty result carrying the no-match classification.
QueryResult answer_question(const Note& note, const std::string& question, const Lexicon& lexicon,
                            const MatcherSet& matchers, const QuestionBank& bank,
                            const std::vector<std::string>& protected_abbreviations =
                                default_protected_abbreviations());

std::string annotations_to_json(const std::vector<NoteAnnotations>& annotations);
void save_annotations(const std::vector<NoteAnnotations>& annotations,
                      const std::filesystem::path& path);

} // namespace iduqa
