#include "iduqa/extract.h"

#include "iduqa/text.h"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

namespace iduqa {

using nlohmann::json;

namespace {

bool is_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

bool is_trailing_answer_punct(char c) {
    return c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':';
}

// The token that ends at `run_end` (exclusive), lowercased, with leading
// non-alphanumerics stripped so "(e.g." still reads as "e.g.".
std::string token_before(const std::string& text, size_t run_start, size_t run_end) {
    size_t t = run_start;
    while (t > 0 && !is_space_char(text[t - 1])) {
        --t;
    }
    auto token = to_lower(text.substr(t, run_end - t));
    size_t lead = 0;
    while (lead < token.size() && !std::isalnum(static_cast<unsigned char>(token[lead]))) {
        ++lead;
    }
    return token.substr(lead);
}

bool hit_inside(const KeywordHit& hit, const Sentence& sentence) {
    return hit.start >= sentence.start && hit.end <= sentence.end;
}

} // namespace

const std::vector<std::string>& default_protected_abbreviations() {
    static const std::vector<std::string> abbreviations = {
        "h/o", "pt.", "y/o", "hx.", "vs.", "dr.", "mr.", "ms.",
        "e.g.", "i.e.", "b.i.d.", "q.d.",
    };
    return abbreviations;
}

std::vector<Sentence> sentencize(const std::string& cleaned_text,
                                 const std::vector<std::string>& protected_abbreviations) {
    std::set<std::string> protected_set;
    for (const auto& abbr : protected_abbreviations) {
        protected_set.insert(to_lower(abbr));
    }

    std::vector<Sentence> sentences;
    auto flush = [&](size_t from, size_t to) {
        while (from < to && is_space_char(cleaned_text[from])) {
            ++from;
        }
        while (to > from && is_space_char(cleaned_text[to - 1])) {
            --to;
        }
        if (from < to) {
            sentences.push_back({from, to, cleaned_text.substr(from, to - from)});
        }
    };

    size_t start = 0;
    size_t i = 0;
    while (i < cleaned_text.size()) {
        char c = cleaned_text[i];
        if (c == '\n') {
            flush(start, i);
            start = i + 1;
            ++i;
            continue;
        }
        if (is_terminator(c)) {
            size_t j = i;
            while (j < cleaned_text.size() && is_terminator(cleaned_text[j])) {
                ++j;
            }
            bool at_break = j == cleaned_text.size() || is_space_char(cleaned_text[j]);
            if (at_break && !protected_set.count(token_before(cleaned_text, i, j))) {
                flush(start, j);
                start = j;
            }
            i = j;
            continue;
        }
        ++i;
    }
    flush(start, cleaned_text.size());
    return sentences;
}

std::vector<std::pair<Sentence, std::vector<KeywordHit>>>
find_keyword_sentences(const std::vector<Sentence>& sentences, const MatcherSet& matchers) {
    std::vector<std::pair<Sentence, std::vector<KeywordHit>>> out;
    for (const auto& sentence : sentences) {
        auto hits = matchers.keyword_hits(sentence.text);
        if (hits.empty()) {
            continue;
        }
        for (auto& hit : hits) {
            hit.start += sentence.start;
            hit.end += sentence.start;
        }
        out.emplace_back(sentence, std::move(hits));
    }
    return out;
}

AnswerSpan parse_answer(const Sentence& sentence, const std::vector<KeywordHit>& hits,
                        const MatcherSet& matchers) {
    if (hits.empty()) {
        throw Error("parse_answer requires at least one keyword hit");
    }
    for (const auto& hit : hits) {
        if (!hit_inside(hit, sentence)) {
            throw Error("keyword hit [" + std::to_string(hit.start) + ", " +
                        std::to_string(hit.end) + ") lies outside its sentence");
        }
    }

    size_t leftmost = sentence.end;
    size_t rightmost = sentence.start;
    bool trackmark_keyword = false;
    for (const auto& hit : hits) {
        leftmost = std::min(leftmost, hit.start);
        rightmost = std::max(rightmost, hit.end);
        if (hit.phrase == "track marks") {
            trackmark_keyword = true;
        }
    }
    // Work sentence-relative from here on.
    size_t left_limit = leftmost - sentence.start;
    size_t right_limit = rightmost - sentence.start;

    // Left boundary: the winning trigger class by precedence, then the
    // trigger nearest to the keyword (max start; ties take the longer).
    auto pick = [&](const std::vector<Match>& candidates) -> std::optional<Match> {
        std::optional<Match> best;
        for (const auto& m : candidates) {
            if (m.end > left_limit) {
                continue; // must sit fully before the leftmost keyword
            }
            if (!best || m.start > best->start ||
                (m.start == best->start && m.end > best->end)) {
                best = m;
            }
        }
        return best;
    };

    std::optional<Match> trigger = pick(matchers.class_hits(sentence.text, PhraseClass::negation));
    if (!trigger) {
        trigger = pick(matchers.class_hits(sentence.text, PhraseClass::substance));
    }
    if (!trigger) {
        auto pool = matchers.class_hits(sentence.text, PhraseClass::temporal);
        if (trackmark_keyword) {
            auto extra = matchers.class_hits(sentence.text, PhraseClass::trackmark);
            pool.insert(pool.end(), extra.begin(), extra.end());
        }
        trigger = pick(pool);
    }

    size_t span_start = trigger ? trigger->start : 0;

    // Right boundary: first additional-temporal match after the last
    // keyword, else the sentence end.
    size_t span_end = sentence.text.size();
    for (const auto& m : matchers.class_hits(sentence.text, PhraseClass::additional_temporal)) {
        if (m.start >= right_limit) {
            span_end = m.end;
            break;
        }
    }

    while (span_end > span_start && (is_space_char(sentence.text[span_end - 1]) ||
                                     is_trailing_answer_punct(sentence.text[span_end - 1]))) {
        --span_end;
    }

    AnswerSpan span;
    span.start = sentence.start + span_start;
    span.end = sentence.start + span_end;
    if (trigger) {
        span.trigger = AnswerTrigger{trigger->phrase, trigger->phrase_class};
    }
    return span;
}

std::vector<std::string> map_query_groups(const std::string& answer_text, const Lexicon& lexicon,
                                          const MatcherSet& matchers) {
    std::vector<std::string> groups;
    std::set<std::string> seen;
    for (size_t i = 0; i < lexicon.mapping_rules.size(); ++i) {
        const auto& rule = lexicon.mapping_rules[i];
        if (rule.trigger_phrases.empty()) {
            continue;
        }
        if (!matchers.rule_trigger_hits(answer_text, i).empty() &&
            seen.insert(rule.query_group_id).second) {
            groups.push_back(rule.query_group_id);
        }
    }
    if (groups.empty()) {
        groups.push_back(lexicon.default_rule().query_group_id);
    }
    return groups;
}

std::vector<AnnotatedAnswer>
extract_note(const Note& note, const Lexicon& lexicon, const MatcherSet& matchers,
             const std::vector<std::string>& protected_abbreviations) {
    auto sentences = sentencize(note.cleaned_text, protected_abbreviations);
    auto keyword_sentences = find_keyword_sentences(sentences, matchers);

    // Map each kept sentence back to its index in the full sentence list.
    std::map<size_t, size_t> index_by_start;
    for (size_t i = 0; i < sentences.size(); ++i) {
        index_by_start[sentences[i].start] = i;
    }

    std::vector<AnnotatedAnswer> answers;
    for (const auto& [sentence, hits] : keyword_sentences) {
        auto span = parse_answer(sentence, hits, matchers);
        AnnotatedAnswer answer;
        answer.start = span.start;
        answer.end = span.end;
        answer.text = note.cleaned_text.substr(span.start, span.end - span.start);
        answer.sentence_index = index_by_start.at(sentence.start);
        answer.trigger = span.trigger;
        answer.keyword_hits = hits;
        answer.query_group_ids = map_query_groups(answer.text, lexicon, matchers);
        answers.push_back(std::move(answer));
    }
    return answers;
}

Classification classify_question(const std::string& question, const QuestionBank& bank,
                                 const Lexicon& lexicon) {
    if (trim(question).empty()) {
        throw Error("classify_question requires a non-empty question");
    }
    if (auto group = bank.lookup(question)) {
        return {ClassifyMethod::exact, *group, 1.0};
    }

    // Bag-of-words fallback: count distinct informative question words
    // that appear in a group's expanded questions or mapping triggers.
    static const std::set<std::string> stopwords = {
        "a",    "an",   "the",  "is",   "are",  "was",   "were", "has",  "have",
        "had",  "does", "do",   "did",  "what", "when",  "which", "who", "how",
        "why",  "of",   "to",   "on",   "in",   "for",   "with", "about", "any",
        "ever", "been", "be",   "patient", "pt",
    };

    auto word_tokens = [](const std::string& text) {
        std::set<std::string> tokens;
        std::string current;
        for (char c : to_lower(text)) {
            if (is_word_char(c)) {
                current += c;
            } else if (!current.empty()) {
                tokens.insert(current);
                current.clear();
            }
        }
        if (!current.empty()) {
            tokens.insert(current);
        }
        return tokens;
    };

    std::set<std::string> question_words;
    for (const auto& word : word_tokens(question)) {
        if (!stopwords.count(word)) {
            question_words.insert(word);
        }
    }

    Classification best; // method none, score 0
    for (const auto& group : lexicon.query_groups) {
        std::set<std::string> vocabulary;
        for (const auto& q : bank.questions_for(group.id)) {
            auto tokens = word_tokens(q);
            vocabulary.insert(tokens.begin(), tokens.end());
        }
        for (const auto& rule : lexicon.mapping_rules) {
            if (rule.query_group_id != group.id) {
                continue;
            }
            for (const auto& phrase : rule.trigger_phrases) {
                auto tokens = word_tokens(phrase);
                vocabulary.insert(tokens.begin(), tokens.end());
            }
        }
        double score = 0.0;
        for (const auto& word : question_words) {
            if (vocabulary.count(word)) {
                score += 1.0;
            }
        }
        if (score > best.score) { // strict: ties keep the earlier group
            best = {ClassifyMethod::fuzzy, group.id, score};
        }
    }
    return best;
}

QueryResult answer_question(const Note& note, const std::string& question, const Lexicon& lexicon,
                            const MatcherSet& matchers, const QuestionBank& bank,
                            const std::vector<std::string>& protected_abbreviations) {
    QueryResult result;
    result.classification = classify_question(question, bank, lexicon);
    if (result.classification.method == ClassifyMethod::none) {
        return result;
    }
    for (auto& answer : extract_note(note, lexicon, matchers, protected_abbreviations)) {
        if (std::find(answer.query_group_ids.begin(), answer.query_group_ids.end(),
                      result.classification.group_id) != answer.query_group_ids.end()) {
            result.answers.push_back(std::move(answer));
        }
    }
    return result;
}

std::string annotations_to_json(const std::vector<NoteAnnotations>& annotations) {
    json doc;
    doc["version"] = dataset_file_version;
    doc["annotations"] = json::array();
    for (const auto& note : annotations) {
        json answers = json::array();
        for (const auto& answer : note.answers) {
            json hits = json::array();
            for (const auto& hit : answer.keyword_hits) {
                hits.push_back({{"start", hit.start},
                                {"end", hit.end},
                                {"phrase", hit.phrase},
                                {"keyword_group_id", hit.keyword_group_id}});
            }
            json record{{"start", answer.start},
                        {"end", answer.end},
                        {"text", answer.text},
                        {"sentence_index", answer.sentence_index},
                        {"keyword_hits", std::move(hits)},
                        {"query_group_ids", answer.query_group_ids}};
            if (answer.trigger) {
                record["trigger"] = {{"phrase", answer.trigger->phrase},
                                     {"class", phrase_class_name(answer.trigger->phrase_class)}};
            } else {
                record["trigger"] = nullptr;
            }
            answers.push_back(std::move(record));
        }
        doc["annotations"].push_back({{"note_id", note.note_id}, {"answers", std::move(answers)}});
    }
    return doc.dump(2) + "\n";
}

void save_annotations(const std::vector<NoteAnnotations>& annotations,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write annotations file '" + path.string() + "'");
    }
    out << annotations_to_json(annotations);
}

} // namespace iduqa
