#pragma once

// Note ingestion and preparation: manifest loading, minimal text cleaning,
// keyword filtering, length-outlier removal, and corpus statistics.

#include "iduqa/matcher.h"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace iduqa {

struct Note {
    std::string note_id;
    std::string patient_id;
    std::string date; // ISO-8601 calendar date
    std::string raw_text;
    std::string cleaned_text; // empty until cleaned

    bool operator==(const Note&) const = default;
};

struct LengthStats {
    double avg = 0.0;
    double median = 0.0;
    size_t max = 0;

    bool operator==(const LengthStats&) const = default;
};

struct CorpusStats {
    size_t patient_count = 0;
    size_t note_count = 0;
    double notes_per_patient_avg = 0.0;
    size_t sample_count = 0;
    double qa_per_note_avg = 0.0;
    LengthStats note_length_words;
    LengthStats question_length_words;
    LengthStats answer_length_words;
    bool empty_corpus = false;    // warning flag: no notes were given
    bool includes_dataset = false;

    bool operator==(const CorpusStats&) const = default;
};

/// Minimal note cleanup: collapses newline runs, space/tab runs, and runs
/// of two or more periods/dashes/underscores (the latter become one
/// space), turns a newline that trails `, : ; ' "` into a space, and trims.
/// Idempotent.
std::string clean_note(const std::string& raw_text);

/// Word count of the cleaned text (whitespace-delimited tokens).
size_t note_word_count(const Note& note);

/// Reads a tab-delimited manifest with columns note_id, patient_id,
/// date, path-or-inline-text. A fourth column naming an existing file
/// (relative to the manifest) is read as the note body; otherwise the
/// column itself is the body with `\n`, `\t`, and `\\` escapes decoded.
std::vector<Note> load_manifest(const std::filesystem::path& path);

/// Returns the notes with cleaned_text filled in.
std::vector<Note> clean_notes(std::vector<Note> notes);

void save_corpus(const std::vector<Note>& notes, const std::filesystem::path& path);
std::vector<Note> load_corpus(const std::filesystem::path& path);

/// Partition into (kept, dropped): kept notes have at least one keyword
/// hit in their cleaned text. Input order is preserved on both sides.
std::pair<std::vector<Note>, std::vector<Note>>
filter_by_keywords(const std::vector<Note>& notes, const MatcherSet& matchers);

/// Drops notes whose cleaned word count exceeds Q3 + 1.5*IQR (upper fence
/// only; quartiles by linear interpolation). Fewer than 4 notes pass
/// through unchanged.
std::pair<std::vector<Note>, std::vector<Note>>
drop_length_outliers(const std::vector<Note>& notes);

struct Dataset; // dataset.h provides the dataset-aware overload

CorpusStats corpus_stats(const std::vector<Note>& notes);
CorpusStats corpus_stats(const std::vector<Note>& notes, const Dataset& dataset);

std::string corpus_stats_to_json(const CorpusStats& stats);

} // namespace iduqa
