#pragma once

// QA dataset assembly: pairing annotated answers with question variants,
// adding no-answer samples for keyword-free notes, patient-level
// splitting, serialization with full validation, and group histograms.

#include "iduqa/extract.h"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace iduqa {

struct QAAnswer {
    std::string text;
    size_t answer_start = 0; // char offset into the cleaned context

    bool operator==(const QAAnswer&) const = default;
};

struct QASample {
    std::string id;
    std::string note_id;
    std::string question;
    std::string query_group_id;
    std::vector<QAAnswer> answers; // empty iff is_impossible
    bool is_impossible = false;

    bool operator==(const QASample&) const = default;
};

struct DatasetNote {
    std::string note_id;
    std::string patient_id;
    std::string context; // cleaned text

    bool operator==(const DatasetNote&) const = default;
};

struct Dataset {
    std::string version;
    std::vector<DatasetNote> notes;
    std::vector<QASample> samples;

    bool operator==(const Dataset&) const = default;
};

struct Split {
    Dataset train;
    Dataset dev;
    Dataset test;
    uint64_t seed = 0;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

struct Pairing {
    enum class Mode { all_variants, sample_k };
    Mode mode = Mode::all_variants;
    size_t k = 0;      // variants kept per (answer, group) in sample_k mode
    uint64_t seed = 0; // sample_k only

    static Pairing all_variants() { return {}; }
    static Pairing sample_k(size_t k, uint64_t seed) {
        return {Mode::sample_k, k, seed};
    }
};

/// One answerable sample per (answer, mapped group, selected variant).
/// Ids are deterministic composites of note id, answer index, group, and
/// variant index. Answers whose offsets do not slice back to their text
/// are a hard error.
std::vector<QASample> assemble_samples(const Note& note,
                                       const std::vector<AnnotatedAnswer>& answers,
                                       const QuestionBank& bank, const Pairing& pairing);

/// One impossible sample per question variant of the default (existence)
/// group. Errors if the note has any keyword hit.
std::vector<QASample> make_no_answer_samples(const Note& note, const Lexicon& lexicon,
                                             const MatcherSet& matchers, const QuestionBank& bank);

/// Runs extraction + pairing over a cleaned corpus; notes without keyword
/// hits contribute no-answer samples when include_no_answer is set. Only
/// notes that produced at least one sample appear in the dataset.
Dataset assemble_dataset(const std::vector<Note>& notes, const Lexicon& lexicon,
                         const MatcherSet& matchers, const QuestionBank& bank,
                         const Pairing& pairing, bool include_no_answer = true);

/// Shuffles patients with the seeded generator and partitions them by
/// cumulative ratio, clamped so every part gets at least one patient.
/// Notes and samples follow their patient. Fewer than 3 patients: error.
Split split_by_patient(const Dataset& dataset, const std::array<double, 3>& ratios,
                       uint64_t seed);

void validate_dataset(const Dataset& dataset);

std::string dataset_to_json(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(const std::string& json_text, const std::string& origin = "<string>");

/// Sample counts per query group; counts sum to |samples|.
std::map<std::string, size_t> group_histogram(const Dataset& dataset);

} // namespace iduqa
