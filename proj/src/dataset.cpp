#include "iduqa/dataset.h"

#include "iduqa/rng.h"
#include "iduqa/stats.h"
#include "iduqa/text.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace iduqa {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<size_t> select_variants(size_t variant_count, const Pairing& pairing,
                                    const std::string& note_id, size_t answer_index,
                                    const std::string& group_id) {
    if (pairing.mode == Pairing::Mode::all_variants || pairing.k >= variant_count) {
        std::vector<size_t> all(variant_count);
        for (size_t i = 0; i < variant_count; ++i) {
            all[i] = i;
        }
        return all;
    }
    if (pairing.k == 0) {
        throw Error("sample_k pairing requires k >= 1");
    }
    // Each (note, answer, group) gets its own stream so one selection
    // never shifts another, regardless of processing order.
    auto key = note_id + "|" + std::to_string(answer_index) + "|" + group_id;
    std::mt19937_64 gen(pairing.seed ^ fnv1a(key));
    return sample_indices(variant_count, pairing.k, gen);
}

} // namespace

std::vector<QASample> assemble_samples(const Note& note,
                                       const std::vector<AnnotatedAnswer>& answers,
                                       const QuestionBank& bank, const Pairing& pairing) {
    std::vector<QASample> samples;
    for (size_t a = 0; a < answers.size(); ++a) {
        const auto& answer = answers[a];
        if (answer.end > note.cleaned_text.size() || answer.start >= answer.end ||
            note.cleaned_text.substr(answer.start, answer.end - answer.start) != answer.text) {
            throw Error("note '" + note.note_id + "' answer " + std::to_string(a) +
                        ": offsets do not reproduce the answer text (corrupt annotation)");
        }
        for (const auto& group_id : answer.query_group_ids) {
            const auto& variants = bank.questions_for(group_id);
            for (size_t v : select_variants(variants.size(), pairing, note.note_id, a, group_id)) {
                QASample sample;
                sample.id = note.note_id + "-a" + std::to_string(a) + "-" + group_id + "-q" +
                            std::to_string(v);
                sample.note_id = note.note_id;
                sample.question = variants[v];
                sample.query_group_id = group_id;
                sample.answers.push_back({answer.text, answer.start});
                sample.is_impossible = false;
                samples.push_back(std::move(sample));
            }
        }
    }
    return samples;
}

std::vector<QASample> make_no_answer_samples(const Note& note, const Lexicon& lexicon,
                                             const MatcherSet& matchers,
                                             const QuestionBank& bank) {
    if (matchers.has_keyword(note.cleaned_text)) {
        throw Error("note '" + note.note_id +
                    "' contains keywords; no-answer samples are only for keyword-free notes");
    }
    auto group_id = lexicon.default_rule().query_group_id;
    const auto& variants = bank.questions_for(group_id);

    std::vector<QASample> samples;
    for (size_t v = 0; v < variants.size(); ++v) {
        QASample sample;
        sample.id = note.note_id + "-na-" + group_id + "-q" + std::to_string(v);
        sample.note_id = note.note_id;
        sample.question = variants[v];
        sample.query_group_id = group_id;
        sample.is_impossible = true;
        samples.push_back(std::move(sample));
    }
    return samples;
}

Dataset assemble_dataset(const std::vector<Note>& notes, const Lexicon& lexicon,
                         const MatcherSet& matchers, const QuestionBank& bank,
                         const Pairing& pairing, bool include_no_answer) {
    Dataset dataset;
    dataset.version = dataset_file_version;
    for (const auto& note : notes) {
        std::vector<QASample> samples;
        if (matchers.has_keyword(note.cleaned_text)) {
            auto answers = extract_note(note, lexicon, matchers);
            samples = assemble_samples(note, answers, bank, pairing);
        } else if (include_no_answer) {
            samples = make_no_answer_samples(note, lexicon, matchers, bank);
        }
        if (samples.empty()) {
            continue;
        }
        dataset.notes.push_back({note.note_id, note.patient_id, note.cleaned_text});
        dataset.samples.insert(dataset.samples.end(),
                               std::make_move_iterator(samples.begin()),
                               std::make_move_iterator(samples.end()));
    }
    validate_dataset(dataset);
    return dataset;
}

Split split_by_patient(const Dataset& dataset, const std::array<double, 3>& ratios,
                       uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (ratios[0] <= 0 || ratios[1] <= 0 || ratios[2] <= 0 || std::abs(sum - 1.0) > 1e-9) {
        throw Error("split ratios must be positive and sum to 1");
    }

    std::set<std::string> patient_set;
    for (const auto& note : dataset.notes) {
        patient_set.insert(note.patient_id);
    }
    if (patient_set.size() < 3) {
        throw Error("patient-level split needs at least 3 patients, found " +
                    std::to_string(patient_set.size()));
    }

    std::vector<std::string> patients(patient_set.begin(), patient_set.end());
    std::mt19937_64 gen(seed);
    shuffle_deterministic(patients, gen);

    size_t n = patients.size();
    auto round_count = [&](double ratio) {
        return static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
    };
    size_t cut1 = std::clamp<size_t>(round_count(ratios[0]), 1, n - 2);
    size_t cut2 = std::clamp<size_t>(round_count(ratios[0] + ratios[1]), cut1 + 1, n - 1);

    std::array<std::set<std::string>, 3> parts;
    for (size_t i = 0; i < n; ++i) {
        size_t part = i < cut1 ? 0 : (i < cut2 ? 1 : 2);
        parts[part].insert(patients[i]);
    }

    auto project = [&](const std::set<std::string>& part_patients) {
        Dataset part;
        part.version = dataset.version;
        std::set<std::string> note_ids;
        for (const auto& note : dataset.notes) {
            if (part_patients.count(note.patient_id)) {
                part.notes.push_back(note);
                note_ids.insert(note.note_id);
            }
        }
        for (const auto& sample : dataset.samples) {
            if (note_ids.count(sample.note_id)) {
                part.samples.push_back(sample);
            }
        }
        return part;
    };

    Split split;
    split.train = project(parts[0]);
    split.dev = project(parts[1]);
    split.test = project(parts[2]);
    split.seed = seed;
    split.ratios = ratios;
    return split;
}

void validate_dataset(const Dataset& dataset) {
    if (trim(dataset.version).empty()) {
        throw Error("dataset version missing");
    }
    std::map<std::string, const DatasetNote*> notes_by_id;
    for (const auto& note : dataset.notes) {
        if (!notes_by_id.emplace(note.note_id, &note).second) {
            throw Error("duplicate note_id '" + note.note_id + "' in dataset");
        }
    }
    std::set<std::string> sample_ids;
    for (const auto& sample : dataset.samples) {
        if (!sample_ids.insert(sample.id).second) {
            throw Error("sample '" + sample.id + "': duplicate id");
        }
        auto it = notes_by_id.find(sample.note_id);
        if (it == notes_by_id.end()) {
            throw Error("sample '" + sample.id + "': unknown note_id '" + sample.note_id + "'");
        }
        if (sample.is_impossible) {
            if (!sample.answers.empty()) {
                throw Error("sample '" + sample.id + "': impossible sample has answers");
            }
            continue;
        }
        if (sample.answers.empty()) {
            throw Error("sample '" + sample.id + "': answerable sample has no answers");
        }
        const auto& context = it->second->context;
        for (const auto& answer : sample.answers) {
            if (answer.answer_start + answer.text.size() > context.size() ||
                context.substr(answer.answer_start, answer.text.size()) != answer.text) {
                throw Error("sample '" + sample.id +
                            "': answer_start does not slice to the answer text");
            }
        }
    }
}

std::string dataset_to_json(const Dataset& dataset) {
    // Samples are grouped under their note, in original order.
    std::map<std::string, std::vector<const QASample*>> by_note;
    for (const auto& sample : dataset.samples) {
        by_note[sample.note_id].push_back(&sample);
    }

    json data = json::array();
    for (const auto& note : dataset.notes) {
        json qas = json::array();
        auto it = by_note.find(note.note_id);
        if (it != by_note.end()) {
            for (const QASample* sample : it->second) {
                json answers = json::array();
                for (const auto& answer : sample->answers) {
                    answers.push_back({{"text", answer.text},
                                       {"answer_start", answer.answer_start}});
                }
                qas.push_back({{"id", sample->id},
                               {"question", sample->question},
                               {"query_group", sample->query_group_id},
                               {"answers", std::move(answers)},
                               {"is_impossible", sample->is_impossible}});
            }
        }
        data.push_back({{"note_id", note.note_id},
                        {"patient_id", note.patient_id},
                        {"context", note.context},
                        {"qas", std::move(qas)}});
    }
    json doc{{"version", dataset.version}, {"data", std::move(data)}};
    return doc.dump(2) + "\n";
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    validate_dataset(dataset);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write dataset file '" + path.string() + "'");
    }
    out << dataset_to_json(dataset);
}

Dataset parse_dataset(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(origin + ": dataset parse failure: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string()) {
        throw Error(origin + ": dataset version missing");
    }
    if (!doc.contains("data") || !doc["data"].is_array()) {
        throw Error(origin + ": dataset 'data' array missing");
    }

    Dataset dataset;
    dataset.version = doc["version"].get<std::string>();
    for (size_t i = 0; i < doc["data"].size(); ++i) {
        const auto& n = doc["data"][i];
        auto where = origin + ": data[" + std::to_string(i) + "]";
        for (const char* key : {"note_id", "patient_id", "context"}) {
            if (!n.contains(key) || !n[key].is_string()) {
                throw Error(where + "." + key + ": missing or not a string");
            }
        }
        DatasetNote note{n["note_id"].get<std::string>(), n["patient_id"].get<std::string>(),
                         n["context"].get<std::string>()};
        if (!n.contains("qas") || !n["qas"].is_array()) {
            throw Error(where + ".qas: missing or not an array");
        }
        for (const auto& q : n["qas"]) {
            QASample sample;
            if (!q.contains("id") || !q["id"].is_string()) {
                throw Error(where + ": sample id missing");
            }
            sample.id = q["id"].get<std::string>();
            auto sample_where = origin + ": sample '" + sample.id + "'";
            if (!q.contains("question") || !q["question"].is_string()) {
                throw Error(sample_where + ": question missing");
            }
            sample.question = q["question"].get<std::string>();
            if (!q.contains("query_group") || !q["query_group"].is_string()) {
                throw Error(sample_where + ": query_group missing");
            }
            sample.query_group_id = q["query_group"].get<std::string>();
            sample.note_id = note.note_id;
            sample.is_impossible = q.value("is_impossible", false);
            if (q.contains("answers")) {
                if (!q["answers"].is_array()) {
                    throw Error(sample_where + ": answers is not an array");
                }
                for (const auto& a : q["answers"]) {
                    if (!a.contains("text") || !a["text"].is_string() ||
                        !a.contains("answer_start") || !a["answer_start"].is_number_unsigned()) {
                        throw Error(sample_where + ": malformed answer record");
                    }
                    sample.answers.push_back(
                        {a["text"].get<std::string>(), a["answer_start"].get<size_t>()});
                }
            }
            dataset.samples.push_back(std::move(sample));
        }
        dataset.notes.push_back(std::move(note));
    }
    validate_dataset(dataset);
    return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path), path.string());
}

std::map<std::string, size_t> group_histogram(const Dataset& dataset) {
    std::map<std::string, size_t> counts;
    for (const auto& sample : dataset.samples) {
        ++counts[sample.query_group_id];
    }
    return counts;
}

CorpusStats corpus_stats(const std::vector<Note>& notes, const Dataset& dataset) {
    auto stats = corpus_stats(notes);
    stats.includes_dataset = true;
    stats.sample_count = dataset.samples.size();
    if (!dataset.notes.empty()) {
        stats.qa_per_note_avg = round2(static_cast<double>(dataset.samples.size()) /
                                       static_cast<double>(dataset.notes.size()));
    }

    std::vector<size_t> question_lengths;
    std::vector<size_t> answer_lengths;
    for (const auto& sample : dataset.samples) {
        question_lengths.push_back(word_count(sample.question));
        if (!sample.is_impossible && !sample.answers.empty()) {
            answer_lengths.push_back(word_count(sample.answers.front().text));
        }
    }
    auto fill = [](const std::vector<size_t>& lengths, LengthStats& out) {
        if (lengths.empty()) {
            return;
        }
        std::vector<double> values(lengths.begin(), lengths.end());
        out.avg = round2(mean(values));
        out.median = round2(median(values));
        out.max = *std::max_element(lengths.begin(), lengths.end());
    };
    fill(question_lengths, stats.question_length_words);
    fill(answer_lengths, stats.answer_length_words);
    return stats;
}

} // namespace iduqa
