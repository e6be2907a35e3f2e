#include "iduqa/corpus.h"

#include "iduqa/stats.h"
#include "iduqa/text.h"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace iduqa {

using nlohmann::json;

namespace {

bool is_collapsible_punct(char c) {
    return c == '.' || c == '-' || c == '_';
}

bool is_quote_or_clause_punct(char c) {
    return c == ',' || c == ':' || c == ';' || c == '\'' || c == '"';
}

void check_iso_date(const std::string& date, const std::string& where) {
    auto bad = [&] { throw Error(where + ": '" + date + "' is not an ISO-8601 date"); };
    if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
        bad();
    }
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (date[i] < '0' || date[i] > '9') {
            bad();
        }
    }
    int month = (date[5] - '0') * 10 + (date[6] - '0');
    int day = (date[8] - '0') * 10 + (date[9] - '0');
    if (month < 1 || month > 12 || day < 1 || day > 31) {
        bad();
    }
}

std::string decode_inline_text(const std::string& field, const std::string& where) {
    std::string out;
    out.reserve(field.size());
    for (size_t i = 0; i < field.size(); ++i) {
        if (field[i] != '\\') {
            out += field[i];
            continue;
        }
        if (i + 1 >= field.size()) {
            throw Error(where + ": dangling backslash in inline text");
        }
        ++i;
        switch (field[i]) {
        case 'n':
            out += '\n';
            break;
        case 't':
            out += '\t';
            break;
        case '\\':
            out += '\\';
            break;
        default:
            throw Error(where + ": unknown escape '\\" + std::string(1, field[i]) +
                        "' in inline text");
        }
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

LengthStats length_stats(const std::vector<size_t>& lengths) {
    LengthStats out;
    if (lengths.empty()) {
        return out;
    }
    std::vector<double> values(lengths.begin(), lengths.end());
    out.avg = round2(mean(values));
    out.median = round2(median(values));
    out.max = *std::max_element(lengths.begin(), lengths.end());
    return out;
}

json length_stats_to_json(const LengthStats& stats) {
    return {{"avg", stats.avg}, {"median", stats.median}, {"max", stats.max}};
}

} // namespace

std::string clean_note(const std::string& raw_text) {
    // Normalize line endings first so the newline rules see plain '\n'.
    std::string text;
    text.reserve(raw_text.size());
    for (size_t i = 0; i < raw_text.size(); ++i) {
        if (raw_text[i] == '\r') {
            if (i + 1 < raw_text.size() && raw_text[i + 1] == '\n') {
                continue;
            }
            text += '\n';
        } else {
            text += raw_text[i];
        }
    }

    // Pass 1: runs of >=2 periods/dashes/underscores (any mix) -> one space.
    std::string pass1;
    pass1.reserve(text.size());
    for (size_t i = 0; i < text.size();) {
        if (is_collapsible_punct(text[i])) {
            size_t j = i;
            while (j < text.size() && is_collapsible_punct(text[j])) {
                ++j;
            }
            if (j - i >= 2) {
                pass1 += ' ';
            } else {
                pass1 += text[i];
            }
            i = j;
        } else {
            pass1 += text[i];
            ++i;
        }
    }

    // Pass 2: runs of >=2 newlines -> one newline. Whitespace-only lines
    // inside the run collapse with it.
    std::string pass2;
    pass2.reserve(pass1.size());
    for (size_t i = 0; i < pass1.size();) {
        if (pass1[i] == '\n') {
            size_t j = i;
            size_t newlines = 0;
            while (j < pass1.size() && is_space_char(pass1[j])) {
                if (pass1[j] == '\n') {
                    ++newlines;
                }
                ++j;
            }
            if (newlines >= 2) {
                pass2 += '\n';
                i = j;
            } else {
                pass2 += pass1[i];
                ++i;
            }
        } else {
            pass2 += pass1[i];
            ++i;
        }
    }

    // Pass 3: a newline right after clause punctuation or a quote -> space.
    std::string pass3;
    pass3.reserve(pass2.size());
    for (size_t i = 0; i < pass2.size(); ++i) {
        if (pass2[i] == '\n' && !pass3.empty() && is_quote_or_clause_punct(pass3.back())) {
            pass3 += ' ';
        } else {
            pass3 += pass2[i];
        }
    }

    // Pass 4: runs of >=2 spaces/tabs -> one space.
    std::string pass4;
    pass4.reserve(pass3.size());
    for (size_t i = 0; i < pass3.size();) {
        if (pass3[i] == ' ' || pass3[i] == '\t') {
            size_t j = i;
            while (j < pass3.size() && (pass3[j] == ' ' || pass3[j] == '\t')) {
                ++j;
            }
            pass4 += (j - i >= 2) ? ' ' : pass3[i];
            i = j;
        } else {
            pass4 += pass3[i];
            ++i;
        }
    }

    return trim(pass4);
}

size_t note_word_count(const Note& note) {
    return word_count(note.cleaned_text);
}

std::vector<Note> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open manifest '" + path.string() + "'");
    }
    auto base_dir = path.parent_path();

    std::vector<Note> notes;
    std::set<std::string> seen_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto where = path.string() + ":" + std::to_string(line_no);

        std::vector<std::string> cols;
        size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (line_no == 1 && cols.size() >= 1 && cols[0] == "note_id") {
            continue; // header row
        }
        if (cols.size() != 4) {
            throw Error(where + ": expected 4 tab-separated columns, found " +
                        std::to_string(cols.size()));
        }

        Note note;
        note.note_id = trim(cols[0]);
        note.patient_id = trim(cols[1]);
        note.date = trim(cols[2]);
        if (note.note_id.empty()) {
            throw Error(where + ": empty note_id");
        }
        if (note.patient_id.empty()) {
            throw Error(where + ": empty patient_id");
        }
        check_iso_date(note.date, where);
        if (!seen_ids.insert(note.note_id).second) {
            throw Error(where + ": duplicate note_id '" + note.note_id + "'");
        }

        auto body = cols[3];
        auto candidate = base_dir / trim(body);
        if (!trim(body).empty() && std::filesystem::is_regular_file(candidate)) {
            note.raw_text = read_file(candidate);
        } else {
            note.raw_text = decode_inline_text(body, where);
        }
        notes.push_back(std::move(note));
    }
    return notes;
}

std::vector<Note> clean_notes(std::vector<Note> notes) {
    for (auto& note : notes) {
        note.cleaned_text = clean_note(note.raw_text);
    }
    return notes;
}

void save_corpus(const std::vector<Note>& notes, const std::filesystem::path& path) {
    json doc;
    doc["version"] = dataset_file_version;
    doc["notes"] = json::array();
    for (const auto& note : notes) {
        doc["notes"].push_back({{"note_id", note.note_id},
                                {"patient_id", note.patient_id},
                                {"date", note.date},
                                {"raw_text", note.raw_text},
                                {"cleaned_text", note.cleaned_text}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write corpus file '" + path.string() + "'");
    }
    out << doc.dump(2) << "\n";
}

std::vector<Note> load_corpus(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(path.string() + ": corpus parse failure: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("notes") || !doc["notes"].is_array()) {
        throw Error(path.string() + ": corpus file must contain a 'notes' array");
    }
    std::vector<Note> notes;
    std::set<std::string> seen_ids;
    for (size_t i = 0; i < doc["notes"].size(); ++i) {
        const auto& n = doc["notes"][i];
        auto where = path.string() + ": notes[" + std::to_string(i) + "]";
        Note note;
        for (const char* key : {"note_id", "patient_id", "date"}) {
            if (!n.contains(key) || !n[key].is_string()) {
                throw Error(where + "." + key + ": missing or not a string");
            }
        }
        note.note_id = n["note_id"].get<std::string>();
        note.patient_id = n["patient_id"].get<std::string>();
        note.date = n["date"].get<std::string>();
        note.raw_text = n.value("raw_text", std::string());
        note.cleaned_text = n.value("cleaned_text", std::string());
        check_iso_date(note.date, where);
        if (!seen_ids.insert(note.note_id).second) {
            throw Error(where + ": duplicate note_id '" + note.note_id + "'");
        }
        notes.push_back(std::move(note));
    }
    return notes;
}

std::pair<std::vector<Note>, std::vector<Note>>
filter_by_keywords(const std::vector<Note>& notes, const MatcherSet& matchers) {
    std::vector<Note> kept;
    std::vector<Note> dropped;
    for (const auto& note : notes) {
        if (matchers.has_keyword(note.cleaned_text)) {
            kept.push_back(note);
        } else {
            dropped.push_back(note);
        }
    }
    return {std::move(kept), std::move(dropped)};
}

std::pair<std::vector<Note>, std::vector<Note>>
drop_length_outliers(const std::vector<Note>& notes) {
    if (notes.size() < 4) {
        return {notes, {}};
    }
    std::vector<double> lengths;
    lengths.reserve(notes.size());
    for (const auto& note : notes) {
        lengths.push_back(static_cast<double>(note_word_count(note)));
    }
    std::sort(lengths.begin(), lengths.end());
    double q1 = quantile_sorted(lengths, 0.25);
    double q3 = quantile_sorted(lengths, 0.75);
    double fence = q3 + 1.5 * (q3 - q1);

    std::vector<Note> kept;
    std::vector<Note> dropped;
    for (const auto& note : notes) {
        if (static_cast<double>(note_word_count(note)) > fence) {
            dropped.push_back(note);
        } else {
            kept.push_back(note);
        }
    }
    return {std::move(kept), std::move(dropped)};
}

CorpusStats corpus_stats(const std::vector<Note>& notes) {
    CorpusStats stats;
    stats.note_count = notes.size();
    if (notes.empty()) {
        stats.empty_corpus = true;
        log_warning("corpus_stats: empty corpus, all statistics are zero");
        return stats;
    }

    std::set<std::string> patients;
    std::vector<size_t> lengths;
    lengths.reserve(notes.size());
    for (const auto& note : notes) {
        patients.insert(note.patient_id);
        lengths.push_back(note_word_count(note));
    }
    stats.patient_count = patients.size();
    stats.notes_per_patient_avg =
        round2(static_cast<double>(notes.size()) / static_cast<double>(patients.size()));
    stats.note_length_words = length_stats(lengths);
    return stats;
}

std::string corpus_stats_to_json(const CorpusStats& stats) {
    json doc{{"patient_count", stats.patient_count},
             {"note_count", stats.note_count},
             {"notes_per_patient_avg", stats.notes_per_patient_avg},
             {"sample_count", stats.sample_count},
             {"qa_per_note_avg", stats.qa_per_note_avg},
             {"note_length_words", length_stats_to_json(stats.note_length_words)},
             {"question_length_words", length_stats_to_json(stats.question_length_words)},
             {"answer_length_words", length_stats_to_json(stats.answer_length_words)},
             {"empty_corpus", stats.empty_corpus},
             {"includes_dataset", stats.includes_dataset}};
    return doc.dump(2) + "\n";
}

} // namespace iduqa
