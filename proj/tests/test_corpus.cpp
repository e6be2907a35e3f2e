#include "iduqa/corpus.h"
#include "iduqa/lexicon.h"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace iduqa;

namespace {

std::filesystem::path data_dir() {
    return std::filesystem::path(IDUQA_DATA_DIR);
}

Note make_note(const std::string& id, const std::string& patient, const std::string& cleaned) {
    Note note;
    note.note_id = id;
    note.patient_id = patient;
    note.date = "2070-01-01";
    note.raw_text = cleaned;
    note.cleaned_text = cleaned;
    return note;
}

std::string words(size_t n, const std::string& word = "word") {
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += word;
    }
    return out;
}

std::filesystem::path write_temp_tree(const std::string& manifest_body) {
    auto dir = std::filesystem::temp_directory_path() / "iduqa-manifest-test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir / "notes");
    std::ofstream(dir / "notes" / "a.txt") << "denies ivdu. lives alone.\n";
    std::ofstream(dir / "manifest.tsv") << manifest_body;
    return dir;
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("cleaning collapses junk runs while keeping single newlines") {
    CHECK(clean_note("a  b") == "a b");
    CHECK(clean_note("a\tb") == "a\tb");
    CHECK(clean_note("a \t b") == "a b");
    CHECK(clean_note("a\nb") == "a\nb");
    CHECK(clean_note("a\n\n\nb") == "a\nb");
    CHECK(clean_note("a....b") == "a b");
    CHECK(clean_note("a----b") == "a b");
    CHECK(clean_note("a__b") == "a b");
    CHECK(clean_note("a.-_b") == "a b");
    CHECK(clean_note("end.") == "end.");
    CHECK(clean_note("a,\nb") == "a, b");
    CHECK(clean_note("hx:\nno") == "hx: no");
    CHECK(clean_note("  x  ") == "x");
    CHECK(clean_note("\r\nx\r\n") == "x");
    CHECK(clean_note("") == "");
}

TEST_CASE("cleaning reproduces the messy-note fixture") {
    // The period run becomes one space and the newline run one newline,
    // in that order, so a lone space survives in front of the newline.
    std::string raw = "social hx:\ndenies ivdu....\n\n\nplan follow up_____end";
    CHECK(clean_note(raw) == "social hx: denies ivdu \nplan follow up end");
    CHECK(clean_note("plan____follow up\n\n\nend") == "plan follow up\nend");
}

TEST_CASE("cleaning is idempotent") {
    std::vector<std::string> fixtures = {
        "social hx:\ndenies ivdu....\n\n\nplan follow up_____end",
        "a  b..c\n\nd",
        " \n . - _ mixed,\n runs\t\there ",
    };
    std::mt19937_64 gen(11);
    const std::string alphabet = " \n\t.-_,:;'\"abcx ";
    for (int i = 0; i < 200; ++i) {
        std::string s;
        size_t len = gen() % 40;
        for (size_t j = 0; j < len; ++j) {
            s += alphabet[gen() % alphabet.size()];
        }
        fixtures.push_back(s);
    }
    for (const auto& raw : fixtures) {
        CAPTURE(raw);
        auto once = clean_note(raw);
        CHECK(clean_note(once) == once);
    }
}

TEST_CASE("manifest loads file-backed and inline notes") {
    auto dir = write_temp_tree("note_id\tpatient_id\tdate\ttext\n"
                               "n1\tp1\t2070-01-02\tnotes/a.txt\n"
                               "n2\tp1\t2070-01-03\tline one\\nline two\\\\tail\n");
    auto notes = load_manifest(dir / "manifest.tsv");
    REQUIRE(notes.size() == 2);
    CHECK(notes[0].note_id == "n1");
    CHECK(notes[0].raw_text == "denies ivdu. lives alone.\n");
    CHECK(notes[0].cleaned_text.empty());
    CHECK(notes[1].patient_id == "p1");
    CHECK(notes[1].raw_text == "line one\nline two\\tail");

    auto cleaned = clean_notes(notes);
    CHECK(cleaned[0].cleaned_text == "denies ivdu. lives alone.");
    std::filesystem::remove_all(dir);
}

TEST_CASE("manifest errors carry file and line") {
    auto check_error = [](const std::string& body, const std::string& needle) {
        auto dir = write_temp_tree(body);
        CAPTURE(body);
        CHECK_THROWS_WITH_AS(load_manifest(dir / "manifest.tsv"),
                             doctest::Contains(needle.c_str()), Error);
        std::filesystem::remove_all(dir);
    };
    check_error("n1\tp1\t2070-13-01\ttext here\n", "date");
    check_error("n1\tp1\t2070-1-01\ttext here\n", "date");
    check_error("n1\tp1\t2070-01-02\n", "column");
    check_error("n1\tp1\t2070-01-02\tbad escape \\x\n", "escape");
    check_error("n1\tp1\t2070-01-02\tdangling\\\n", "backslash");
    check_error("n1\tp1\t2070-01-02\tok\nn1\tp2\t2070-01-03\tdup\n", "n1");

    auto dir = write_temp_tree("n1\tp1\t2070-01-32\tok\n");
    CHECK_THROWS_WITH_AS(load_manifest(dir / "manifest.tsv"),
                         doctest::Contains("manifest.tsv:1"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("the shipped manifest loads 40 notes for 20 patients") {
    auto notes = clean_notes(load_manifest(data_dir() / "corpus" / "manifest.tsv"));
    auto stats = corpus_stats(notes);
    CHECK(stats.note_count == 40);
    CHECK(stats.patient_count == 20);
    CHECK(stats.notes_per_patient_avg == doctest::Approx(2.0));
    for (const auto& note : notes) {
        CAPTURE(note.note_id);
        CHECK(!note.cleaned_text.empty());
        CHECK(clean_note(note.cleaned_text) == note.cleaned_text);
    }
}

TEST_CASE("keyword filtering partitions and preserves order") {
    auto lex = load_lexicon(data_dir() / "lexicon.json");
    auto matchers = compile_matchers(lex);
    std::vector<Note> notes = {
        make_note("k1", "p1", "denies ivdu today."),
        make_note("q1", "p1", "knee pain after fall."),
        make_note("k2", "p2", "old track marks on arm."),
        make_note("q2", "p2", "routine follow up."),
    };
    auto [kept, dropped] = filter_by_keywords(notes, matchers);
    REQUIRE(kept.size() == 2);
    REQUIRE(dropped.size() == 2);
    CHECK(kept[0].note_id == "k1");
    CHECK(kept[1].note_id == "k2");
    CHECK(dropped[0].note_id == "q1");
    CHECK(dropped[1].note_id == "q2");
}

TEST_CASE("length outlier fence drops only extreme notes") {
    std::vector<Note> notes;
    for (int i = 0; i < 10; ++i) {
        notes.push_back(make_note("n" + std::to_string(i), "p", words(100)));
    }
    notes.push_back(make_note("huge", "p", words(10000)));

    auto [kept, dropped] = drop_length_outliers(notes);
    REQUIRE(dropped.size() == 1);
    CHECK(dropped[0].note_id == "huge");
    CHECK(kept.size() == 10);

    SUBCASE("identical lengths keep everything") {
        auto [kept_eq, dropped_eq] = drop_length_outliers(
            {notes.begin(), notes.begin() + 10});
        CHECK(kept_eq.size() == 10);
        CHECK(dropped_eq.empty());
    }

    SUBCASE("fewer than four notes pass through") {
        std::vector<Note> tiny = {make_note("a", "p", words(1)),
                                  make_note("b", "p", words(10000))};
        auto [kept_tiny, dropped_tiny] = drop_length_outliers(tiny);
        CHECK(kept_tiny.size() == 2);
        CHECK(dropped_tiny.empty());
    }
}

TEST_CASE("corpus statistics use word counts") {
    std::vector<Note> notes = {
        make_note("a", "p1", words(4)),
        make_note("b", "p2", words(8)),
    };
    auto stats = corpus_stats(notes);
    CHECK(stats.note_count == 2);
    CHECK(stats.patient_count == 2);
    CHECK(stats.note_length_words.avg == doctest::Approx(6.0));
    CHECK(stats.note_length_words.median == doctest::Approx(6.0));
    CHECK(stats.note_length_words.max == 8);
    CHECK_FALSE(stats.empty_corpus);

    auto empty = corpus_stats({});
    CHECK(empty.empty_corpus);
    CHECK(empty.note_count == 0);
}

TEST_CASE("corpus json round-trips") {
    std::vector<Note> notes = {
        make_note("a", "p1", "denies ivdu."),
        make_note("b", "p2", "knee pain."),
    };
    notes[0].raw_text = "denies   ivdu.";
    auto path = std::filesystem::temp_directory_path() / "iduqa-corpus-roundtrip.json";
    save_corpus(notes, path);
    auto reloaded = load_corpus(path);
    CHECK(reloaded == notes);
    std::filesystem::remove(path);
}

} // TEST_SUITE
