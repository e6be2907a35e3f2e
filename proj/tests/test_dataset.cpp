#include "iduqa/dataset.h"
#include "iduqa/lexicon.h"
#include "iduqa/question_bank.h"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

using namespace iduqa;

namespace {

std::filesystem::path data_dir() {
    return std::filesystem::path(IDUQA_DATA_DIR);
}

struct Fixture {
    Lexicon lexicon;
    MatcherSet matchers;
    QuestionBank bank;
};

const Fixture& fx() {
    static Fixture f = [] {
        auto lex = load_lexicon(data_dir() / "lexicon.json");
        auto matchers = compile_matchers(lex);
        auto bank = expand_question_bank(lex);
        return Fixture{std::move(lex), std::move(matchers), std::move(bank)};
    }();
    return f;
}

Note cleaned_note(const std::string& text, const std::string& id, const std::string& patient) {
    Note note;
    note.note_id = id;
    note.patient_id = patient;
    note.date = "2070-01-01";
    note.raw_text = text;
    note.cleaned_text = clean_note(text);
    return note;
}

std::vector<QASample> samples_for(const std::string& text, const Pairing& pairing) {
    auto note = cleaned_note(text, "t1", "p1");
    auto answers = extract_note(note, fx().lexicon, fx().matchers);
    return assemble_samples(note, answers, fx().bank, pairing);
}

/// A dataset of `n` one-note, one-sample patients for split testing.
Dataset synthetic_dataset(size_t n) {
    Dataset dataset;
    dataset.version = "1.0.0";
    for (size_t i = 0; i < n; ++i) {
        auto tag = std::to_string(i);
        dataset.notes.push_back({"note" + tag, "patient" + tag, "denies ivdu"});
        QASample sample;
        sample.id = "note" + tag + "-a0-existence_of_idu-q0";
        sample.note_id = "note" + tag;
        sample.question = "Does the patient have a history of IDU?";
        sample.query_group_id = "existence_of_idu";
        sample.answers = {{"denies ivdu", 0}};
        dataset.samples.push_back(std::move(sample));
    }
    return dataset;
}

std::set<std::string> patients_of(const Dataset& dataset) {
    std::set<std::string> out;
    for (const auto& note : dataset.notes) {
        out.insert(note.patient_id);
    }
    return out;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("all_variants pairing emits one sample per mapped question variant") {
    auto existence_variants = fx().bank.questions_for("existence_of_idu").size();
    auto samples = samples_for("denies ivdu", Pairing::all_variants());
    REQUIRE(samples.size() == existence_variants);

    std::set<std::string> ids;
    std::set<std::string> questions;
    for (size_t v = 0; v < samples.size(); ++v) {
        const auto& sample = samples[v];
        ids.insert(sample.id);
        questions.insert(sample.question);
        CHECK(sample.id == "t1-a0-existence_of_idu-q" + std::to_string(v));
        CHECK(sample.note_id == "t1");
        CHECK(sample.query_group_id == "existence_of_idu");
        CHECK_FALSE(sample.is_impossible);
        REQUIRE(sample.answers.size() == 1);
        CHECK(sample.answers[0].text == "denies ivdu");
        CHECK(sample.answers[0].answer_start == 0);
    }
    CHECK(ids.size() == samples.size());
    CHECK(questions.size() == samples.size());
}

TEST_CASE("multi-group answers fan out to every mapped group") {
    auto samples = samples_for("recent ivdu with meth and heroin", Pairing::all_variants());
    auto drug = fx().bank.questions_for("drug_names").size();
    auto active = fx().bank.questions_for("active_historical_use").size();
    CHECK(samples.size() == drug + active);

    std::set<std::string> groups;
    for (const auto& sample : samples) {
        groups.insert(sample.query_group_id);
    }
    CHECK(groups == std::set<std::string>{"drug_names", "active_historical_use"});
}

TEST_CASE("sample_k pairing keeps k deterministic variants per answer and group") {
    auto all = samples_for("denies ivdu", Pairing::all_variants());
    auto picked = samples_for("denies ivdu", Pairing::sample_k(3, 42));
    REQUIRE(picked.size() == 3);

    // Selected ids keep their original variant index and order.
    std::set<std::string> all_ids;
    for (const auto& sample : all) {
        all_ids.insert(sample.id);
    }
    auto variant_index = [](const QASample& sample) {
        auto at = sample.id.rfind('q');
        return std::stoul(sample.id.substr(at + 1));
    };
    for (const auto& sample : picked) {
        CHECK(all_ids.count(sample.id) == 1);
    }
    CHECK(std::is_sorted(picked.begin(), picked.end(),
                         [&](const QASample& a, const QASample& b) {
                             return variant_index(a) < variant_index(b);
                         }));

    CHECK(samples_for("denies ivdu", Pairing::sample_k(3, 42)) == picked);
    CHECK(samples_for("denies ivdu", Pairing::sample_k(99, 42)).size() == all.size());
    CHECK_THROWS_AS(samples_for("denies ivdu", Pairing::sample_k(0, 42)), Error);
}

TEST_CASE("corrupt annotation offsets are a hard error") {
    auto note = cleaned_note("denies ivdu", "t1", "p1");
    auto answers = extract_note(note, fx().lexicon, fx().matchers);
    REQUIRE(answers.size() == 1);
    answers[0].text = "bogus span";
    CHECK_THROWS_WITH_AS(assemble_samples(note, answers, fx().bank, Pairing::all_variants()),
                         doctest::Contains("offsets do not reproduce"), Error);
}

TEST_CASE("no-answer samples cover the existence group of keyword-free notes") {
    auto note = cleaned_note("knee pain after fall", "t2", "p2");
    auto samples = make_no_answer_samples(note, fx().lexicon, fx().matchers, fx().bank);
    REQUIRE(samples.size() == fx().bank.questions_for("existence_of_idu").size());
    for (const auto& sample : samples) {
        CHECK(sample.is_impossible);
        CHECK(sample.answers.empty());
        CHECK(sample.query_group_id == "existence_of_idu");
        CHECK(sample.id.find("-na-") != std::string::npos);
    }

    auto keyword_note = cleaned_note("denies ivdu", "t3", "p3");
    CHECK_THROWS_AS(make_no_answer_samples(keyword_note, fx().lexicon, fx().matchers, fx().bank),
                    Error);
}

TEST_CASE("assemble_dataset keeps only sample-bearing notes") {
    std::vector<Note> notes = {
        cleaned_note("denies ivdu", "k1", "p1"),
        cleaned_note("knee pain after fall", "q1", "p2"),
    };

    auto with_na = assemble_dataset(notes, fx().lexicon, fx().matchers, fx().bank,
                                    Pairing::all_variants(), true);
    CHECK(with_na.notes.size() == 2);
    CHECK(with_na.version == dataset_file_version);
    CHECK_NOTHROW(validate_dataset(with_na));

    auto without_na = assemble_dataset(notes, fx().lexicon, fx().matchers, fx().bank,
                                       Pairing::all_variants(), false);
    REQUIRE(without_na.notes.size() == 1);
    CHECK(without_na.notes[0].note_id == "k1");
    for (const auto& sample : without_na.samples) {
        CHECK_FALSE(sample.is_impossible);
    }
}

TEST_CASE("patient split has exact counts and zero leakage") {
    auto dataset = synthetic_dataset(50);
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto split = split_by_patient(dataset, {0.8, 0.1, 0.1}, seed);
        auto train = patients_of(split.train);
        auto dev = patients_of(split.dev);
        auto test = patients_of(split.test);
        CAPTURE(seed);
        CHECK(train.size() == 40);
        CHECK(dev.size() == 5);
        CHECK(test.size() == 5);
        for (const auto& patient : dev) {
            CHECK(train.count(patient) == 0);
            CHECK(test.count(patient) == 0);
        }
        for (const auto& patient : test) {
            CHECK(train.count(patient) == 0);
        }
        CHECK(split.train.samples.size() + split.dev.samples.size() +
                  split.test.samples.size() ==
              dataset.samples.size());
        CHECK(split.seed == seed);
    }
}

TEST_CASE("patient split is seeded and deterministic") {
    auto dataset = synthetic_dataset(50);
    auto a = split_by_patient(dataset, {0.8, 0.1, 0.1}, 7);
    auto b = split_by_patient(dataset, {0.8, 0.1, 0.1}, 7);
    CHECK(a.train == b.train);
    CHECK(a.dev == b.dev);
    CHECK(a.test == b.test);

    auto c = split_by_patient(dataset, {0.8, 0.1, 0.1}, 8);
    CHECK(patients_of(a.train) != patients_of(c.train));
}

TEST_CASE("split clamping guarantees non-empty parts") {
    auto three = split_by_patient(synthetic_dataset(3), {0.8, 0.1, 0.1}, 1);
    CHECK(patients_of(three.train).size() == 1);
    CHECK(patients_of(three.dev).size() == 1);
    CHECK(patients_of(three.test).size() == 1);

    auto ten = split_by_patient(synthetic_dataset(10), {0.8, 0.1, 0.1}, 1);
    CHECK(patients_of(ten.train).size() == 8);
    CHECK(patients_of(ten.dev).size() == 1);
    CHECK(patients_of(ten.test).size() == 1);
}

TEST_CASE("split rejects bad inputs") {
    auto dataset = synthetic_dataset(10);
    CHECK_THROWS_AS(split_by_patient(dataset, {0.8, 0.1, 0.2}, 1), Error);
    CHECK_THROWS_AS(split_by_patient(dataset, {1.0, 0.0, 0.0}, 1), Error);
    CHECK_THROWS_AS(split_by_patient(synthetic_dataset(2), {0.8, 0.1, 0.1}, 1), Error);
}

TEST_CASE("splits preserve original note and sample order") {
    auto dataset = synthetic_dataset(20);
    auto split = split_by_patient(dataset, {0.8, 0.1, 0.1}, 3);

    auto index_of = [&](const std::string& note_id) {
        for (size_t i = 0; i < dataset.notes.size(); ++i) {
            if (dataset.notes[i].note_id == note_id) {
                return i;
            }
        }
        return dataset.notes.size();
    };
    for (const Dataset* part : {&split.train, &split.dev, &split.test}) {
        for (size_t i = 1; i < part->notes.size(); ++i) {
            CHECK(index_of(part->notes[i - 1].note_id) < index_of(part->notes[i].note_id));
        }
        CHECK_NOTHROW(validate_dataset(*part));
    }
}

TEST_CASE("dataset json round-trips and validates") {
    std::vector<Note> notes = {
        cleaned_note("denies ivdu", "k1", "p1"),
        cleaned_note("knee pain after fall", "q1", "p2"),
    };
    auto dataset = assemble_dataset(notes, fx().lexicon, fx().matchers, fx().bank,
                                    Pairing::all_variants(), true);

    auto json_text = dataset_to_json(dataset);
    CHECK(parse_dataset(json_text) == dataset);

    auto path = std::filesystem::temp_directory_path() / "iduqa-dataset-roundtrip.json";
    save_dataset(dataset, path);
    CHECK(load_dataset(path) == dataset);
    std::filesystem::remove(path);

    auto histogram = group_histogram(dataset);
    size_t total = 0;
    for (const auto& [group, count] : histogram) {
        total += count;
    }
    CHECK(total == dataset.samples.size());
}

TEST_CASE("validation pinpoints broken samples") {
    auto good = synthetic_dataset(3);
    CHECK_NOTHROW(validate_dataset(good));

    auto mutate = [&](auto fn) {
        Dataset copy = good;
        fn(copy);
        return copy;
    };

    CHECK_THROWS_WITH_AS(
        validate_dataset(mutate([](Dataset& d) { d.samples[1].id = d.samples[0].id; })),
        doctest::Contains("note0-a0-existence_of_idu-q0"), Error);
    CHECK_THROWS_WITH_AS(
        validate_dataset(mutate([](Dataset& d) { d.samples[0].note_id = "ghost"; })),
        doctest::Contains("ghost"), Error);
    CHECK_THROWS_WITH_AS(
        validate_dataset(mutate([](Dataset& d) {
            d.samples[0].is_impossible = true;
        })),
        doctest::Contains("note0-a0-existence_of_idu-q0"), Error);
    CHECK_THROWS_WITH_AS(
        validate_dataset(mutate([](Dataset& d) { d.samples[0].answers.clear(); })),
        doctest::Contains("note0-a0-existence_of_idu-q0"), Error);
    CHECK_THROWS_WITH_AS(
        validate_dataset(mutate([](Dataset& d) { d.samples[0].answers[0].answer_start = 3; })),
        doctest::Contains("note0-a0-existence_of_idu-q0"), Error);
    CHECK_THROWS_AS(
        validate_dataset(mutate([](Dataset& d) { d.notes.push_back(d.notes[0]); })), Error);

    CHECK_THROWS_WITH_AS(parse_dataset("{\"data\": []}", "x.json"),
                         doctest::Contains("version"), Error);
    CHECK_THROWS_WITH_AS(parse_dataset("not json", "x.json"), doctest::Contains("x.json"),
                         Error);
}

} // TEST_SUITE
