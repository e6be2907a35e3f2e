#include "iduqa/chunker.h"
#include "iduqa/common.h"

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

using namespace iduqa;

namespace {

std::string repeated_words(size_t n) {
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += "w" + std::to_string(i);
    }
    return out;
}

std::string question_of(size_t words) {
    std::string q;
    for (size_t i = 0; i < words; ++i) {
        if (i > 0) {
            q += ' ';
        }
        q += "q" + std::to_string(i);
    }
    return q;
}

QASample sample_with(const std::string& context, size_t token_from, size_t token_to,
                     size_t question_words) {
    auto tokens = tokenize(context, whitespace_tokenizer());
    QASample sample;
    sample.id = "s1";
    sample.note_id = "n1";
    sample.question = question_of(question_words);
    sample.query_group_id = "existence_of_idu";
    size_t char_from = tokens.at(token_from).start_char;
    size_t char_to = tokens.at(token_to - 1).end_char;
    sample.answers = {{context.substr(char_from, char_to - char_from), char_from}};
    return sample;
}

} // namespace

TEST_SUITE("chunker") {

TEST_CASE("whitespace tokenizer reports exact offsets") {
    auto tokens = tokenize("ab  cd\nef", whitespace_tokenizer());
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == Token{0, 2, "ab"});
    CHECK(tokens[1] == Token{4, 6, "cd"});
    CHECK(tokens[2] == Token{7, 9, "ef"});
    CHECK(tokenize("", whitespace_tokenizer()).empty());
    CHECK(tokenize("   ", whitespace_tokenizer()).empty());
}

TEST_CASE("tokenize validates the policy output") {
    TokenizerPolicy broken;
    broken.name = "broken";
    broken.run = [](const std::string& text) {
        return std::vector<Token>{{0, 2, text.substr(0, 2)}, {1, 3, text.substr(1, 2)}};
    };
    CHECK_THROWS_WITH_AS(tokenize("abcd", broken), doctest::Contains("broken"), Error);

    TokenizerPolicy lying;
    lying.name = "lying";
    lying.run = [](const std::string&) {
        return std::vector<Token>{{0, 2, "zz"}};
    };
    CHECK_THROWS_AS(tokenize("abcd", lying), Error);
}

TEST_CASE("long contexts window at every stride until the end") {
    auto context = repeated_words(700);
    auto sample = sample_with(context, 0, 1, 20);
    ChunkPolicy policy; // 512/128/20/100
    auto chunks = chunk_sample(sample, context, policy, whitespace_tokenizer());

    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].token_start == 0);
    CHECK(chunks[1].token_start == 128);
    CHECK(chunks[2].token_start == 256);
    CHECK(chunks[0].token_end == 492); // 512 - 20 question tokens
    CHECK(chunks[1].token_end == 620);
    CHECK(chunks[2].token_end == 700);
    for (size_t i = 0; i < chunks.size(); ++i) {
        CHECK(chunks[i].window_index == i);
        CHECK(chunks[i].sample_id == "s1");
        // Character range slices to the window's tokens.
        auto slice = context.substr(chunks[i].char_start,
                                    chunks[i].char_end - chunks[i].char_start);
        CHECK(slice.front() != ' ');
        CHECK(slice.back() != ' ');
    }
}

TEST_CASE("short contexts produce a single full window") {
    auto context = repeated_words(30);
    auto sample = sample_with(context, 5, 8, 10);
    auto chunks = chunk_sample(sample, context, ChunkPolicy{}, whitespace_tokenizer());
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].token_start == 0);
    CHECK(chunks[0].token_end == 30);
    REQUIRE(chunks[0].is_answer_present);
    REQUIRE(chunks[0].answer_in_window.has_value());
    CHECK(chunks[0].answer_in_window->first == 5);
    CHECK(chunks[0].answer_in_window->second == 8);
}

TEST_CASE("window capacity shrinks with the question and reserve") {
    auto context = repeated_words(600);
    auto sample = sample_with(context, 0, 1, 12);
    ChunkPolicy policy;
    policy.reserve_tokens = 3;
    auto chunks = chunk_sample(sample, context, policy, whitespace_tokenizer());
    REQUIRE(!chunks.empty());
    CHECK(chunks[0].token_end - chunks[0].token_start == 512 - 12 - 3);

    // Questions longer than the cap count as the cap.
    set_log_level(LogLevel::off);
    auto long_question = sample_with(context, 0, 1, 64);
    auto capped = chunk_sample(long_question, context, policy, whitespace_tokenizer());
    set_log_level(LogLevel::warning);
    REQUIRE(!capped.empty());
    CHECK(capped[0].token_end - capped[0].token_start == 512 - 20 - 3);
}

TEST_CASE("degenerate chunking inputs are rejected") {
    auto context = repeated_words(10);
    auto sample = sample_with(context, 0, 1, 5);

    ChunkPolicy zero;
    zero.max_sequence_tokens = 0;
    CHECK_THROWS_AS(chunk_sample(sample, context, zero, whitespace_tokenizer()), Error);

    ChunkPolicy wide_stride;
    wide_stride.max_sequence_tokens = 30;
    wide_stride.max_question_tokens = 5;
    wide_stride.document_stride_tokens = 25; // stride == capacity
    CHECK_THROWS_AS(chunk_sample(sample, context, wide_stride, whitespace_tokenizer()), Error);

    ChunkPolicy no_room;
    no_room.max_sequence_tokens = 20;
    no_room.max_question_tokens = 20;
    CHECK_THROWS_AS(chunk_sample(sample, context, no_room, whitespace_tokenizer()), Error);

    CHECK_THROWS_AS(chunk_sample(sample, "", ChunkPolicy{}, whitespace_tokenizer()), Error);
}

TEST_CASE("windows cover the context and track the answer") {
    std::mt19937_64 gen(512128);
    for (int round = 0; round < 200; ++round) {
        size_t token_count = 1 + gen() % 900;
        ChunkPolicy policy;
        policy.max_sequence_tokens = 64 + gen() % 128;
        policy.max_question_tokens = 8;
        size_t capacity = policy.max_sequence_tokens - 8;
        policy.document_stride_tokens = 1 + gen() % (capacity - 1);

        auto context = repeated_words(token_count);
        size_t answer_len = 1 + gen() % std::min<size_t>(token_count, 12);
        size_t answer_from = gen() % (token_count - answer_len + 1);
        auto sample = sample_with(context, answer_from, answer_from + answer_len, 8);

        CAPTURE(token_count);
        CAPTURE(policy.max_sequence_tokens);
        CAPTURE(policy.document_stride_tokens);
        CAPTURE(answer_from);
        CAPTURE(answer_len);

        auto chunks = chunk_sample(sample, context, policy, whitespace_tokenizer());
        REQUIRE(!chunks.empty());

        // Coverage: strided starts, final window reaches the last token.
        for (size_t i = 0; i < chunks.size(); ++i) {
            CHECK(chunks[i].token_start == i * policy.document_stride_tokens);
            CHECK(chunks[i].token_end ==
                  std::min(token_count, chunks[i].token_start + capacity));
        }
        CHECK(chunks.back().token_end == token_count);

        // Answer presence flags are exact for every window.
        for (const auto& chunk : chunks) {
            bool inside = answer_from >= chunk.token_start &&
                          answer_from + answer_len <= chunk.token_end;
            CHECK(chunk.is_answer_present == inside);
            CHECK(chunk.answer_in_window.has_value() == inside);
            if (inside) {
                CHECK(chunk.answer_in_window->first == answer_from - chunk.token_start);
                CHECK(chunk.answer_in_window->second ==
                      answer_from + answer_len - chunk.token_start);
            }
        }

        // Any answer no longer than capacity - stride is guaranteed a home.
        if (answer_len + policy.document_stride_tokens <= capacity) {
            bool somewhere = false;
            for (const auto& chunk : chunks) {
                somewhere = somewhere || chunk.is_answer_present;
            }
            CHECK(somewhere);
        }
    }
}

TEST_CASE("chunk_dataset joins contexts by note id") {
    Dataset dataset;
    dataset.version = "1.0.0";
    dataset.notes.push_back({"n1", "p1", repeated_words(40)});
    QASample sample;
    sample.id = "n1-a0-existence_of_idu-q0";
    sample.note_id = "n1";
    sample.question = question_of(6);
    sample.query_group_id = "existence_of_idu";
    sample.answers = {{"w3 w4", 9}};
    dataset.samples.push_back(sample);

    auto chunks = chunk_dataset(dataset, ChunkPolicy{}, whitespace_tokenizer());
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].sample_id == sample.id);
    CHECK(chunks[0].is_answer_present);

    dataset.samples[0].note_id = "ghost";
    CHECK_THROWS_WITH_AS(chunk_dataset(dataset, ChunkPolicy{}, whitespace_tokenizer()),
                         doctest::Contains("ghost"), Error);
}

} // TEST_SUITE
