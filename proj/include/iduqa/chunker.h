#pragma once

// Model-input preparation: pluggable tokenization plus sliding-window
// chunking of long contexts with a document stride, tracking where the
// gold answer lands in each window.

#include "iduqa/dataset.h"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace iduqa {

struct Token {
    size_t start_char = 0; // [start_char, end_char) into the source text
    size_t end_char = 0;
    std::string text;

    bool operator==(const Token&) const = default;
};

struct TokenizerPolicy {
    std::string name;
    std::function<std::vector<Token>(const std::string&)> run;
};

/// Maximal non-whitespace runs with exact offsets.
TokenizerPolicy whitespace_tokenizer();

/// Runs the policy and validates its output: tokens ordered,
/// non-overlapping, and slicing back to their text.
std::vector<Token> tokenize(const std::string& text, const TokenizerPolicy& policy);

struct ChunkPolicy {
    size_t max_sequence_tokens = 512;
    size_t document_stride_tokens = 128;
    size_t max_question_tokens = 20;
    size_t max_answer_tokens = 100;
    size_t reserve_tokens = 0; // for trainers that need separator slots

    bool operator==(const ChunkPolicy&) const = default;
};

struct Chunk {
    std::string sample_id;
    size_t window_index = 0;
    size_t token_start = 0; // [token_start, token_end) into context tokens
    size_t token_end = 0;
    size_t char_start = 0;
    size_t char_end = 0;
    // Window-relative token positions of the answer, when fully inside.
    std::optional<std::pair<size_t, size_t>> answer_in_window;
    bool is_answer_present = false;

    bool operator==(const Chunk&) const = default;
};

/// Splits one sample's context into overlapping windows of
/// max_sequence - question_tokens - reserve tokens, starting every
/// stride tokens until a window reaches the final context token.
/// Questions longer than max_question_tokens count as max_question_tokens
/// (with a warning); an empty context is an error, as is a stride that
/// is not smaller than the window capacity.
std::vector<Chunk> chunk_sample(const QASample& sample, const std::string& context,
                                const ChunkPolicy& policy, const TokenizerPolicy& tokenizer);

/// chunk_sample over every sample of the dataset, contexts joined by note_id.
std::vector<Chunk> chunk_dataset(const Dataset& dataset, const ChunkPolicy& policy,
                                 const TokenizerPolicy& tokenizer);

std::string chunks_to_json(const std::vector<Chunk>& chunks);
void save_chunks(const std::vector<Chunk>& chunks, const std::filesystem::path& path);

} // namespace iduqa
