#include "iduqa/chunker.h"

#include "iduqa/text.h"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>

namespace iduqa {

using nlohmann::json;

TokenizerPolicy whitespace_tokenizer() {
    TokenizerPolicy policy;
    policy.name = "whitespace";
    policy.run = [](const std::string& text) {
        std::vector<Token> tokens;
        size_t i = 0;
        while (i < text.size()) {
            if (is_space_char(text[i])) {
                ++i;
                continue;
            }
            size_t j = i;
            while (j < text.size() && !is_space_char(text[j])) {
                ++j;
            }
            tokens.push_back({i, j, text.substr(i, j - i)});
            i = j;
        }
        return tokens;
    };
    return policy;
}

std::vector<Token> tokenize(const std::string& text, const TokenizerPolicy& policy) {
    if (!policy.run) {
        throw Error("tokenizer policy '" + policy.name + "' has no tokenize function");
    }
    auto tokens = policy.run(text);
    size_t prev_end = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const auto& token = tokens[i];
        auto where = "tokenizer '" + policy.name + "' token " + std::to_string(i);
        if (token.start_char >= token.end_char || token.end_char > text.size()) {
            throw Error(where + ": invalid offsets");
        }
        if (i > 0 && token.start_char < prev_end) {
            throw Error(where + ": overlaps the previous token");
        }
        if (text.substr(token.start_char, token.end_char - token.start_char) != token.text) {
            throw Error(where + ": slice does not reproduce token text");
        }
        prev_end = token.end_char;
    }
    return tokens;
}

std::vector<Chunk> chunk_sample(const QASample& sample, const std::string& context,
                                const ChunkPolicy& policy, const TokenizerPolicy& tokenizer) {
    if (policy.max_sequence_tokens == 0 || policy.document_stride_tokens == 0 ||
        policy.max_question_tokens == 0 || policy.max_answer_tokens == 0) {
        throw Error("chunk policy values must be positive");
    }

    auto context_tokens = tokenize(context, tokenizer);
    if (context_tokens.empty()) {
        throw Error("sample '" + sample.id + "': empty context cannot be chunked");
    }

    size_t question_tokens = tokenize(sample.question, tokenizer).size();
    if (question_tokens > policy.max_question_tokens) {
        log_warning("sample '" + sample.id + "': question has " +
                    std::to_string(question_tokens) + " tokens, truncating to " +
                    std::to_string(policy.max_question_tokens));
        question_tokens = policy.max_question_tokens;
    }
    size_t overhead = question_tokens + policy.reserve_tokens;
    if (overhead >= policy.max_sequence_tokens) {
        throw Error("sample '" + sample.id + "': question and reserve leave no context capacity");
    }
    size_t capacity = policy.max_sequence_tokens - overhead;
    if (policy.document_stride_tokens >= capacity) {
        throw Error("document stride " + std::to_string(policy.document_stride_tokens) +
                    " must be smaller than the context capacity " + std::to_string(capacity));
    }

    // Token index range of the first gold answer, when present.
    std::optional<std::pair<size_t, size_t>> answer_tokens; // [first, last+1)
    if (!sample.is_impossible && !sample.answers.empty()) {
        const auto& answer = sample.answers.front();
        size_t a_start = answer.answer_start;
        size_t a_end = answer.answer_start + answer.text.size();
        std::optional<size_t> first;
        size_t last = 0;
        for (size_t i = 0; i < context_tokens.size(); ++i) {
            if (context_tokens[i].end_char > a_start && context_tokens[i].start_char < a_end) {
                if (!first) {
                    first = i;
                }
                last = i;
            }
        }
        if (first) {
            answer_tokens = {{*first, last + 1}};
        }
    }

    std::vector<Chunk> chunks;
    size_t n = context_tokens.size();
    for (size_t window_index = 0;; ++window_index) {
        size_t start = window_index * policy.document_stride_tokens;
        size_t end = std::min(start + capacity, n);
        Chunk chunk;
        chunk.sample_id = sample.id;
        chunk.window_index = window_index;
        chunk.token_start = start;
        chunk.token_end = end;
        chunk.char_start = context_tokens[start].start_char;
        chunk.char_end = context_tokens[end - 1].end_char;
        if (answer_tokens && answer_tokens->first >= start && answer_tokens->second <= end) {
            chunk.answer_in_window = {{answer_tokens->first - start, answer_tokens->second - start}};
            chunk.is_answer_present = true;
        }
        chunks.push_back(std::move(chunk));
        if (end >= n) {
            break;
        }
    }
    return chunks;
}

std::vector<Chunk> chunk_dataset(const Dataset& dataset, const ChunkPolicy& policy,
                                 const TokenizerPolicy& tokenizer) {
    std::map<std::string, const std::string*> context_by_note;
    for (const auto& note : dataset.notes) {
        context_by_note[note.note_id] = &note.context;
    }
    std::vector<Chunk> chunks;
    for (const auto& sample : dataset.samples) {
        auto it = context_by_note.find(sample.note_id);
        if (it == context_by_note.end()) {
            throw Error("sample '" + sample.id + "': unknown note_id '" + sample.note_id + "'");
        }
        auto sample_chunks = chunk_sample(sample, *it->second, policy, tokenizer);
        chunks.insert(chunks.end(), std::make_move_iterator(sample_chunks.begin()),
                      std::make_move_iterator(sample_chunks.end()));
    }
    return chunks;
}

std::string chunks_to_json(const std::vector<Chunk>& chunks) {
    json arr = json::array();
    for (const auto& chunk : chunks) {
        json record{{"sample_id", chunk.sample_id},
                    {"window_index", chunk.window_index},
                    {"token_start", chunk.token_start},
                    {"token_end", chunk.token_end},
                    {"char_start", chunk.char_start},
                    {"char_end", chunk.char_end},
                    {"is_answer_present", chunk.is_answer_present}};
        if (chunk.answer_in_window) {
            record["answer_token_start"] = chunk.answer_in_window->first;
            record["answer_token_end"] = chunk.answer_in_window->second;
        } else {
            record["answer_token_start"] = nullptr;
            record["answer_token_end"] = nullptr;
        }
        arr.push_back(std::move(record));
    }
    json doc{{"version", dataset_file_version}, {"chunks", std::move(arr)}};
    return doc.dump(2) + "\n";
}

void save_chunks(const std::vector<Chunk>& chunks, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write chunks file '" + path.string() + "'");
    }
    out << chunks_to_json(chunks);
}

} // namespace iduqa
