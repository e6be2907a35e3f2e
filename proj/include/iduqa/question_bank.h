#pragma once

// Expands each query group's question templates into the full bank of
// question variants and builds the reverse index from a normalized
// question string back to its query group.

#include "iduqa/lexicon.h"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iduqa {

struct QuestionBank {
    struct GroupQuestions {
        std::string group_id;
        std::vector<std::string> questions; // expanded, template order

        bool operator==(const GroupQuestions&) const = default;
    };

    std::vector<GroupQuestions> groups;
    std::map<std::string, std::string> index; // normalized question -> group id

    const std::vector<std::string>& questions_for(const std::string& group_id) const;
    std::optional<std::string> lookup(const std::string& question) const;
    size_t total_questions() const;

    bool operator==(const QuestionBank&) const = default;
};

/// Lowercases, trims, and collapses interior whitespace; the key used by
/// QuestionBank::index.
std::string normalize_question(const std::string& question);

/// Cartesian-expands every template (leftmost slot varies slowest),
/// drops duplicate variants within a group, and errors if the same
/// normalized question would map to two different groups.
QuestionBank expand_question_bank(const Lexicon& lexicon);

} // namespace iduqa
