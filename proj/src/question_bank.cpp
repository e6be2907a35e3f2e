#include "iduqa/question_bank.h"

#include "iduqa/text.h"

#include <set>

namespace iduqa {

std::string normalize_question(const std::string& question) {
    return collapse_whitespace(to_lower(question));
}

const std::vector<std::string>& QuestionBank::questions_for(const std::string& group_id) const {
    for (const auto& group : groups) {
        if (group.group_id == group_id) {
            return group.questions;
        }
    }
    throw Error("question bank has no group '" + group_id + "'");
}

std::optional<std::string> QuestionBank::lookup(const std::string& question) const {
    auto it = index.find(normalize_question(question));
    if (it == index.end()) {
        return std::nullopt;
    }
    return it->second;
}

size_t QuestionBank::total_questions() const {
    size_t n = 0;
    for (const auto& group : groups) {
        n += group.questions.size();
    }
    return n;
}

QuestionBank expand_question_bank(const Lexicon& lexicon) {
    QuestionBank bank;
    for (const auto& group : lexicon.query_groups) {
        QuestionBank::GroupQuestions expanded;
        expanded.group_id = group.id;
        std::set<std::string> seen; // drop repeats within a group, keep first
        for (const auto& tmpl : group.question_templates) {
            for (const auto& question : expand_question_template(tmpl)) {
                auto key = normalize_question(question);
                if (!seen.insert(key).second) {
                    continue;
                }
                auto [it, inserted] = bank.index.emplace(key, group.id);
                if (!inserted) {
                    throw Error("question '" + question + "' maps to both group '" + it->second +
                                "' and group '" + group.id + "'");
                }
                expanded.questions.push_back(question);
            }
        }
        bank.groups.push_back(std::move(expanded));
    }
    return bank;
}

} // namespace iduqa
