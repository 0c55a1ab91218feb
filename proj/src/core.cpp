#include "erdistill/core.hpp"

#include <algorithm>
#include <unordered_set>

#include "erdistill/errors.hpp"

namespace erdistill {

Tuple validate_tuple(Tuple t) {
    const std::string& key = t.query.id;
    if (t.candidates.empty()) {
        fail("EmptyCandidateList", "tuple '" + key + "' has no candidates");
    }
    std::unordered_set<std::string> seen;
    seen.insert(key);
    for (const auto& c : t.candidates) {
        if (!(c.score >= 0.0 && c.score <= 1.0)) {
            fail("ScoreOutOfRange", "tuple '" + key + "' candidate '" + c.entity.id +
                                        "' has score " + std::to_string(c.score));
        }
        if (!seen.insert(c.entity.id).second) {
            fail("DuplicateCandidate",
                 "tuple '" + key + "' repeats candidate id '" + c.entity.id + "'");
        }
    }
    const int k = static_cast<int>(t.candidates.size());
    std::string truth_id;
    if (t.truth) {
        if (*t.truth < 0 || *t.truth > k) {
            fail("TruthOutOfRange", "tuple '" + key + "' truth index " +
                                        std::to_string(*t.truth) + " with " +
                                        std::to_string(k) + " candidates");
        }
        if (*t.truth >= 1) truth_id = t.candidates[static_cast<std::size_t>(*t.truth - 1)].entity.id;
    }
    std::stable_sort(t.candidates.begin(), t.candidates.end(),
                     [](const ScoredCandidate& a, const ScoredCandidate& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.entity.id < b.entity.id;
                     });
    if (!truth_id.empty()) {
        for (int i = 0; i < k; ++i) {
            if (t.candidates[static_cast<std::size_t>(i)].entity.id == truth_id) {
                t.truth = i + 1;
                break;
            }
        }
    }
    return t;
}

std::string to_string(InstructionKind kind) {
    return kind == InstructionKind::AnswerOnly ? "answer_only" : "answer_plus_explanation";
}

InstructionKind instruction_kind_from_string(std::string_view s) {
    if (s == "answer_only") return InstructionKind::AnswerOnly;
    if (s == "answer_plus_explanation") return InstructionKind::AnswerPlusExplanation;
    fail("ConfigError", "unknown instruction kind '" + std::string(s) + "'");
}

void Knowledge::insert(AnnotationResult result) {
    const std::string key = result.tuple_key;
    auto [it, inserted] = results.emplace(key, std::move(result));
    (void)it;
    if (!inserted) {
        fail("DuplicateAnnotation", "tuple '" + key + "' already annotated in this run");
    }
}

const AnnotationResult* Knowledge::find(const std::string& tuple_key) const {
    auto it = results.find(tuple_key);
    return it == results.end() ? nullptr : &it->second;
}

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

}  // namespace erdistill
