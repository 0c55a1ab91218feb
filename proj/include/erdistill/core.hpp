#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace erdistill {

/// One attribute of a record: a name with a (possibly empty) value.
struct Attribute {
    std::string name;
    std::string value;

    bool operator==(const Attribute&) const = default;
};

/// A record from one data source: a stable identifier plus its attributes in
/// source order.
struct Entity {
    std::string id;
    std::vector<Attribute> attributes;

    bool operator==(const Entity&) const = default;
};

/// A blocking candidate for a query: the entity plus its blocking similarity
/// in [0,1].
struct ScoredCandidate {
    Entity entity;
    double score = 0.0;

    bool operator==(const ScoredCandidate&) const = default;
};

/// A query entity with its scored candidate list — the unit of annotation.
///
/// Candidates are kept in canonical order (descending score, ties broken by
/// entity id ascending); all 1-based indices (truth, annotation choices)
/// refer to that order. truth is absent on unlabeled data, 0 when the true
/// match is known to be missing from the candidates, and a 1-based candidate
/// index otherwise. Nothing outside the evaluation path reads truth.
struct Tuple {
    Entity query;
    std::vector<ScoredCandidate> candidates;
    std::optional<int> truth;

    const std::string& key() const { return query.id; }

    bool operator==(const Tuple&) const = default;
};

/// Checks all Tuple invariants and returns the tuple with candidates in
/// canonical order. A truth index is carried across the reordering by the
/// candidate's entity id. Throws EmptyCandidateList, ScoreOutOfRange,
/// DuplicateCandidate or TruthOutOfRange, each naming the tuple key.
Tuple validate_tuple(Tuple t);

/// How a teacher is instructed to answer a SELECT prompt.
enum class InstructionKind { AnswerOnly, AnswerPlusExplanation };

std::string to_string(InstructionKind kind);
InstructionKind instruction_kind_from_string(std::string_view s);

/// A teacher's verdict for one tuple.
///
/// choice: 1-based candidate index, 0 for "none of the above", or nullopt
/// when the teacher abstained (unparseable or failed completion). positives
/// holds the full positive-set when a pairwise teacher marked several
/// candidates as matches.
struct AnnotationResult {
    std::string tuple_key;
    std::optional<int> choice;
    std::vector<int> positives;
    std::optional<std::string> explanation;
    std::string completion;
    std::string teacher_id;
    double elapsed_s = 0.0;

    bool abstained() const { return !choice.has_value() && positives.empty(); }

    bool operator==(const AnnotationResult&) const = default;
};

/// Everything a teacher run produced about a set of tuples, keyed by tuple
/// key (query id). Immutable once assembled; safe to share across workers.
struct Knowledge {
    std::map<std::string, AnnotationResult> results;
    std::string teacher;
    InstructionKind instruction = InstructionKind::AnswerOnly;
    double total_elapsed_s = 0.0;

    /// Inserts a result; at most one per tuple per run (DuplicateAnnotation).
    void insert(AnnotationResult result);

    const AnnotationResult* find(const std::string& tuple_key) const;
};

/// Number of Unicode scalar values in a UTF-8 string. All character counts in
/// the pipeline (prompt lengths, reward lengths, entity lengths) use this.
std::size_t utf8_length(std::string_view s);

}  // namespace erdistill
