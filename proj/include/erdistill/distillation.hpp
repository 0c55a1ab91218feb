#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "erdistill/core.hpp"
#include "erdistill/jsonl.hpp"
#include "erdistill/prompting.hpp"
#include "erdistill/teaching.hpp"

namespace erdistill {

struct Message {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const Message&) const = default;
};

/// One SFT conversation: the rendered SELECT prompt as the user turn and the
/// teacher's answer as the single, final assistant turn.
struct SftRecord {
    std::vector<Message> messages;
    std::string tuple_key;

    bool operator==(const SftRecord&) const = default;
};

struct DpoRecord {
    std::string prompt;
    std::string chosen;
    std::string rejected;
    std::string tuple_key;

    bool operator==(const DpoRecord&) const = default;
};

/// One (query, candidate) pair flattened out of a tuple for binary training.
struct PairwiseRecord {
    std::string query_id;
    std::string candidate_id;
    std::string text_a;
    std::string text_b;
    int label = 0;
    double score = 0.0;

    bool operator==(const PairwiseRecord&) const = default;
};

struct RewardWeights {
    double w1 = 1.0 / 3.0;
    double w2 = 1.0 / 3.0;
    double w3 = 1.0 / 3.0;
};

void validate_weights(const RewardWeights& w);

struct MatchCandidate {
    std::string query_id;
    std::string candidate_id;
    double score = 0.0;

    bool operator==(const MatchCandidate&) const = default;
};

struct SftBuild {
    std::vector<SftRecord> records;
    int skipped_abstain = 0;
};

/// One record per non-Abstain annotated tuple, sorted by tuple key. The
/// assistant content is `[m]`, or the teacher's explanation text ending in
/// `[m]` when with_explanation is set (MissingExplanation if absent).
SftBuild build_sft(const std::vector<Tuple>& tuples, const Knowledge& knowledge,
                   const PromptTemplate& tmpl, bool with_explanation);

/// k records per annotated tuple: label 1 on the chosen index (or every
/// index of a positive-set), 0 elsewhere; a None annotation yields k zeros.
/// Abstain tuples are skipped.
std::vector<PairwiseRecord> build_pairwise(const std::vector<Tuple>& tuples,
                                           const Knowledge& knowledge);

enum class RejectedMode { OneRandom, All };

RejectedMode rejected_mode_from_string(std::string_view s);

struct DpoBuild {
    std::vector<DpoRecord> records;
    int skipped_abstain = 0;
};

/// Preference pairs per annotated tuple. chosen is the annotation's answer;
/// rejected comes from the other valid options — one drawn uniformly per
/// tuple (seeded) or one record per alternative. NoAlternative when a tuple
/// offers no second option.
DpoBuild build_dpo(const std::vector<Tuple>& tuples, const Knowledge& knowledge,
                   const PromptTemplate& tmpl, RejectedMode mode, std::uint64_t seed);

// --- reward functions (completion scoring for policy-optimization export) --

/// 0 when the completion has no bracketed integer, 1 for exactly one,
/// 1/br for br > 1.
double reward_digit(std::string_view completion);

/// On the completion trimmed of leading/trailing whitespace and newlines
/// with L = character count: 0 if L = 0, 1 if L in {1,2}, 3/L otherwise.
double reward_length(std::string_view completion);

/// 1 when the parsed choice equals target, else 0 (Abstain counts 0).
double reward_answer(std::string_view completion, int target, int k);

/// w1*digit + w2*length + w3*answer.
double reward_total(std::string_view completion, int target, int k, const RewardWeights& weights);

/// Unique Mapping Clustering: scan matches by descending score (ties by
/// query id then candidate id) and retain a match iff neither side appears
/// in an already-retained match.
std::vector<MatchCandidate> disambiguate_umc(std::vector<MatchCandidate> matches);

/// Resolves classifier-positive candidate subsets to single answers: zero
/// positives mean None, a single positive is taken directly (no prompt), two
/// or more are re-asked as a reduced SELECT prompt (indices remapped and
/// mapped back) against the given teacher.
Knowledge disambiguate_select(const std::vector<Tuple>& tuples,
                              const std::map<std::string, std::vector<int>>& pairwise_positives,
                              const Teacher& teacher, const PromptTemplate& tmpl);

enum class TrainingJobKind { Sft, Dpo, Grpo };

std::string to_string(TrainingJobKind kind);
TrainingJobKind training_job_kind_from_string(std::string_view s);

/// Hyperparameter block consumed by an external trainer. SFT: LoRA rank 16,
/// alpha 16, 3 epochs; DPO/GRPO: rank 8, alpha 16, 1 epoch; lr 2e-4,
/// grad-accum 4, AdamW 8-bit, 4-bit quantization for all.
Json default_hyperparams(TrainingJobKind kind);

/// Writes a training-job manifest for the records file (MissingRecords when
/// it does not exist); overrides are merged over the defaults.
Json export_training_job(const std::filesystem::path& records_path, TrainingJobKind kind,
                         const Json& overrides, const std::filesystem::path& out_path);

// --- artifact file IO -----------------------------------------------------

struct GrpoScore {
    std::string tuple_key;
    std::string completion;
    double r_digit = 0.0;
    double r_length = 0.0;
    double r_answer = 0.0;
    double r_total = 0.0;

    bool operator==(const GrpoScore&) const = default;
};

Json sft_to_json(const SftRecord& r);
SftRecord sft_from_json(const Json& j);
void save_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records);
std::vector<SftRecord> load_sft(const std::filesystem::path& path);

Json dpo_to_json(const DpoRecord& r);
DpoRecord dpo_from_json(const Json& j);
void save_dpo(const std::filesystem::path& path, const std::vector<DpoRecord>& records);
std::vector<DpoRecord> load_dpo(const std::filesystem::path& path);

Json pairwise_to_json(const PairwiseRecord& r);
PairwiseRecord pairwise_from_json(const Json& j);
void save_pairwise(const std::filesystem::path& path, const std::vector<PairwiseRecord>& records);
std::vector<PairwiseRecord> load_pairwise(const std::filesystem::path& path);

Json grpo_score_to_json(const GrpoScore& s);
GrpoScore grpo_score_from_json(const Json& j);
void save_grpo_scores(const std::filesystem::path& path, const std::vector<GrpoScore>& scores);
std::vector<GrpoScore> load_grpo_scores(const std::filesystem::path& path);

}  // namespace erdistill
