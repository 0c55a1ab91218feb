#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "erdistill/core.hpp"
#include "erdistill/jsonl.hpp"
#include "erdistill/prompting.hpp"

namespace erdistill {

/// Configuration of a knowledge source.
///
/// kind:
///   llm_endpoint — HTTP chat-completion server (model_id, endpoint)
///   multi        — voting committee over `members` (all of one kind-family)
///   mock_oracle  — deterministic truth-echoing test double (noise_rate,
///                  simulated_latency_s)
///   slm_pipeline — two-stage LLM→pairwise-classifier teacher; handled by
///                  slm_teacher_annotate, not by make_teacher (members[0] is
///                  the inner LLM teacher, classifier_cmd the external
///                  classifier, x_fraction the LLM-annotated share)
struct TeacherDescriptor {
    std::string kind = "mock_oracle";
    std::string model_id;
    std::string endpoint;
    std::vector<TeacherDescriptor> members;
    double noise_rate = 0.0;
    std::uint64_t seed = 0;
    double simulated_latency_s = 0.0;
    double temperature = 0.0;
    int retry_base_ms = 1000;
    double x_fraction = 0.2;
    std::string classifier_cmd;  // empty => builtin threshold classifier
};

void validate_descriptor(const TeacherDescriptor& d);
TeacherDescriptor teacher_from_json(const Json& j);
Json teacher_to_json(const TeacherDescriptor& d);
TeacherDescriptor load_teacher(const std::filesystem::path& path);

class Teacher {
public:
    virtual ~Teacher() = default;

    /// Renders the SELECT prompt for the tuple, obtains a completion, parses
    /// the choice (Abstain preserved) and records the raw text and elapsed
    /// seconds. Errors: EndpointUnreachable after the retry budget,
    /// MalformedResponse, TruthRequired (mock on unlabeled tuples).
    virtual AnnotationResult annotate(const Tuple& t, const PromptTemplate& tmpl) const = 0;

    virtual std::string id() const = 0;
};

/// Builds a teacher from a descriptor; rejects kind slm_pipeline (that flow
/// is batch-level, see slm_teacher_annotate).
std::unique_ptr<Teacher> make_teacher(const TeacherDescriptor& d);

/// Committee reduction: the most frequent non-Abstain choice; ties are broken
/// uniformly at random among the tied top choices (sorted ascending) with the
/// given seed. All inputs must share one tuple key (MixedTuples); an
/// all-Abstain committee yields Abstain.
AnnotationResult vote(const std::vector<AnnotationResult>& results, std::uint64_t seed);

struct BatchOptions {
    int parallelism = 1;
    /// Per-tuple failures up to this fraction are recorded as Abstain;
    /// beyond it the batch fails with the first error.
    double failure_threshold = 0.05;
};

/// Annotates every tuple; results ordered by tuple key independent of
/// completion order and parallelism. Knowledge.total_elapsed_s accumulates
/// the per-tuple elapsed values.
Knowledge annotate_batch(const std::vector<Tuple>& tuples, const Teacher& teacher,
                         const PromptTemplate& tmpl, const BatchOptions& options = {});

/// Deterministic test-double teacher: echoes truth with probability
/// 1 - noise_rate, otherwise a uniformly random wrong option from
/// {0..k} \ {truth}. The random stream derives from (seed, tuple key), so
/// results do not depend on annotation order.
AnnotationResult mock_oracle(const Tuple& t, double noise_rate, std::uint64_t seed,
                             InstructionKind instruction = InstructionKind::AnswerOnly,
                             double simulated_latency_s = 0.0);

// --- pairwise classifier contract ---------------------------------------
// External contract: `cmd train <pairs.jsonl> <model-dir>` and
// `cmd predict <pairs.jsonl> <model-dir> <out.jsonl>`, prediction lines
// {"query": id, "candidate": id, "label": 0|1, "score": float}.

struct PairPrediction {
    std::string query_id;
    std::string candidate_id;
    int label = 0;
    double score = 0.0;
};

class PairwiseClassifier {
public:
    virtual ~PairwiseClassifier() = default;
    virtual void train(const std::filesystem::path& pairs,
                       const std::filesystem::path& model_dir) = 0;
    virtual std::vector<PairPrediction> predict(const std::filesystem::path& pairs,
                                                const std::filesystem::path& model_dir) = 0;
};

/// Shipped mock classifier: fits a threshold on the blocking score from the
/// labeled pairs and predicts label 1 at or above it.
class ThresholdClassifier : public PairwiseClassifier {
public:
    void train(const std::filesystem::path& pairs,
               const std::filesystem::path& model_dir) override;
    std::vector<PairPrediction> predict(const std::filesystem::path& pairs,
                                        const std::filesystem::path& model_dir) override;
};

/// Spawns an external command per the classifier contract.
/// ClassifierUnavailable on spawn failure or nonzero exit.
class CommandClassifier : public PairwiseClassifier {
public:
    explicit CommandClassifier(std::string command) : command_(std::move(command)) {}
    void train(const std::filesystem::path& pairs,
               const std::filesystem::path& model_dir) override;
    std::vector<PairPrediction> predict(const std::filesystem::path& pairs,
                                        const std::filesystem::path& model_dir) override;

private:
    std::string command_;
};

std::vector<PairPrediction> load_pair_predictions(const std::filesystem::path& path);
void save_pair_predictions(const std::filesystem::path& path,
                           const std::vector<PairPrediction>& predictions);

/// Two-stage teacher plan: an LLM annotates the X-part of the training set,
/// its labels train the pairwise classifier, and the classifier labels the
/// Y-part.
struct SlmSplitPlan {
    double x_fraction = 0.2;
    TeacherDescriptor llm_teacher;
    std::shared_ptr<PairwiseClassifier> classifier;
    std::filesystem::path work_dir;  // pair files + model artifacts land here
    BatchOptions batch;
};

/// Wall-clock decomposition of the two-stage flow. llm_annotation_s is the
/// sum of the X-part teacher elapsed values (the X% · LLM-annotation term).
struct SlmTimings {
    double llm_annotation_s = 0.0;
    double finetune_s = 0.0;
    double predict_s = 0.0;
    double x_fraction = 0.0;
};

struct SlmAnnotation {
    Knowledge knowledge;
    SlmTimings timings;
};

/// Splits the training tuples into disjoint X/Y parts by a seeded shuffle,
/// annotates the X-part with the plan's LLM teacher, trains the pairwise
/// classifier on the X-part labels, classifies all (query, candidate) pairs
/// of the Y-part, and merges both into one Knowledge. Y-part tuples with
/// several positive pairs keep the full positive-set.
SlmAnnotation slm_teacher_annotate(const std::vector<Tuple>& training, const SlmSplitPlan& plan,
                                   std::uint64_t seed);

// --- knowledge file IO ---------------------------------------------------
// {"tuple": key, "choice": int|"abstain", "positives": [int]?,
//  "explanation": str?, "completion": str, "teacher": str, "elapsed_s": f}

Json annotation_to_json(const AnnotationResult& r);
AnnotationResult annotation_from_json(const Json& j);
void save_knowledge(const std::filesystem::path& path, const Knowledge& k);
Knowledge load_knowledge(const std::filesystem::path& path);

}  // namespace erdistill
