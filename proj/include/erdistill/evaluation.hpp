#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erdistill/core.hpp"
#include "erdistill/distillation.hpp"
#include "erdistill/jsonl.hpp"
#include "erdistill/prompting.hpp"

namespace erdistill {

struct EvalCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t total = 0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    EvalCounts counts;
    std::optional<double> positive_ratio;
    std::optional<double> accuracy;
    std::map<std::string, EvalCounts> per_dataset;
    std::map<std::string, double> stage_timings_s;
};

Json eval_report_to_json(const EvalReport& r);

/// SELECT-mode scoring of predictions against tuple truths. A prediction is
/// a tp iff choice equals truth (index match, or both None). A wrong positive
/// choice is one fp and, when truth is positive, also one fn (the true match
/// was missed); None/Abstain on positive truth is one fn only, so an
/// abstaining model loses recall, not precision. TruthRequired /
/// KeyMismatch.
EvalReport eval_select(const Knowledge& predictions, const std::vector<Tuple>& truth_tuples,
                       const std::string& dataset_name = "");

/// Binary P/R/F1 over pair labels (positive class 1). Truth pairs are looked
/// up by (query, candidate); TruthRequired when a predicted pair has no
/// truth.
EvalReport eval_pairwise(const std::vector<PairwiseRecord>& predicted,
                         const std::vector<PairwiseRecord>& truth,
                         const std::string& dataset_name = "");

/// Nearest-rank percentile: element ceil(p/100 * n) (1-based) of the sorted
/// values. p in (0, 100].
double nearest_rank_percentile(std::vector<double> values, double p);

struct Percentiles {
    double p50 = 0.0;
    double p95 = 0.0;
};

/// Prompt-shape statistics over a tuple pool, reported at the 50th and 95th
/// percentiles: serialized entity length (|e|), candidate-list size (|C|),
/// estimated prompt length (|EP|, arithmetic: boilerplate + query length +
/// candidate lengths + numbering overhead) and observed prompt length (|OP|,
/// actual render), plus the positive rate over truth-carrying tuples.
struct PromptStats {
    Percentiles entity_length;
    Percentiles candidate_count;
    Percentiles estimated_prompt_length;
    Percentiles observed_prompt_length;
    std::optional<double> positive_rate;
};

Json prompt_stats_to_json(const PromptStats& s);

/// Arithmetic prompt-length estimate for one tuple; independent of the
/// renderer so the two can be cross-checked.
std::size_t estimate_prompt_length(const Tuple& t, const PromptTemplate& tmpl);

PromptStats stats_report(const std::vector<Tuple>& tuples, const PromptTemplate& tmpl);

struct StageLog {
    std::string stage;
    double seconds = 0.0;
};

/// Optional two-stage teacher decomposition for the timing table. When
/// llm_portion_s is absent it is derived as x_fraction times the
/// llm_annotation stage duration.
struct SlmDecomposition {
    double x_fraction = 0.0;
    std::optional<double> llm_portion_s;
    double finetune_s = 0.0;
    double predict_s = 0.0;
};

struct TimingReport {
    std::vector<StageLog> stages;
    double total_s = 0.0;
    std::optional<double> slm_annotation_s;   // llm_portion + finetune + predict
    std::optional<double> slm_to_llm_ratio;   // slm_annotation / full llm annotation
};

TimingReport timing_report(const std::vector<StageLog>& stage_logs,
                           const std::optional<SlmDecomposition>& slm = std::nullopt);

Json timing_report_to_json(const TimingReport& r);

/// Fixed-width text rendering of a report for terminal output.
std::string render_eval_table(const EvalReport& r);
std::string render_stats_table(const PromptStats& s);
std::string render_timing_table(const TimingReport& r);

}  // namespace erdistill
