#include "erdistill/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "erdistill/errors.hpp"
#include "erdistill/ingest.hpp"

namespace erdistill {

namespace {

void fill_rates(EvalReport& r) {
    const auto& c = r.counts;
    r.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    r.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    r.f1 = r.precision + r.recall > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
}

}  // namespace

Json eval_report_to_json(const EvalReport& r) {
    Json j{{"precision", r.precision},
           {"recall", r.recall},
           {"f1", r.f1},
           {"counts", Json{{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn},
                           {"total", r.counts.total}}}};
    if (r.positive_ratio) j["positive_ratio"] = *r.positive_ratio;
    if (r.accuracy) j["accuracy"] = *r.accuracy;
    if (!r.per_dataset.empty()) {
        Json per = Json::object();
        for (const auto& [name, c] : r.per_dataset) {
            per[name] = Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"total", c.total}};
        }
        j["per_dataset"] = std::move(per);
    }
    if (!r.stage_timings_s.empty()) {
        Json timings = Json::object();
        for (const auto& [stage, s] : r.stage_timings_s) timings[stage] = s;
        j["stage_timings_s"] = std::move(timings);
    }
    return j;
}

EvalReport eval_select(const Knowledge& predictions, const std::vector<Tuple>& truth_tuples,
                       const std::string& dataset_name) {
    EvalReport r;
    std::int64_t exact = 0;
    std::int64_t positives = 0;
    for (const Tuple& t : truth_tuples) {
        if (!t.truth) fail("TruthRequired", "tuple '" + t.key() + "' carries no truth");
        const AnnotationResult* pred = predictions.find(t.key());
        if (!pred) fail("KeyMismatch", "no prediction for tuple '" + t.key() + "'");
        const int truth = *t.truth;
        if (truth >= 1) ++positives;
        ++r.counts.total;
        if (!pred->choice) {  // Abstain
            if (truth >= 1) ++r.counts.fn;
            continue;
        }
        const int choice = *pred->choice;
        if (choice == truth) {
            ++r.counts.tp;
            ++exact;
        } else if (choice == 0) {
            ++r.counts.fn;  // predicted None on a positive truth
        } else {
            ++r.counts.fp;
            if (truth >= 1) ++r.counts.fn;  // the true match was missed too
        }
    }
    fill_rates(r);
    if (r.counts.total > 0) {
        r.accuracy = static_cast<double>(exact) / static_cast<double>(r.counts.total);
        r.positive_ratio = static_cast<double>(positives) / static_cast<double>(r.counts.total);
    }
    if (!dataset_name.empty()) r.per_dataset[dataset_name] = r.counts;
    return r;
}

EvalReport eval_pairwise(const std::vector<PairwiseRecord>& predicted,
                         const std::vector<PairwiseRecord>& truth,
                         const std::string& dataset_name) {
    std::map<std::pair<std::string, std::string>, int> truth_labels;
    for (const auto& t : truth) truth_labels[{t.query_id, t.candidate_id}] = t.label;
    EvalReport r;
    std::int64_t exact = 0;
    std::int64_t positives = 0;
    for (const auto& p : predicted) {
        auto it = truth_labels.find({p.query_id, p.candidate_id});
        if (it == truth_labels.end()) {
            fail("TruthRequired",
                 "no truth label for pair (" + p.query_id + ", " + p.candidate_id + ")");
        }
        const int want = it->second;
        ++r.counts.total;
        if (want == 1) ++positives;
        if (p.label == want) {
            ++exact;
            if (want == 1) ++r.counts.tp;
        } else if (p.label == 1) {
            ++r.counts.fp;
        } else {
            ++r.counts.fn;
        }
    }
    fill_rates(r);
    if (r.counts.total > 0) {
        r.accuracy = static_cast<double>(exact) / static_cast<double>(r.counts.total);
        r.positive_ratio = static_cast<double>(positives) / static_cast<double>(r.counts.total);
    }
    if (!dataset_name.empty()) r.per_dataset[dataset_name] = r.counts;
    return r;
}

double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) fail("ConfigError", "percentile of an empty list");
    if (!(p > 0.0 && p <= 100.0)) fail("ConfigError", "percentile level must lie in (0, 100]");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p / 100.0 * static_cast<double>(n) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

namespace {

Percentiles percentiles_of(std::vector<double> values) {
    Percentiles out;
    out.p50 = nearest_rank_percentile(values, 50.0);
    out.p95 = nearest_rank_percentile(std::move(values), 95.0);
    return out;
}

std::size_t digits_of(std::size_t n) {
    std::size_t d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

}  // namespace

std::size_t estimate_prompt_length(const Tuple& t, const PromptTemplate& tmpl) {
    validate_template(tmpl);
    std::size_t boilerplate = utf8_length(tmpl.task_text) - utf8_length("{query}") -
                              utf8_length("{candidates}");
    if (tmpl.instruction_kind == InstructionKind::AnswerPlusExplanation) {
        boilerplate += utf8_length(kExplanationSuffix);
    }
    std::size_t total = boilerplate + utf8_length(serialize_entity(t.query));
    const std::size_t k = t.candidates.size();
    for (std::size_t i = 1; i <= k; ++i) {
        total += 3 + digits_of(i);  // "[", digits, "] "
        total += utf8_length(serialize_entity(t.candidates[i - 1].entity));
    }
    total += k - 1;  // joining newlines
    if (tmpl.none_option) total += 1 + utf8_length(kNoneOptionLine);
    return total;
}

PromptStats stats_report(const std::vector<Tuple>& tuples, const PromptTemplate& tmpl) {
    if (tuples.empty()) fail("ConfigError", "stats_report needs a non-empty tuple pool");
    std::vector<double> entity_lengths, candidate_counts, estimated, observed;
    std::size_t with_truth = 0, positive = 0;
    for (const Tuple& t : tuples) {
        entity_lengths.push_back(static_cast<double>(utf8_length(serialize_entity(t.query))));
        for (const auto& c : t.candidates) {
            entity_lengths.push_back(
                static_cast<double>(utf8_length(serialize_entity(c.entity))));
        }
        candidate_counts.push_back(static_cast<double>(t.candidates.size()));
        estimated.push_back(static_cast<double>(estimate_prompt_length(t, tmpl)));
        observed.push_back(static_cast<double>(render_select(t, tmpl).length_chars));
        if (t.truth) {
            ++with_truth;
            if (*t.truth >= 1) ++positive;
        }
    }
    PromptStats out;
    out.entity_length = percentiles_of(std::move(entity_lengths));
    out.candidate_count = percentiles_of(std::move(candidate_counts));
    out.estimated_prompt_length = percentiles_of(std::move(estimated));
    out.observed_prompt_length = percentiles_of(std::move(observed));
    if (with_truth > 0) {
        out.positive_rate = static_cast<double>(positive) / static_cast<double>(with_truth);
    }
    return out;
}

Json prompt_stats_to_json(const PromptStats& s) {
    auto pc = [](const Percentiles& p) { return Json{{"p50", p.p50}, {"p95", p.p95}}; };
    Json j{{"entity_length", pc(s.entity_length)},
           {"candidate_count", pc(s.candidate_count)},
           {"estimated_prompt_length", pc(s.estimated_prompt_length)},
           {"observed_prompt_length", pc(s.observed_prompt_length)}};
    if (s.positive_rate) j["positive_rate"] = *s.positive_rate;
    return j;
}

TimingReport timing_report(const std::vector<StageLog>& stage_logs,
                           const std::optional<SlmDecomposition>& slm) {
    TimingReport r;
    r.stages = stage_logs;
    double llm_annotation_s = 0.0;
    for (const StageLog& s : stage_logs) {
        r.total_s += s.seconds;
        if (s.stage == "llm_annotation") llm_annotation_s = s.seconds;
    }
    if (slm) {
        const double llm_portion =
            slm->llm_portion_s ? *slm->llm_portion_s : slm->x_fraction * llm_annotation_s;
        r.slm_annotation_s = llm_portion + slm->finetune_s + slm->predict_s;
        if (llm_annotation_s > 0.0) {
            r.slm_to_llm_ratio = *r.slm_annotation_s / llm_annotation_s;
        }
    }
    return r;
}

Json timing_report_to_json(const TimingReport& r) {
    Json stages = Json::array();
    for (const StageLog& s : r.stages) {
        stages.push_back(Json{{"stage", s.stage}, {"seconds", s.seconds}});
    }
    Json j{{"stages", std::move(stages)}, {"total_s", r.total_s}};
    if (r.slm_annotation_s) j["slm_annotation_s"] = *r.slm_annotation_s;
    if (r.slm_to_llm_ratio) j["slm_to_llm_ratio"] = *r.slm_to_llm_ratio;
    return j;
}

namespace {

std::string fixed(double v, int precision = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

}  // namespace

std::string render_eval_table(const EvalReport& r) {
    std::ostringstream ss;
    ss << "metric      value\n";
    ss << "precision   " << fixed(r.precision) << "\n";
    ss << "recall      " << fixed(r.recall) << "\n";
    ss << "f1          " << fixed(r.f1) << "\n";
    ss << "tp/fp/fn    " << r.counts.tp << "/" << r.counts.fp << "/" << r.counts.fn << "\n";
    ss << "total       " << r.counts.total << "\n";
    if (r.accuracy) ss << "accuracy    " << fixed(*r.accuracy) << "\n";
    if (r.positive_ratio) ss << "pos_ratio   " << fixed(*r.positive_ratio) << "\n";
    return ss.str();
}

std::string render_stats_table(const PromptStats& s) {
    std::ostringstream ss;
    ss << "statistic                  p50        p95\n";
    auto row = [&](const char* name, const Percentiles& p) {
        ss << std::left << std::setw(24) << name << std::right << std::setw(10) << fixed(p.p50, 1)
           << std::setw(11) << fixed(p.p95, 1) << "\n";
    };
    row("entity_length", s.entity_length);
    row("candidate_count", s.candidate_count);
    row("estimated_prompt_length", s.estimated_prompt_length);
    row("observed_prompt_length", s.observed_prompt_length);
    if (s.positive_rate) ss << "positive_rate           " << fixed(*s.positive_rate) << "\n";
    return ss.str();
}

std::string render_timing_table(const TimingReport& r) {
    std::ostringstream ss;
    if (r.stages.empty() && !r.slm_annotation_s) return "";
    ss << "stage                     seconds\n";
    for (const StageLog& s : r.stages) {
        ss << std::left << std::setw(24) << s.stage << std::right << std::setw(9)
           << fixed(s.seconds, 3) << "\n";
    }
    ss << std::left << std::setw(24) << "total" << std::right << std::setw(9)
       << fixed(r.total_s, 3) << "\n";
    if (r.slm_annotation_s) {
        ss << std::left << std::setw(24) << "slm_annotation" << std::right << std::setw(9)
           << fixed(*r.slm_annotation_s, 3) << "\n";
    }
    if (r.slm_to_llm_ratio) {
        ss << std::left << std::setw(24) << "slm_to_llm_ratio" << std::right << std::setw(9)
           << fixed(*r.slm_to_llm_ratio, 3) << "\n";
    }
    return ss.str();
}

}  // namespace erdistill
