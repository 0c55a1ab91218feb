#include "erdistill/distillation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "erdistill/errors.hpp"
#include "erdistill/ingest.hpp"
#include "erdistill/rng.hpp"

namespace erdistill {

namespace {

std::string bracketed(int m) { return "[" + std::to_string(m) + "]"; }

// Assistant/chosen content for an annotation: the bare bracketed answer, or
// the explanation text guaranteed to end in `[m]`.
std::string answer_content(const AnnotationResult& r, bool with_explanation) {
    const int m = *r.choice;
    if (!with_explanation) return bracketed(m);
    if (!r.explanation || r.explanation->empty()) {
        fail("MissingExplanation",
             "tuple '" + r.tuple_key + "' has no explanation but with_explanation is set");
    }
    std::string text = *r.explanation;
    std::string suffix = bracketed(m);
    std::string trimmed = text;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
        trimmed.pop_back();
    }
    if (trimmed.size() >= suffix.size() &&
        trimmed.compare(trimmed.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return trimmed;
    }
    return trimmed + " " + suffix;
}

// Tuples sorted by key so every builder emits records in one canonical order.
std::vector<const Tuple*> sorted_by_key(const std::vector<Tuple>& tuples) {
    std::vector<const Tuple*> out;
    out.reserve(tuples.size());
    for (const Tuple& t : tuples) out.push_back(&t);
    std::sort(out.begin(), out.end(),
              [](const Tuple* a, const Tuple* b) { return a->key() < b->key(); });
    return out;
}

const AnnotationResult& require_annotation(const Knowledge& knowledge, const Tuple& t) {
    const AnnotationResult* r = knowledge.find(t.key());
    if (!r) fail("KeyMismatch", "knowledge has no annotation for tuple '" + t.key() + "'");
    return *r;
}

}  // namespace

SftBuild build_sft(const std::vector<Tuple>& tuples, const Knowledge& knowledge,
                   const PromptTemplate& tmpl, bool with_explanation) {
    SftBuild out;
    for (const Tuple* t : sorted_by_key(tuples)) {
        const AnnotationResult& r = require_annotation(knowledge, *t);
        if (r.abstained()) {
            ++out.skipped_abstain;
            continue;
        }
        RenderedPrompt prompt = render_select(*t, tmpl);
        SftRecord rec;
        rec.tuple_key = t->key();
        rec.messages.push_back({"user", std::move(prompt.text)});
        rec.messages.push_back({"assistant", answer_content(r, with_explanation)});
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::vector<PairwiseRecord> build_pairwise(const std::vector<Tuple>& tuples,
                                           const Knowledge& knowledge) {
    std::vector<PairwiseRecord> out;
    for (const Tuple* t : sorted_by_key(tuples)) {
        const AnnotationResult& r = require_annotation(knowledge, *t);
        if (r.abstained()) continue;
        std::vector<int> positives = r.positives;
        if (positives.empty() && r.choice && *r.choice >= 1) positives.push_back(*r.choice);
        const std::string query_text = serialize_entity(t->query);
        for (std::size_t i = 0; i < t->candidates.size(); ++i) {
            const ScoredCandidate& c = t->candidates[i];
            const int index = static_cast<int>(i) + 1;
            PairwiseRecord rec;
            rec.query_id = t->query.id;
            rec.candidate_id = c.entity.id;
            rec.text_a = query_text;
            rec.text_b = serialize_entity(c.entity);
            rec.label = std::find(positives.begin(), positives.end(), index) != positives.end();
            rec.score = c.score;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

RejectedMode rejected_mode_from_string(std::string_view s) {
    if (s == "one_random") return RejectedMode::OneRandom;
    if (s == "all") return RejectedMode::All;
    fail("ConfigError", "unknown rejected_mode '" + std::string(s) + "'");
}

namespace {

// Rejected-side content mirroring the chosen side: bare answer, or a
// templated wrong-option justification ending in the bracketed index when
// the chosen side carries an explanation.
std::string rejected_content(int option, bool with_explanation) {
    if (!with_explanation) return bracketed(option);
    if (option == 0) {
        return "None of the candidates lines up with the query's attributes. " + bracketed(0);
    }
    return "The query's attributes could be read as matching option " + std::to_string(option) +
           ". " + bracketed(option);
}

}  // namespace

DpoBuild build_dpo(const std::vector<Tuple>& tuples, const Knowledge& knowledge,
                   const PromptTemplate& tmpl, RejectedMode mode, std::uint64_t seed) {
    DpoBuild out;
    for (const Tuple* t : sorted_by_key(tuples)) {
        const AnnotationResult& r = require_annotation(knowledge, *t);
        if (r.abstained()) {
            ++out.skipped_abstain;
            continue;
        }
        const int chosen = *r.choice;
        std::vector<int> alternatives;
        if (tmpl.none_option && chosen != 0) alternatives.push_back(0);
        for (int i = 1; i <= static_cast<int>(t->candidates.size()); ++i) {
            if (i != chosen) alternatives.push_back(i);
        }
        if (alternatives.empty()) {
            fail("NoAlternative", "tuple '" + t->key() + "' offers no rejected option");
        }
        const bool with_explanation = r.explanation.has_value() && !r.explanation->empty();
        RenderedPrompt prompt = render_select(*t, tmpl);
        auto emit = [&](int option) {
            DpoRecord rec;
            rec.prompt = prompt.text;
            rec.chosen = answer_content(r, with_explanation);
            rec.rejected = rejected_content(option, with_explanation);
            rec.tuple_key = t->key();
            out.records.push_back(std::move(rec));
        };
        if (mode == RejectedMode::All) {
            for (int option : alternatives) emit(option);
        } else {
            Rng rng(derive_seed(seed, t->key()));
            emit(alternatives[static_cast<std::size_t>(rng.uniform_int(alternatives.size()))]);
        }
    }
    return out;
}

void validate_weights(const RewardWeights& w) {
    if (w.w1 < 0.0 || w.w2 < 0.0 || w.w3 < 0.0 || w.w1 + w.w2 + w.w3 <= 0.0) {
        fail("ConfigError", "reward weights must be non-negative with a positive sum");
    }
}

double reward_digit(std::string_view completion) {
    const int br = count_bracketed(completion);
    if (br == 0) return 0.0;
    return 1.0 / static_cast<double>(br);
}

double reward_length(std::string_view completion) {
    std::size_t begin = 0;
    std::size_t end = completion.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(completion[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(completion[end - 1]))) --end;
    const std::size_t len = utf8_length(completion.substr(begin, end - begin));
    if (len == 0) return 0.0;
    if (len <= 2) return 1.0;
    return 3.0 / static_cast<double>(len);
}

double reward_answer(std::string_view completion, int target, int k) {
    auto parsed = parse_choice(completion, k);
    return parsed && *parsed == target ? 1.0 : 0.0;
}

double reward_total(std::string_view completion, int target, int k, const RewardWeights& weights) {
    validate_weights(weights);
    return weights.w1 * reward_digit(completion) + weights.w2 * reward_length(completion) +
           weights.w3 * reward_answer(completion, target, k);
}

std::vector<MatchCandidate> disambiguate_umc(std::vector<MatchCandidate> matches) {
    std::sort(matches.begin(), matches.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.query_id != b.query_id) return a.query_id < b.query_id;
        return a.candidate_id < b.candidate_id;
    });
    std::vector<MatchCandidate> retained;
    std::set<std::string> used_queries, used_candidates;
    for (MatchCandidate& m : matches) {
        if (used_queries.count(m.query_id) || used_candidates.count(m.candidate_id)) continue;
        used_queries.insert(m.query_id);
        used_candidates.insert(m.candidate_id);
        retained.push_back(std::move(m));
    }
    return retained;
}

Knowledge disambiguate_select(const std::vector<Tuple>& tuples,
                              const std::map<std::string, std::vector<int>>& pairwise_positives,
                              const Teacher& teacher, const PromptTemplate& tmpl) {
    Knowledge out;
    out.teacher = "disambiguate_select(" + teacher.id() + ")";
    out.instruction = tmpl.instruction_kind;
    for (const Tuple* t : sorted_by_key(tuples)) {
        auto it = pairwise_positives.find(t->key());
        std::vector<int> positives = it == pairwise_positives.end() ? std::vector<int>{} : it->second;
        std::sort(positives.begin(), positives.end());
        AnnotationResult r;
        r.tuple_key = t->key();
        r.teacher_id = out.teacher;
        if (positives.empty()) {
            r.choice = 0;
            r.completion = "[0]";
        } else if (positives.size() == 1) {
            r.choice = positives.front();
            r.completion = bracketed(positives.front());
        } else {
            // Reduced tuple over the positive subset; the teacher sees fresh
            // 1-based indices and its answer is mapped back.
            Tuple reduced;
            reduced.query = t->query;
            for (int index : positives) {
                if (index < 1 || index > static_cast<int>(t->candidates.size())) {
                    fail("KeyMismatch", "tuple '" + t->key() + "' has no candidate index " +
                                            std::to_string(index));
                }
                reduced.candidates.push_back(t->candidates[static_cast<std::size_t>(index - 1)]);
            }
            reduced.truth = std::nullopt;
            AnnotationResult reduced_result = teacher.annotate(reduced, tmpl);
            r.completion = reduced_result.completion;
            r.explanation = reduced_result.explanation;
            r.elapsed_s = reduced_result.elapsed_s;
            if (reduced_result.choice) {
                const int reduced_choice = *reduced_result.choice;
                if (reduced_choice == 0) {
                    r.choice = 0;
                } else {
                    const std::string& chosen_id =
                        reduced.candidates[static_cast<std::size_t>(reduced_choice - 1)].entity.id;
                    for (std::size_t i = 0; i < t->candidates.size(); ++i) {
                        if (t->candidates[i].entity.id == chosen_id) {
                            r.choice = static_cast<int>(i) + 1;
                            break;
                        }
                    }
                }
            }
        }
        out.insert(std::move(r));
    }
    return out;
}

std::string to_string(TrainingJobKind kind) {
    switch (kind) {
        case TrainingJobKind::Sft: return "sft";
        case TrainingJobKind::Dpo: return "dpo";
        case TrainingJobKind::Grpo: return "grpo";
    }
    return "sft";
}

TrainingJobKind training_job_kind_from_string(std::string_view s) {
    if (s == "sft") return TrainingJobKind::Sft;
    if (s == "dpo") return TrainingJobKind::Dpo;
    if (s == "grpo") return TrainingJobKind::Grpo;
    fail("ConfigError", "unknown training job kind '" + std::string(s) + "'");
}

Json default_hyperparams(TrainingJobKind kind) {
    const bool sft = kind == TrainingJobKind::Sft;
    return Json{{"lora_rank", sft ? 16 : 8},
                {"lora_alpha", 16},
                {"lora_dropout", 0.0},
                {"epochs", sft ? 3 : 1},
                {"learning_rate", 2e-4},
                {"gradient_accumulation_steps", 4},
                {"optimizer", "adamw_8bit"},
                {"quantization", "4bit"}};
}

Json export_training_job(const std::filesystem::path& records_path, TrainingJobKind kind,
                         const Json& overrides, const std::filesystem::path& out_path) {
    if (!std::filesystem::exists(records_path)) {
        fail("MissingRecords", "records file '" + records_path.string() + "' does not exist");
    }
    Json hyper = default_hyperparams(kind);
    if (overrides.is_object()) {
        for (auto it = overrides.begin(); it != overrides.end(); ++it) {
            hyper[it.key()] = it.value();
        }
    }
    Json manifest{{"data_file", records_path.string()},
                  {"record_kind", to_string(kind)},
                  {"hyperparameters", hyper}};
    write_json_file(out_path, manifest);
    return manifest;
}

// --- artifact file IO -----------------------------------------------------

Json sft_to_json(const SftRecord& r) {
    Json messages = Json::array();
    for (const Message& m : r.messages) {
        messages.push_back(Json{{"role", m.role}, {"content", m.content}});
    }
    return Json{{"messages", std::move(messages)}, {"tuple", r.tuple_key}};
}

SftRecord sft_from_json(const Json& j) {
    SftRecord r;
    for (const Json& m : j.at("messages")) {
        r.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    r.tuple_key = j.at("tuple").get<std::string>();
    return r;
}

void save_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records) {
    std::vector<Json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(sft_to_json(r));
    write_jsonl(path, lines);
}

std::vector<SftRecord> load_sft(const std::filesystem::path& path) {
    std::vector<SftRecord> out;
    for (const Json& j : read_jsonl(path)) out.push_back(sft_from_json(j));
    return out;
}

Json dpo_to_json(const DpoRecord& r) {
    return Json{{"prompt", r.prompt},
                {"chosen", r.chosen},
                {"rejected", r.rejected},
                {"tuple", r.tuple_key}};
}

DpoRecord dpo_from_json(const Json& j) {
    return DpoRecord{j.at("prompt").get<std::string>(), j.at("chosen").get<std::string>(),
                     j.at("rejected").get<std::string>(), j.at("tuple").get<std::string>()};
}

void save_dpo(const std::filesystem::path& path, const std::vector<DpoRecord>& records) {
    std::vector<Json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(dpo_to_json(r));
    write_jsonl(path, lines);
}

std::vector<DpoRecord> load_dpo(const std::filesystem::path& path) {
    std::vector<DpoRecord> out;
    for (const Json& j : read_jsonl(path)) out.push_back(dpo_from_json(j));
    return out;
}

Json pairwise_to_json(const PairwiseRecord& r) {
    return Json{{"query", r.query_id}, {"candidate", r.candidate_id}, {"text_a", r.text_a},
                {"text_b", r.text_b}, {"label", r.label},            {"score", r.score}};
}

PairwiseRecord pairwise_from_json(const Json& j) {
    PairwiseRecord r;
    r.query_id = j.at("query").get<std::string>();
    r.candidate_id = j.at("candidate").get<std::string>();
    r.text_a = j.at("text_a").get<std::string>();
    r.text_b = j.at("text_b").get<std::string>();
    r.label = j.at("label").get<int>();
    r.score = j.at("score").get<double>();
    if (r.label != 0 && r.label != 1) {
        fail("ParseError", "pairwise label must be 0 or 1");
    }
    return r;
}

void save_pairwise(const std::filesystem::path& path, const std::vector<PairwiseRecord>& records) {
    std::vector<Json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(pairwise_to_json(r));
    write_jsonl(path, lines);
}

std::vector<PairwiseRecord> load_pairwise(const std::filesystem::path& path) {
    std::vector<PairwiseRecord> out;
    for (const Json& j : read_jsonl(path)) out.push_back(pairwise_from_json(j));
    return out;
}

Json grpo_score_to_json(const GrpoScore& s) {
    return Json{{"tuple", s.tuple_key},   {"completion", s.completion}, {"r_digit", s.r_digit},
                {"r_length", s.r_length}, {"r_answer", s.r_answer},     {"r_total", s.r_total}};
}

GrpoScore grpo_score_from_json(const Json& j) {
    GrpoScore s;
    s.tuple_key = j.at("tuple").get<std::string>();
    s.completion = j.at("completion").get<std::string>();
    s.r_digit = j.at("r_digit").get<double>();
    s.r_length = j.at("r_length").get<double>();
    s.r_answer = j.at("r_answer").get<double>();
    s.r_total = j.at("r_total").get<double>();
    return s;
}

void save_grpo_scores(const std::filesystem::path& path, const std::vector<GrpoScore>& scores) {
    std::vector<Json> lines;
    lines.reserve(scores.size());
    for (const auto& s : scores) lines.push_back(grpo_score_to_json(s));
    write_jsonl(path, lines);
}

std::vector<GrpoScore> load_grpo_scores(const std::filesystem::path& path) {
    std::vector<GrpoScore> out;
    for (const Json& j : read_jsonl(path)) out.push_back(grpo_score_from_json(j));
    return out;
}

}  // namespace erdistill
