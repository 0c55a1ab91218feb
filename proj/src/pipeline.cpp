#include "erdistill/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>

#include "erdistill/distillation.hpp"
#include "erdistill/errors.hpp"
#include "erdistill/evaluation.hpp"
#include "erdistill/ingest.hpp"

namespace erdistill {

void apply_endpoint_override(TeacherDescriptor& d) {
    const char* url = std::getenv(kEndpointEnvVar);
    if (!url || !*url) return;
    if (d.kind == "llm_endpoint") d.endpoint = url;
    for (auto& m : d.members) {
        if (m.kind == "llm_endpoint") m.endpoint = url;
    }
}

void save_selection(const std::filesystem::path& training_path,
                    const std::filesystem::path& testing_path, const SelectionOutcome& outcome) {
    std::vector<Json> training_lines;
    training_lines.reserve(outcome.training.size());
    for (const SelectedTuple& st : outcome.training) {
        Json j = tuple_to_json(st.tuple);
        if (st.presumed != PresumedLabel::Unset) j["presumed"] = to_string(st.presumed);
        training_lines.push_back(std::move(j));
    }
    write_jsonl(training_path, training_lines);
    save_tuples(testing_path, outcome.testing);
}

SelectionConfig selection_config_from_json(const Json& j, std::uint64_t default_seed) {
    SelectionConfig config;
    config.strategy = selection_strategy_from_string(j.value("strategy", "rank_max"));
    config.p_fraction = j.value("p", 0.075);
    config.n_fraction = j.value("n", 0.025);
    config.bins = j.value("bins", 10);
    config.seed = j.value("seed", default_seed);
    validate_config(config);
    return config;
}

namespace {

struct StageTimer {
    std::map<std::string, double>& sink;
    std::string stage;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    StageTimer(std::map<std::string, double>& s, std::string name)
        : sink(s), stage(std::move(name)) {}
    ~StageTimer() {
        sink[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

const Json& require_section(const Json& config, const char* name) {
    if (!config.contains(name)) {
        fail("ConfigError", std::string(name) + " section missing from config");
    }
    return config.at(name);
}

[[noreturn]] void rethrow_with_stage(const char* stage, const Error& e) {
    throw Error(e.code(), std::string("stage '") + stage + "': " + e.message());
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        rethrow_with_stage(stage, e);
    }
}

}  // namespace

Json run_pipeline(const std::filesystem::path& config_path,
                  const std::optional<std::filesystem::path>& out_dir_override,
                  std::optional<std::uint64_t> seed_override) {
    const Json config = read_json_file(config_path);
    for (const char* section : {"ingest", "selection", "teacher", "template", "distill", "eval"}) {
        require_section(config, section);
    }
    const std::uint64_t master_seed = seed_override.value_or(config.value("seed", std::uint64_t{0}));
    std::filesystem::path out_dir = out_dir_override.value_or(
        std::filesystem::path(config.value("out_dir", "run-out")));
    std::filesystem::create_directories(out_dir);
    const int parallelism = config.value("parallelism", 1);

    std::map<std::string, double> timings;
    std::map<std::string, std::string> input_digests, output_digests;
    input_digests[config_path.string()] = sha256_file(config_path);

    Json seeds{{"pool", stage_seed(master_seed, "pool")},
               {"selection", stage_seed(master_seed, "selection")},
               {"teacher", stage_seed(master_seed, "teacher")},
               {"distill", stage_seed(master_seed, "distill")}};

    // --- ingest ---------------------------------------------------------
    const Json& ingest_cfg = require_section(config, "ingest");
    std::vector<Entity> d1, d2;
    std::vector<Tuple> pool;
    run_stage("ingest", [&] {
        StageTimer timer(timings, "ingest");
        if (!ingest_cfg.contains("d1") || !ingest_cfg.contains("d2")) {
            fail("ConfigError", "ingest needs 'd1' and 'd2' entity file paths");
        }
        const std::filesystem::path d1_path = ingest_cfg.at("d1").get<std::string>();
        const std::filesystem::path d2_path = ingest_cfg.at("d2").get<std::string>();
        EntityFormat format = ingest_cfg.contains("format")
                                  ? entity_format_from_string(ingest_cfg.at("format").get<std::string>())
                                  : guess_entity_format(d1_path);
        d1 = load_entities(d1_path, format);
        d2 = load_entities(d2_path, format);
        input_digests[d1_path.string()] = sha256_file(d1_path);
        input_digests[d2_path.string()] = sha256_file(d2_path);
        if (ingest_cfg.contains("manifest")) {
            verify_manifest(dataset_manifest_from_json(ingest_cfg.at("manifest")), d1, d2);
        }
        if (ingest_cfg.contains("tuples")) {
            const std::filesystem::path tuples_path = ingest_cfg.at("tuples").get<std::string>();
            pool = load_tuples(tuples_path, d1, d2);
            input_digests[tuples_path.string()] = sha256_file(tuples_path);
        } else {
            int top_n = 5;
            if (ingest_cfg.contains("block")) {
                top_n = ingest_cfg.at("block").value("top_n", 5);
            }
            pool = block_lexical(d1, d2, top_n);
        }
        return 0;
    });

    // --- pool subsample (selection.pool_fraction) ------------------------
    const Json& selection_cfg = require_section(config, "selection");
    const double pool_fraction = selection_cfg.value("pool_fraction", 1.0);
    run_stage("pool", [&] {
        if (!(pool_fraction > 0.0 && pool_fraction <= 1.0)) {
            fail("ConfigError", "selection.pool_fraction must lie in (0,1]");
        }
        if (pool_fraction < 1.0) {
            std::sort(pool.begin(), pool.end(),
                      [](const Tuple& a, const Tuple& b) { return a.key() < b.key(); });
            Rng rng(seeds.at("pool").get<std::uint64_t>());
            rng.shuffle(pool);
            const auto keep = static_cast<std::size_t>(
                std::ceil(pool_fraction * static_cast<double>(pool.size()) - 1e-9));
            pool.resize(std::max<std::size_t>(1, std::min(keep, pool.size())));
            std::sort(pool.begin(), pool.end(),
                      [](const Tuple& a, const Tuple& b) { return a.key() < b.key(); });
        }
        const auto pool_path = out_dir / "pool.jsonl";
        save_tuples(pool_path, pool);
        output_digests[pool_path.string()] = sha256_file(pool_path);
        return 0;
    });

    // --- selection --------------------------------------------------------
    SelectionOutcome outcome;
    run_stage("selection", [&] {
        StageTimer timer(timings, "selection");
        SelectionConfig sel = selection_config_from_json(
            selection_cfg, seeds.at("selection").get<std::uint64_t>());
        outcome = select(pool, sel);
        save_selection(out_dir / "training.jsonl", out_dir / "testing.jsonl", outcome);
        output_digests[(out_dir / "training.jsonl").string()] =
            sha256_file(out_dir / "training.jsonl");
        output_digests[(out_dir / "testing.jsonl").string()] =
            sha256_file(out_dir / "testing.jsonl");
        return 0;
    });
    std::vector<Tuple> training;
    training.reserve(outcome.training.size());
    for (const SelectedTuple& st : outcome.training) training.push_back(st.tuple);

    // --- teacher / annotation ---------------------------------------------
    const Json& teacher_cfg = require_section(config, "teacher");
    PromptTemplate tmpl = run_stage("template", [&] {
        const Json& template_cfg = require_section(config, "template");
        return template_cfg.is_object() && !template_cfg.empty()
                   ? template_from_json(template_cfg)
                   : PromptTemplate::select_default();
    });

    Knowledge knowledge;
    std::optional<SlmTimings> slm_timings;
    run_stage("annotate", [&] {
        StageTimer timer(timings, "annotate");
        TeacherDescriptor teacher = teacher_from_json(teacher_cfg);
        apply_endpoint_override(teacher);
        if (teacher.seed == 0) teacher.seed = seeds.at("teacher").get<std::uint64_t>();
        BatchOptions batch;
        batch.parallelism = parallelism;
        if (teacher.kind == "slm_pipeline") {
            SlmSplitPlan plan;
            plan.x_fraction = teacher.x_fraction;
            plan.llm_teacher = teacher.members.front();
            plan.classifier = teacher.classifier_cmd.empty()
                                  ? std::shared_ptr<PairwiseClassifier>(new ThresholdClassifier())
                                  : std::shared_ptr<PairwiseClassifier>(
                                        new CommandClassifier(teacher.classifier_cmd));
            plan.work_dir = out_dir / "slm";
            plan.batch = batch;
            SlmAnnotation result = slm_teacher_annotate(training, plan, teacher.seed);
            knowledge = std::move(result.knowledge);
            slm_timings = result.timings;
        } else {
            auto t = make_teacher(teacher);
            knowledge = annotate_batch(training, *t, tmpl, batch);
        }
        save_knowledge(out_dir / "knowledge.jsonl", knowledge);
        output_digests[(out_dir / "knowledge.jsonl").string()] =
            sha256_file(out_dir / "knowledge.jsonl");
        return 0;
    });

    // --- distill -----------------------------------------------------------
    const Json& distill_cfg = require_section(config, "distill");
    run_stage("distill", [&] {
        StageTimer timer(timings, "distill");
        std::vector<std::string> artifacts =
            distill_cfg.value("artifacts", std::vector<std::string>{"sft"});
        const bool with_explanation = distill_cfg.value("with_explanation", false);
        const bool export_jobs = distill_cfg.value("export_jobs", false);
        const std::uint64_t distill_seed = seeds.at("distill").get<std::uint64_t>();
        for (const std::string& artifact : artifacts) {
            if (artifact == "sft") {
                SftBuild built = build_sft(training, knowledge, tmpl, with_explanation);
                save_sft(out_dir / "sft.jsonl", built.records);
                output_digests[(out_dir / "sft.jsonl").string()] =
                    sha256_file(out_dir / "sft.jsonl");
                if (export_jobs) {
                    export_training_job(out_dir / "sft.jsonl", TrainingJobKind::Sft,
                                        distill_cfg.value("hyperparams", Json::object()),
                                        out_dir / "sft_job.json");
                    output_digests[(out_dir / "sft_job.json").string()] =
                        sha256_file(out_dir / "sft_job.json");
                }
            } else if (artifact == "dpo") {
                DpoBuild built = build_dpo(
                    training, knowledge, tmpl,
                    rejected_mode_from_string(distill_cfg.value("rejected_mode", "one_random")),
                    distill_seed);
                save_dpo(out_dir / "dpo.jsonl", built.records);
                output_digests[(out_dir / "dpo.jsonl").string()] =
                    sha256_file(out_dir / "dpo.jsonl");
                if (export_jobs) {
                    export_training_job(out_dir / "dpo.jsonl", TrainingJobKind::Dpo,
                                        distill_cfg.value("hyperparams", Json::object()),
                                        out_dir / "dpo_job.json");
                    output_digests[(out_dir / "dpo_job.json").string()] =
                        sha256_file(out_dir / "dpo_job.json");
                }
            } else if (artifact == "pairwise") {
                save_pairwise(out_dir / "pairwise.jsonl", build_pairwise(training, knowledge));
                output_digests[(out_dir / "pairwise.jsonl").string()] =
                    sha256_file(out_dir / "pairwise.jsonl");
            } else {
                fail("ConfigError", "unknown distill artifact '" + artifact + "'");
            }
        }
        return 0;
    });

    // --- disambiguate -------------------------------------------------------
    const std::string disambiguate_strategy = distill_cfg.value("disambiguate", "none");
    if (disambiguate_strategy != "none") {
        run_stage("disambiguate", [&] {
            StageTimer timer(timings, "disambiguate");
            std::map<std::string, std::vector<int>> positives;
            for (const auto& [key, r] : knowledge.results) {
                if (!r.positives.empty()) {
                    positives[key] = r.positives;
                } else if (r.choice && *r.choice >= 1) {
                    positives[key] = {*r.choice};
                } else {
                    positives[key] = {};
                }
            }
            Knowledge refined;
            if (disambiguate_strategy == "umc") {
                std::vector<MatchCandidate> matches;
                for (const Tuple& t : training) {
                    for (int index : positives[t.key()]) {
                        matches.push_back({t.key(),
                                           t.candidates[static_cast<std::size_t>(index - 1)].entity.id,
                                           t.candidates[static_cast<std::size_t>(index - 1)].score});
                    }
                }
                auto retained = disambiguate_umc(std::move(matches));
                std::map<std::string, std::string> winner;
                for (const auto& m : retained) winner[m.query_id] = m.candidate_id;
                refined.teacher = "disambiguate_umc(" + knowledge.teacher + ")";
                refined.instruction = knowledge.instruction;
                for (const Tuple& t : training) {
                    AnnotationResult r;
                    r.tuple_key = t.key();
                    r.teacher_id = refined.teacher;
                    r.choice = 0;
                    auto it = winner.find(t.key());
                    if (it != winner.end()) {
                        for (std::size_t i = 0; i < t.candidates.size(); ++i) {
                            if (t.candidates[i].entity.id == it->second) {
                                r.choice = static_cast<int>(i) + 1;
                                break;
                            }
                        }
                    }
                    r.completion = "[" + std::to_string(*r.choice) + "]";
                    refined.insert(std::move(r));
                }
            } else if (disambiguate_strategy == "select") {
                TeacherDescriptor teacher = teacher_from_json(teacher_cfg);
                apply_endpoint_override(teacher);
                if (teacher.seed == 0) teacher.seed = seeds.at("teacher").get<std::uint64_t>();
                if (teacher.kind == "slm_pipeline") teacher = teacher.members.front();
                auto t = make_teacher(teacher);
                refined = disambiguate_select(training, positives, *t, tmpl);
            } else {
                fail("ConfigError",
                     "unknown disambiguate strategy '" + disambiguate_strategy + "'");
            }
            knowledge = std::move(refined);
            save_knowledge(out_dir / "knowledge_disambiguated.jsonl", knowledge);
            output_digests[(out_dir / "knowledge_disambiguated.jsonl").string()] =
                sha256_file(out_dir / "knowledge_disambiguated.jsonl");
            return 0;
        });
    }

    // --- evaluate -------------------------------------------------------------
    const Json& eval_cfg = require_section(config, "eval");
    Json summary = Json::object();
    if (outcome.positive_ratio) summary["selection_positive_ratio"] = *outcome.positive_ratio;
    if (eval_cfg.value("enabled", true)) {
        run_stage("evaluate", [&] {
            StageTimer timer(timings, "evaluate");
            bool training_has_truth = !training.empty();
            for (const Tuple& t : training) {
                if (!t.truth) {
                    training_has_truth = false;
                    break;
                }
            }
            if (training_has_truth) {
                EvalReport report = eval_select(knowledge, training, config.value("name", ""));
                write_json_file(out_dir / "eval.json", eval_report_to_json(report));
                output_digests[(out_dir / "eval.json").string()] =
                    sha256_file(out_dir / "eval.json");
                summary["training_f1"] = report.f1;
                if (report.accuracy) summary["training_accuracy"] = *report.accuracy;
            }
            PromptStats stats = stats_report(pool, tmpl);
            write_json_file(out_dir / "stats.json", prompt_stats_to_json(stats));
            output_digests[(out_dir / "stats.json").string()] =
                sha256_file(out_dir / "stats.json");
            return 0;
        });
    }

    // --- manifest ----------------------------------------------------------------
    Json manifest;
    manifest["tool"] = Json{{"name", std::string(kToolName)}, {"version", std::string(kToolVersion)}};
    manifest["config"] = config;
    manifest["master_seed"] = master_seed;
    manifest["seeds"] = seeds;
    Json inputs = Json::object();
    for (const auto& [p, digest] : input_digests) inputs[p] = digest;
    manifest["inputs"] = std::move(inputs);
    Json outputs = Json::object();
    for (const auto& [p, digest] : output_digests) outputs[p] = digest;
    manifest["outputs"] = std::move(outputs);
    Json timing_json = Json::object();
    for (const auto& [stage, seconds] : timings) timing_json[stage] = seconds;
    if (slm_timings) {
        timing_json["slm_llm_annotation_s"] = slm_timings->llm_annotation_s;
        timing_json["slm_finetune_s"] = slm_timings->finetune_s;
        timing_json["slm_predict_s"] = slm_timings->predict_s;
        timing_json["slm_x_fraction"] = slm_timings->x_fraction;
    }
    manifest["timings_s"] = std::move(timing_json);
    manifest["summary"] = std::move(summary);
    write_json_file(out_dir / "manifest.json", manifest);
    return manifest;
}

}  // namespace erdistill
