// erdistill — command-line front end for the distillation pipeline.
//
// Subcommands mirror the pipeline stages (load, block, select-data, annotate,
// build-sft, build-dpo, build-pairwise, score-grpo, disambiguate, evaluate,
// stats, run, mock-classifier). Exit codes: 0 success, 1 stage failure,
// 2 usage error. Errors go to stderr as one JSON object.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erdistill/distillation.hpp"
#include "erdistill/errors.hpp"
#include "erdistill/evaluation.hpp"
#include "erdistill/ingest.hpp"
#include "erdistill/pipeline.hpp"

namespace fs = std::filesystem;
using namespace erdistill;

namespace {

struct GlobalArgs {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
    std::string config;
    int parallelism = 1;
};

std::vector<Entity> load_source(const std::string& path, const std::string& format) {
    EntityFormat f = format.empty() ? guess_entity_format(path) : entity_format_from_string(format);
    return load_entities(path, f);
}

PromptTemplate template_from_flag(const std::string& template_path) {
    return template_path.empty() ? PromptTemplate::select_default()
                                 : load_template(template_path);
}

RewardWeights parse_weights(const std::string& spec) {
    if (spec.empty()) return {};
    RewardWeights w;
    std::istringstream ss(spec);
    std::string part;
    double* slots[3] = {&w.w1, &w.w2, &w.w3};
    for (int i = 0; i < 3; ++i) {
        if (!std::getline(ss, part, ',')) {
            fail("ConfigError", "--weights needs three comma-separated values");
        }
        *slots[i] = std::stod(part);
    }
    validate_weights(w);
    return w;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distills entity-matching knowledge from teacher models into training artifacts"};
    app.require_subcommand(1);

    GlobalArgs global;
    app.add_option("--seed", global.seed, "Master seed for all stage randomness")
        ->each([&](const std::string&) { global.seed_set = true; });
    app.add_option("--out-dir", global.out_dir, "Directory for output files");
    app.add_option("--config", global.config, "JSON config file (run subcommand)");
    app.add_option("--parallelism", global.parallelism, "Concurrent teacher requests");

    // --- load ---
    auto* cmd_load = app.add_subcommand("load", "Load and normalize an entity collection");
    std::string load_in, load_format, load_out;
    cmd_load->add_option("--in", load_in, "Entity file (csv or jsonl)")->required();
    cmd_load->add_option("--format", load_format, "csv|jsonl (default: by extension)");
    cmd_load->add_option("--out", load_out, "Normalized entity JSONL output")->required();

    // --- block ---
    auto* cmd_block = app.add_subcommand("block", "Build tuples with the lexical blocker");
    std::string block_d1, block_d2, block_format, block_out;
    int block_top_n = 5;
    cmd_block->add_option("--d1", block_d1, "Query entity collection")->required();
    cmd_block->add_option("--d2", block_d2, "Candidate entity collection")->required();
    cmd_block->add_option("--format", block_format, "csv|jsonl (default: by extension)");
    cmd_block->add_option("--top-n", block_top_n, "Candidates per query");
    cmd_block->add_option("--out", block_out, "Tuple JSONL output")->required();

    // --- select-data ---
    auto* cmd_select = app.add_subcommand("select-data", "Split a tuple pool into training/testing");
    std::string sel_in, sel_d1, sel_d2, sel_format, sel_strategy = "rank_max";
    std::string sel_training = "training.jsonl", sel_testing = "testing.jsonl";
    double sel_p = 0.075, sel_n = 0.025, sel_pool_fraction = 1.0;
    int sel_bins = 10;
    cmd_select->add_option("--in", sel_in, "Tuple pool JSONL")->required();
    cmd_select->add_option("--d1", sel_d1, "Query entity collection")->required();
    cmd_select->add_option("--d2", sel_d2, "Candidate entity collection")->required();
    cmd_select->add_option("--format", sel_format, "csv|jsonl");
    cmd_select->add_option("--strategy", sel_strategy,
                           "random|rank_max|rank_top2|cluster_kmeans|cluster_agglomerative|sampled");
    cmd_select->add_option("--p", sel_p, "Presumed-positive fraction");
    cmd_select->add_option("--n", sel_n, "Presumed-negative fraction");
    cmd_select->add_option("--bins", sel_bins, "Histogram bins for clustering");
    cmd_select->add_option("--pool-fraction", sel_pool_fraction,
                           "Pre-sample this fraction of the pool before selection");
    cmd_select->add_option("--training-out", sel_training, "Training tuples output");
    cmd_select->add_option("--testing-out", sel_testing, "Testing tuples output");

    // --- annotate ---
    auto* cmd_annotate = app.add_subcommand("annotate", "Elicit knowledge from a teacher");
    std::string ann_teacher, ann_template, ann_in, ann_d1, ann_d2, ann_format, ann_out;
    double ann_failure_threshold = 0.05;
    cmd_annotate->add_option("--teacher", ann_teacher, "Teacher descriptor JSON file")->required();
    cmd_annotate->add_option("--template", ann_template, "Prompt template JSON file");
    cmd_annotate->add_option("--in", ann_in, "Tuples to annotate")->required();
    cmd_annotate->add_option("--d1", ann_d1, "Query entity collection")->required();
    cmd_annotate->add_option("--d2", ann_d2, "Candidate entity collection")->required();
    cmd_annotate->add_option("--format", ann_format, "csv|jsonl");
    cmd_annotate->add_option("--out", ann_out, "Knowledge JSONL output")->required();
    cmd_annotate->add_option("--failure-threshold", ann_failure_threshold,
                             "Tolerated per-tuple failure fraction");

    // --- build-sft / build-dpo / build-pairwise ---
    auto* cmd_sft = app.add_subcommand("build-sft", "Build SFT conversation records");
    auto* cmd_dpo = app.add_subcommand("build-dpo", "Build DPO preference pairs");
    auto* cmd_pairwise = app.add_subcommand("build-pairwise", "Flatten tuples into labeled pairs");
    struct BuildArgs {
        std::string tuples, knowledge, d1, d2, format, template_path, out, export_job;
    };
    BuildArgs sft_args, dpo_args, pw_args;
    bool sft_with_explanation = false;
    std::string dpo_rejected_mode = "one_random";
    for (auto [cmd, args] : {std::pair{cmd_sft, &sft_args}, std::pair{cmd_dpo, &dpo_args},
                             std::pair{cmd_pairwise, &pw_args}}) {
        cmd->add_option("--tuples", args->tuples, "Annotated tuples JSONL")->required();
        cmd->add_option("--knowledge", args->knowledge, "Knowledge JSONL")->required();
        cmd->add_option("--d1", args->d1, "Query entity collection")->required();
        cmd->add_option("--d2", args->d2, "Candidate entity collection")->required();
        cmd->add_option("--format", args->format, "csv|jsonl");
        cmd->add_option("--out", args->out, "Output records JSONL")->required();
        if (cmd != cmd_pairwise) {
            cmd->add_option("--template", args->template_path, "Prompt template JSON file");
            cmd->add_option("--export-job", args->export_job,
                            "Also write a training-job manifest to this path");
        }
    }
    cmd_sft->add_flag("--with-explanation", sft_with_explanation,
                      "Use teacher explanations as assistant content");
    cmd_dpo->add_option("--rejected-mode", dpo_rejected_mode, "one_random|all");

    // --- score-grpo ---
    auto* cmd_grpo = app.add_subcommand("score-grpo", "Score completions with the reward functions");
    std::string grpo_in, grpo_out, grpo_weights, grpo_target_source = "teacher";
    cmd_grpo->add_option("--in", grpo_in,
                         "Completions JSONL: {\"tuple\",\"completion\",\"target\",\"k\"}")
        ->required();
    cmd_grpo->add_option("--out", grpo_out, "Score JSONL output");
    cmd_grpo->add_option("--weights", grpo_weights, "w1,w2,w3 (default 1/3 each)");
    cmd_grpo->add_option("--target-source", grpo_target_source,
                         "Provenance of the target labels: teacher|truth");

    // --- disambiguate ---
    auto* cmd_disambiguate = app.add_subcommand("disambiguate", "Resolve conflicting matches");
    std::string dis_strategy, dis_in, dis_tuples, dis_d1, dis_d2, dis_format, dis_out;
    std::string dis_teacher, dis_template;
    cmd_disambiguate->add_option("--strategy", dis_strategy, "umc|select")->required();
    cmd_disambiguate
        ->add_option("--in", dis_in, "Pair predictions JSONL ({query,candidate,label,score})")
        ->required();
    cmd_disambiguate->add_option("--tuples", dis_tuples, "Tuples the pairs came from")->required();
    cmd_disambiguate->add_option("--d1", dis_d1, "Query entity collection")->required();
    cmd_disambiguate->add_option("--d2", dis_d2, "Candidate entity collection")->required();
    cmd_disambiguate->add_option("--format", dis_format, "csv|jsonl");
    cmd_disambiguate->add_option("--teacher", dis_teacher, "Teacher file (select strategy)");
    cmd_disambiguate->add_option("--template", dis_template, "Template file (select strategy)");
    cmd_disambiguate->add_option("--out", dis_out, "Refined knowledge JSONL")->required();

    // --- evaluate ---
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Score predictions against truth");
    std::string eval_knowledge, eval_tuples, eval_d1, eval_d2, eval_format, eval_out, eval_csv;
    std::string eval_pairs, eval_truth_pairs, eval_dataset;
    cmd_evaluate->add_option("--knowledge", eval_knowledge, "Knowledge JSONL (SELECT eval)");
    cmd_evaluate->add_option("--tuples", eval_tuples, "Truth tuples JSONL (SELECT eval)");
    cmd_evaluate->add_option("--d1", eval_d1, "Query entity collection");
    cmd_evaluate->add_option("--d2", eval_d2, "Candidate entity collection");
    cmd_evaluate->add_option("--format", eval_format, "csv|jsonl");
    cmd_evaluate->add_option("--pairwise", eval_pairs, "Predicted pairwise records (MATCH eval)");
    cmd_evaluate->add_option("--truth-pairwise", eval_truth_pairs, "Truth pairwise records");
    cmd_evaluate->add_option("--dataset-name", eval_dataset, "Label for the per-dataset breakdown");
    cmd_evaluate->add_option("--out", eval_out, "Report JSON output");
    cmd_evaluate->add_option("--csv", eval_csv, "Optional CSV export (f1 and stage seconds)");

    // --- stats ---
    auto* cmd_stats = app.add_subcommand("stats", "Prompt-shape statistics for a tuple pool");
    std::string stats_in, stats_d1, stats_d2, stats_format, stats_template, stats_out;
    cmd_stats->add_option("--in", stats_in, "Tuple pool JSONL")->required();
    cmd_stats->add_option("--d1", stats_d1, "Query entity collection")->required();
    cmd_stats->add_option("--d2", stats_d2, "Candidate entity collection")->required();
    cmd_stats->add_option("--format", stats_format, "csv|jsonl");
    cmd_stats->add_option("--template", stats_template, "Prompt template JSON file");
    cmd_stats->add_option("--out", stats_out, "Stats JSON output");

    // --- run ---
    auto* cmd_run = app.add_subcommand("run", "Run the full pipeline from a config file");

    // --- mock-classifier (external pairwise-classifier contract) ---
    auto* cmd_mock = app.add_subcommand(
        "mock-classifier", "Builtin threshold classifier behind the external contract");
    std::vector<std::string> mock_args;
    cmd_mock->add_option("args", mock_args, "train <pairs> <model-dir> | predict <pairs> <model-dir> <out>")
        ->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_load->parsed()) {
            auto entities = load_source(load_in, load_format);
            save_entities(load_out, entities);
            std::cout << "loaded " << entities.size() << " entities -> " << load_out << "\n";
        } else if (cmd_block->parsed()) {
            auto d1 = load_source(block_d1, block_format);
            auto d2 = load_source(block_d2, block_format);
            auto tuples = block_lexical(d1, d2, block_top_n);
            save_tuples(block_out, tuples);
            std::cout << "blocked " << tuples.size() << " tuples -> " << block_out << "\n";
        } else if (cmd_select->parsed()) {
            auto d1 = load_source(sel_d1, sel_format);
            auto d2 = load_source(sel_d2, sel_format);
            auto pool = load_tuples(sel_in, d1, d2);
            if (sel_pool_fraction < 1.0) {
                std::sort(pool.begin(), pool.end(),
                          [](const Tuple& a, const Tuple& b) { return a.key() < b.key(); });
                Rng rng(derive_seed(global.seed, "pool"));
                rng.shuffle(pool);
                auto keep = static_cast<std::size_t>(
                    std::ceil(sel_pool_fraction * static_cast<double>(pool.size()) - 1e-9));
                pool.resize(std::max<std::size_t>(1, std::min(keep, pool.size())));
            }
            SelectionConfig config;
            config.strategy = selection_strategy_from_string(sel_strategy);
            config.p_fraction = sel_p;
            config.n_fraction = sel_n;
            config.bins = sel_bins;
            config.seed = global.seed;
            SelectionOutcome outcome = select(pool, config);
            save_selection(sel_training, sel_testing, outcome);
            std::cout << "training " << outcome.training.size() << ", testing "
                      << outcome.testing.size();
            if (outcome.positive_ratio) std::cout << ", positive_ratio " << *outcome.positive_ratio;
            std::cout << "\n";
            for (const std::string& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
        } else if (cmd_annotate->parsed()) {
            auto d1 = load_source(ann_d1, ann_format);
            auto d2 = load_source(ann_d2, ann_format);
            auto tuples = load_tuples(ann_in, d1, d2);
            TeacherDescriptor teacher = load_teacher(ann_teacher);
            apply_endpoint_override(teacher);
            if (global.seed_set || teacher.seed == 0) teacher.seed = global.seed;
            PromptTemplate tmpl = template_from_flag(ann_template);
            BatchOptions batch;
            batch.parallelism = global.parallelism;
            batch.failure_threshold = ann_failure_threshold;
            Knowledge knowledge;
            if (teacher.kind == "slm_pipeline") {
                SlmSplitPlan plan;
                plan.x_fraction = teacher.x_fraction;
                plan.llm_teacher = teacher.members.front();
                plan.classifier = teacher.classifier_cmd.empty()
                                      ? std::shared_ptr<PairwiseClassifier>(new ThresholdClassifier())
                                      : std::shared_ptr<PairwiseClassifier>(
                                            new CommandClassifier(teacher.classifier_cmd));
                plan.work_dir = fs::path(global.out_dir) / "slm";
                plan.batch = batch;
                SlmAnnotation result = slm_teacher_annotate(tuples, plan, teacher.seed);
                knowledge = std::move(result.knowledge);
                std::cerr << "slm timings: llm " << result.timings.llm_annotation_s << "s, finetune "
                          << result.timings.finetune_s << "s, predict " << result.timings.predict_s
                          << "s\n";
            } else {
                auto t = make_teacher(teacher);
                knowledge = annotate_batch(tuples, *t, tmpl, batch);
            }
            save_knowledge(ann_out, knowledge);
            std::cout << "annotated " << knowledge.results.size() << " tuples -> " << ann_out << "\n";
        } else if (cmd_sft->parsed()) {
            auto d1 = load_source(sft_args.d1, sft_args.format);
            auto d2 = load_source(sft_args.d2, sft_args.format);
            auto tuples = load_tuples(sft_args.tuples, d1, d2);
            Knowledge knowledge = load_knowledge(sft_args.knowledge);
            SftBuild built = build_sft(tuples, knowledge, template_from_flag(sft_args.template_path),
                                       sft_with_explanation);
            save_sft(sft_args.out, built.records);
            if (!sft_args.export_job.empty()) {
                export_training_job(sft_args.out, TrainingJobKind::Sft, Json::object(),
                                    sft_args.export_job);
            }
            std::cout << built.records.size() << " sft records";
            if (built.skipped_abstain > 0) std::cout << " (skipped " << built.skipped_abstain
                                                     << " abstains)";
            std::cout << " -> " << sft_args.out << "\n";
        } else if (cmd_dpo->parsed()) {
            auto d1 = load_source(dpo_args.d1, dpo_args.format);
            auto d2 = load_source(dpo_args.d2, dpo_args.format);
            auto tuples = load_tuples(dpo_args.tuples, d1, d2);
            Knowledge knowledge = load_knowledge(dpo_args.knowledge);
            DpoBuild built =
                build_dpo(tuples, knowledge, template_from_flag(dpo_args.template_path),
                          rejected_mode_from_string(dpo_rejected_mode), global.seed);
            save_dpo(dpo_args.out, built.records);
            if (!dpo_args.export_job.empty()) {
                export_training_job(dpo_args.out, TrainingJobKind::Dpo, Json::object(),
                                    dpo_args.export_job);
            }
            std::cout << built.records.size() << " dpo records";
            if (built.skipped_abstain > 0) std::cout << " (skipped " << built.skipped_abstain
                                                     << " abstains)";
            std::cout << " -> " << dpo_args.out << "\n";
        } else if (cmd_pairwise->parsed()) {
            auto d1 = load_source(pw_args.d1, pw_args.format);
            auto d2 = load_source(pw_args.d2, pw_args.format);
            auto tuples = load_tuples(pw_args.tuples, d1, d2);
            Knowledge knowledge = load_knowledge(pw_args.knowledge);
            auto records = build_pairwise(tuples, knowledge);
            save_pairwise(pw_args.out, records);
            std::cout << records.size() << " pairwise records -> " << pw_args.out << "\n";
        } else if (cmd_grpo->parsed()) {
            RewardWeights weights = parse_weights(grpo_weights);
            if (grpo_target_source != "teacher" && grpo_target_source != "truth") {
                fail("ConfigError", "--target-source must be teacher or truth");
            }
            std::vector<GrpoScore> scores;
            for (const Json& line : read_jsonl(grpo_in)) {
                GrpoScore s;
                s.tuple_key = line.value("tuple", "");
                s.completion = line.at("completion").get<std::string>();
                const int target = line.at("target").get<int>();
                const int k = line.at("k").get<int>();
                s.r_digit = reward_digit(s.completion);
                s.r_length = reward_length(s.completion);
                s.r_answer = reward_answer(s.completion, target, k);
                s.r_total = reward_total(s.completion, target, k, weights);
                scores.push_back(std::move(s));
            }
            if (!grpo_out.empty()) save_grpo_scores(grpo_out, scores);
            Json summary{{"records", scores.size()}, {"target_source", grpo_target_source}};
            std::cout << summary.dump() << "\n";
            for (const GrpoScore& s : scores) {
                std::cout << s.tuple_key << " r_total=" << s.r_total << "\n";
            }
        } else if (cmd_disambiguate->parsed()) {
            auto d1 = load_source(dis_d1, dis_format);
            auto d2 = load_source(dis_d2, dis_format);
            auto tuples = load_tuples(dis_tuples, d1, d2);
            auto predictions = load_pair_predictions(dis_in);
            std::map<std::string, std::map<std::string, int>> by_query;
            for (const auto& p : predictions) by_query[p.query_id][p.candidate_id] = p.label;
            std::map<std::string, std::vector<int>> positives;
            for (const Tuple& t : tuples) {
                auto& slots = positives[t.key()];
                auto it = by_query.find(t.key());
                if (it == by_query.end()) continue;
                for (std::size_t i = 0; i < t.candidates.size(); ++i) {
                    auto cit = it->second.find(t.candidates[i].entity.id);
                    if (cit != it->second.end() && cit->second == 1) {
                        slots.push_back(static_cast<int>(i) + 1);
                    }
                }
            }
            Knowledge refined;
            if (dis_strategy == "umc") {
                std::vector<MatchCandidate> matches;
                for (const Tuple& t : tuples) {
                    for (int index : positives[t.key()]) {
                        const auto& c = t.candidates[static_cast<std::size_t>(index - 1)];
                        matches.push_back({t.key(), c.entity.id, c.score});
                    }
                }
                auto retained = disambiguate_umc(std::move(matches));
                std::map<std::string, std::string> winner;
                for (const auto& m : retained) winner[m.query_id] = m.candidate_id;
                refined.teacher = "disambiguate_umc";
                for (const Tuple& t : tuples) {
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
            } else if (dis_strategy == "select") {
                if (dis_teacher.empty()) {
                    fail("ConfigError", "disambiguate --strategy select needs --teacher");
                }
                TeacherDescriptor teacher = load_teacher(dis_teacher);
                apply_endpoint_override(teacher);
                if (global.seed_set || teacher.seed == 0) teacher.seed = global.seed;
                auto t = make_teacher(teacher);
                refined = disambiguate_select(tuples, positives, *t, template_from_flag(dis_template));
            } else {
                fail("ConfigError", "unknown disambiguate strategy '" + dis_strategy + "'");
            }
            save_knowledge(dis_out, refined);
            std::cout << "disambiguated " << refined.results.size() << " tuples -> " << dis_out
                      << "\n";
        } else if (cmd_evaluate->parsed()) {
            EvalReport report;
            if (!eval_pairs.empty()) {
                if (eval_truth_pairs.empty()) {
                    fail("ConfigError", "pairwise evaluation needs --truth-pairwise");
                }
                report = eval_pairwise(load_pairwise(eval_pairs), load_pairwise(eval_truth_pairs),
                                       eval_dataset);
            } else {
                if (eval_knowledge.empty() || eval_tuples.empty() || eval_d1.empty() ||
                    eval_d2.empty()) {
                    fail("ConfigError",
                         "SELECT evaluation needs --knowledge, --tuples, --d1 and --d2");
                }
                auto d1 = load_source(eval_d1, eval_format);
                auto d2 = load_source(eval_d2, eval_format);
                auto tuples = load_tuples(eval_tuples, d1, d2);
                report = eval_select(load_knowledge(eval_knowledge), tuples, eval_dataset);
            }
            Json out = eval_report_to_json(report);
            if (!eval_out.empty()) write_json_file(eval_out, out);
            if (!eval_csv.empty()) {
                std::string csv = "metric,value\nf1," + std::to_string(report.f1) + "\nprecision," +
                                  std::to_string(report.precision) + "\nrecall," +
                                  std::to_string(report.recall) + "\n";
                for (const auto& [stage, s] : report.stage_timings_s) {
                    csv += stage + "_s," + std::to_string(s) + "\n";
                }
                write_text_file(eval_csv, csv);
            }
            std::cout << out.dump() << "\n" << render_eval_table(report);
        } else if (cmd_stats->parsed()) {
            auto d1 = load_source(stats_d1, stats_format);
            auto d2 = load_source(stats_d2, stats_format);
            auto tuples = load_tuples(stats_in, d1, d2);
            PromptStats stats = stats_report(tuples, template_from_flag(stats_template));
            Json out = prompt_stats_to_json(stats);
            if (!stats_out.empty()) write_json_file(stats_out, out);
            std::cout << out.dump() << "\n" << render_stats_table(stats);
        } else if (cmd_run->parsed()) {
            if (global.config.empty()) {
                fail("ConfigError", "run needs --config <pipeline.json>");
            }
            std::optional<fs::path> out_dir;
            if (global.out_dir != ".") out_dir = fs::path(global.out_dir);
            std::optional<std::uint64_t> seed;
            if (global.seed_set) seed = global.seed;
            Json manifest = run_pipeline(global.config, out_dir, seed);
            std::cout << manifest.at("summary").dump() << "\n";
        } else if (cmd_mock->parsed()) {
            ThresholdClassifier classifier;
            if (mock_args.size() == 3 && mock_args[0] == "train") {
                classifier.train(mock_args[1], mock_args[2]);
            } else if (mock_args.size() == 4 && mock_args[0] == "predict") {
                auto predictions = classifier.predict(mock_args[1], mock_args[2]);
                save_pair_predictions(mock_args[3], predictions);
            } else {
                fail("ConfigError",
                     "usage: mock-classifier train <pairs> <model-dir> | predict <pairs> "
                     "<model-dir> <out>");
            }
        }
    } catch (const Error& e) {
        std::cerr << Json{{"error", e.code()}, {"message", e.message()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
