#include "erdistill/teaching.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include <httplib.h>

#include "erdistill/distillation.hpp"
#include "erdistill/errors.hpp"
#include "erdistill/rng.hpp"

namespace erdistill {

namespace {

bool prompt_family(const std::string& kind) {
    return kind == "llm_endpoint" || kind == "mock_oracle" || kind == "multi";
}

}  // namespace

void validate_descriptor(const TeacherDescriptor& d) {
    if (d.kind != "llm_endpoint" && d.kind != "slm_pipeline" && d.kind != "multi" &&
        d.kind != "mock_oracle") {
        fail("ConfigError", "unknown teacher kind '" + d.kind + "'");
    }
    if (d.kind == "llm_endpoint" && d.endpoint.empty()) {
        fail("ConfigError", "llm_endpoint teacher needs an endpoint URL");
    }
    if (d.noise_rate < 0.0 || d.noise_rate > 1.0) {
        fail("ConfigError", "teacher noise_rate must lie in [0,1]");
    }
    if (d.kind == "multi") {
        if (d.members.size() < 2) {
            fail("ConfigError", "multi teacher needs at least 2 members");
        }
        bool family = prompt_family(d.members.front().kind);
        for (const auto& m : d.members) {
            if (m.kind == "multi") fail("ConfigError", "multi teachers do not nest");
            if (prompt_family(m.kind) != family) {
                fail("ConfigError", "multi teacher members must share one kind-family");
            }
            validate_descriptor(m);
        }
    }
    if (d.kind == "slm_pipeline") {
        if (d.members.size() != 1) {
            fail("ConfigError", "slm_pipeline needs exactly one member: the inner LLM teacher");
        }
        if (!(d.x_fraction > 0.0 && d.x_fraction < 1.0)) {
            fail("ConfigError", "slm_pipeline x_fraction must lie in (0,1)");
        }
        validate_descriptor(d.members.front());
    }
}

TeacherDescriptor teacher_from_json(const Json& j) {
    TeacherDescriptor d;
    d.kind = j.value("kind", "mock_oracle");
    d.model_id = j.value("model_id", "");
    d.endpoint = j.value("endpoint", "");
    d.noise_rate = j.value("noise_rate", 0.0);
    d.seed = j.value("seed", std::uint64_t{0});
    d.simulated_latency_s = j.value("simulated_latency_s", 0.0);
    d.temperature = j.value("temperature", 0.0);
    d.retry_base_ms = j.value("retry_base_ms", 1000);
    d.x_fraction = j.value("x_fraction", 0.2);
    d.classifier_cmd = j.value("classifier_cmd", "");
    if (j.contains("members")) {
        for (const Json& m : j.at("members")) d.members.push_back(teacher_from_json(m));
    }
    validate_descriptor(d);
    return d;
}

Json teacher_to_json(const TeacherDescriptor& d) {
    Json j{{"kind", d.kind}};
    if (!d.model_id.empty()) j["model_id"] = d.model_id;
    if (!d.endpoint.empty()) j["endpoint"] = d.endpoint;
    if (d.noise_rate != 0.0) j["noise_rate"] = d.noise_rate;
    j["seed"] = d.seed;
    if (d.simulated_latency_s != 0.0) j["simulated_latency_s"] = d.simulated_latency_s;
    if (d.temperature != 0.0) j["temperature"] = d.temperature;
    if (d.retry_base_ms != 1000) j["retry_base_ms"] = d.retry_base_ms;
    if (d.kind == "slm_pipeline") {
        j["x_fraction"] = d.x_fraction;
        if (!d.classifier_cmd.empty()) j["classifier_cmd"] = d.classifier_cmd;
    }
    if (!d.members.empty()) {
        Json members = Json::array();
        for (const auto& m : d.members) members.push_back(teacher_to_json(m));
        j["members"] = std::move(members);
    }
    return j;
}

TeacherDescriptor load_teacher(const std::filesystem::path& path) {
    return teacher_from_json(read_json_file(path));
}

// --- mock oracle -----------------------------------------------------------

AnnotationResult mock_oracle(const Tuple& t, double noise_rate, std::uint64_t seed,
                             InstructionKind instruction, double simulated_latency_s) {
    if (!t.truth) {
        fail("TruthRequired", "mock oracle needs truth on tuple '" + t.key() + "'");
    }
    const int k = static_cast<int>(t.candidates.size());
    Rng rng(derive_seed(seed, t.key()));
    int choice = *t.truth;
    if (noise_rate > 0.0 && rng.uniform_real() < noise_rate) {
        // Uniform over {0..k} \ {truth}.
        int wrong = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
        if (wrong >= choice) ++wrong;
        choice = wrong;
    }
    AnnotationResult r;
    r.tuple_key = t.key();
    r.choice = choice;
    r.teacher_id = "mock_oracle";
    r.elapsed_s = simulated_latency_s;
    if (instruction == InstructionKind::AnswerPlusExplanation) {
        r.explanation = choice == 0
                            ? "None of the candidates shares the query's key attributes."
                            : "Candidate " + std::to_string(choice) +
                                  " shares the query's key attributes.";
        r.completion = *r.explanation + " Answer: [" + std::to_string(choice) + "]";
    } else {
        r.completion = "Answer: [" + std::to_string(choice) + "]";
    }
    return r;
}

// --- teachers ---------------------------------------------------------------

namespace {

class MockOracleTeacher : public Teacher {
public:
    explicit MockOracleTeacher(TeacherDescriptor d) : d_(std::move(d)) {}

    AnnotationResult annotate(const Tuple& t, const PromptTemplate& tmpl) const override {
        AnnotationResult r =
            mock_oracle(t, d_.noise_rate, d_.seed, tmpl.instruction_kind, d_.simulated_latency_s);
        if (!d_.model_id.empty()) r.teacher_id = d_.model_id;
        return r;
    }

    std::string id() const override { return d_.model_id.empty() ? "mock_oracle" : d_.model_id; }

private:
    TeacherDescriptor d_;
};

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        fail("ConfigError", "endpoint URL '" + url + "' needs a scheme");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// Pulls the completion text out of the common chat-completion response
// shapes; empty optional when none is present.
std::optional<std::string> extract_completion(const Json& body) {
    if (body.contains("choices") && body.at("choices").is_array() &&
        !body.at("choices").empty()) {
        const Json& first = body.at("choices").front();
        if (first.contains("message") && first.at("message").contains("content")) {
            return first.at("message").at("content").get<std::string>();
        }
        if (first.contains("text")) return first.at("text").get<std::string>();
    }
    if (body.contains("message") && body.at("message").is_object() &&
        body.at("message").contains("content")) {
        return body.at("message").at("content").get<std::string>();
    }
    for (const char* key : {"content", "completion", "response"}) {
        if (body.contains(key) && body.at(key).is_string()) {
            return body.at(key).get<std::string>();
        }
    }
    return std::nullopt;
}

class EndpointTeacher : public Teacher {
public:
    explicit EndpointTeacher(TeacherDescriptor d) : d_(std::move(d)) {}

    AnnotationResult annotate(const Tuple& t, const PromptTemplate& tmpl) const override {
        RenderedPrompt prompt = render_select(t, tmpl);
        Json request{{"model", d_.model_id},
                     {"messages", Json::array({Json{{"role", "user"}, {"content", prompt.text}}})},
                     {"temperature", d_.temperature}};
        const std::string payload = request.dump();
        ParsedUrl url = parse_url(d_.endpoint);

        const auto start = std::chrono::steady_clock::now();
        std::string body;
        std::string last_error;
        bool got_response = false;
        for (int attempt = 0; attempt < 3; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(d_.retry_base_ms << (attempt - 1)));
            }
            httplib::Client client(url.base);
            client.set_connection_timeout(30, 0);
            client.set_read_timeout(120, 0);
            auto res = client.Post(url.path, payload, "application/json");
            if (!res) {
                last_error = "transport error (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            body = res->body;
            got_response = true;
            break;
        }
        if (!got_response) {
            fail("EndpointUnreachable",
                 "endpoint '" + d_.endpoint + "' failed after 3 attempts: " + last_error);
        }
        Json parsed;
        try {
            parsed = Json::parse(body);
        } catch (const Json::parse_error&) {
            fail("MalformedResponse", "endpoint '" + d_.endpoint + "' returned non-JSON body");
        }
        auto completion = extract_completion(parsed);
        if (!completion) {
            fail("MalformedResponse",
                 "endpoint '" + d_.endpoint + "' response carries no completion text");
        }
        const auto end = std::chrono::steady_clock::now();

        AnnotationResult r;
        r.tuple_key = t.key();
        r.completion = *completion;
        r.choice = parse_choice(*completion, static_cast<int>(t.candidates.size()));
        if (tmpl.instruction_kind == InstructionKind::AnswerPlusExplanation && r.choice) {
            r.explanation = *completion;
        }
        r.teacher_id = id();
        r.elapsed_s = std::chrono::duration<double>(end - start).count();
        return r;
    }

    std::string id() const override {
        return d_.model_id.empty() ? d_.endpoint : d_.model_id;
    }

private:
    TeacherDescriptor d_;
};

class CommitteeTeacher : public Teacher {
public:
    explicit CommitteeTeacher(const TeacherDescriptor& d) : d_(d) {
        for (std::size_t i = 0; i < d.members.size(); ++i) {
            TeacherDescriptor member = d.members[i];
            if (member.seed == 0) {
                member.seed = derive_seed(d.seed, "member-" + std::to_string(i));
            }
            members_.push_back(make_teacher(member));
        }
    }

    AnnotationResult annotate(const Tuple& t, const PromptTemplate& tmpl) const override {
        std::vector<AnnotationResult> results;
        results.reserve(members_.size());
        for (const auto& m : members_) results.push_back(m->annotate(t, tmpl));
        AnnotationResult r = vote(results, derive_seed(d_.seed, "vote:" + t.key()));
        r.teacher_id = id();
        return r;
    }

    std::string id() const override {
        return d_.model_id.empty() ? "multi" : d_.model_id;
    }

private:
    TeacherDescriptor d_;
    std::vector<std::unique_ptr<Teacher>> members_;
};

}  // namespace

std::unique_ptr<Teacher> make_teacher(const TeacherDescriptor& d) {
    validate_descriptor(d);
    if (d.kind == "mock_oracle") return std::make_unique<MockOracleTeacher>(d);
    if (d.kind == "llm_endpoint") return std::make_unique<EndpointTeacher>(d);
    if (d.kind == "multi") return std::make_unique<CommitteeTeacher>(d);
    fail("ConfigError",
         "teacher kind 'slm_pipeline' is batch-level; use slm_teacher_annotate");
}

AnnotationResult vote(const std::vector<AnnotationResult>& results, std::uint64_t seed) {
    if (results.empty()) fail("ConfigError", "vote needs at least one result");
    const std::string& key = results.front().tuple_key;
    for (const auto& r : results) {
        if (r.tuple_key != key) {
            fail("MixedTuples",
                 "vote saw tuples '" + key + "' and '" + r.tuple_key + "'");
        }
    }
    std::map<int, int> tally;  // choice -> votes; Abstains excluded
    double elapsed = 0.0;
    for (const auto& r : results) {
        elapsed += r.elapsed_s;
        if (r.choice) ++tally[*r.choice];
    }
    AnnotationResult out;
    out.tuple_key = key;
    out.teacher_id = "vote";
    out.elapsed_s = elapsed;
    if (tally.empty()) {
        out.completion = "";
        return out;  // every member abstained
    }
    int best = 0;
    for (const auto& [choice, votes] : tally) best = std::max(best, votes);
    std::vector<int> top;  // ascending: std::map iterates in key order
    for (const auto& [choice, votes] : tally) {
        if (votes == best) top.push_back(choice);
    }
    int winner = top.front();
    if (top.size() > 1) {
        Rng rng(seed);
        winner = top[static_cast<std::size_t>(rng.uniform_int(top.size()))];
    }
    out.choice = winner;
    out.completion = "[" + std::to_string(winner) + "]";
    // Keep the explanation of a member that voted for the winner, if any.
    for (const auto& r : results) {
        if (r.choice && *r.choice == winner && r.explanation) {
            out.explanation = r.explanation;
            break;
        }
    }
    return out;
}

Knowledge annotate_batch(const std::vector<Tuple>& tuples, const Teacher& teacher,
                         const PromptTemplate& tmpl, const BatchOptions& options) {
    if (options.parallelism < 1) fail("ConfigError", "parallelism must be >= 1");
    struct Slot {
        AnnotationResult result;
        std::string error;
        bool failed = false;
    };
    std::vector<Slot> slots(tuples.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tuples.size()) break;
            try {
                slots[i].result = teacher.annotate(tuples[i], tmpl);
            } catch (const std::exception& e) {
                slots[i].failed = true;
                slots[i].error = e.what();
            }
        }
    };
    const int threads = std::min<int>(options.parallelism, static_cast<int>(tuples.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::size_t failures = 0;
    std::string first_error;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        if (slots[i].failed) {
            ++failures;
            if (first_error.empty()) first_error = slots[i].error;
        }
    }
    if (!tuples.empty() &&
        static_cast<double>(failures) >
            options.failure_threshold * static_cast<double>(tuples.size())) {
        fail("BatchFailed", std::to_string(failures) + "/" + std::to_string(tuples.size()) +
                                " annotations failed (threshold " +
                                std::to_string(options.failure_threshold) + "); first: " +
                                first_error);
    }

    Knowledge out;
    out.teacher = teacher.id();
    out.instruction = tmpl.instruction_kind;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        AnnotationResult r;
        if (slots[i].failed) {
            r.tuple_key = tuples[i].key();
            r.teacher_id = teacher.id();
            r.completion = "[annotation failed] " + slots[i].error;
        } else {
            r = std::move(slots[i].result);
        }
        out.total_elapsed_s += r.elapsed_s;
        out.insert(std::move(r));
    }
    return out;
}

// --- pairwise classifiers ----------------------------------------------------

std::vector<PairPrediction> load_pair_predictions(const std::filesystem::path& path) {
    std::vector<PairPrediction> out;
    for (const Json& j : read_jsonl(path)) {
        PairPrediction p;
        p.query_id = j.at("query").get<std::string>();
        p.candidate_id = j.at("candidate").get<std::string>();
        p.label = j.at("label").get<int>();
        p.score = j.value("score", 0.0);
        if (p.label != 0 && p.label != 1) fail("ParseError", "prediction label must be 0 or 1");
        out.push_back(std::move(p));
    }
    return out;
}

void save_pair_predictions(const std::filesystem::path& path,
                           const std::vector<PairPrediction>& predictions) {
    std::vector<Json> lines;
    lines.reserve(predictions.size());
    for (const auto& p : predictions) {
        lines.push_back(Json{{"query", p.query_id},
                             {"candidate", p.candidate_id},
                             {"label", p.label},
                             {"score", p.score}});
    }
    write_jsonl(path, lines);
}

void ThresholdClassifier::train(const std::filesystem::path& pairs,
                                const std::filesystem::path& model_dir) {
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const PairwiseRecord& r : load_pairwise(pairs)) {
        if (r.label == 1) {
            pos_sum += r.score;
            ++pos_n;
        } else {
            neg_sum += r.score;
            ++neg_n;
        }
    }
    double threshold = 0.5;
    if (pos_n > 0 && neg_n > 0) {
        threshold = (pos_sum / static_cast<double>(pos_n) + neg_sum / static_cast<double>(neg_n)) / 2.0;
    } else if (pos_n > 0) {
        threshold = pos_sum / static_cast<double>(pos_n);
    } else if (neg_n > 0) {
        threshold = std::nextafter(neg_sum / static_cast<double>(neg_n), 2.0);
    }
    std::filesystem::create_directories(model_dir);
    write_json_file(model_dir / "model.json", Json{{"kind", "threshold"}, {"threshold", threshold}});
}

std::vector<PairPrediction> ThresholdClassifier::predict(const std::filesystem::path& pairs,
                                                         const std::filesystem::path& model_dir) {
    const auto model_path = model_dir / "model.json";
    if (!std::filesystem::exists(model_path)) {
        fail("ClassifierUnavailable", "no trained model at '" + model_path.string() + "'");
    }
    const double threshold = read_json_file(model_path).at("threshold").get<double>();
    std::vector<PairPrediction> out;
    for (const PairwiseRecord& r : load_pairwise(pairs)) {
        PairPrediction p;
        p.query_id = r.query_id;
        p.candidate_id = r.candidate_id;
        p.label = r.score >= threshold ? 1 : 0;
        p.score = r.score;
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

void run_command(const std::string& command) {
    int rc = std::system(command.c_str());
    if (rc != 0) {
        fail("ClassifierUnavailable",
             "classifier command failed (exit " + std::to_string(rc) + "): " + command);
    }
}

}  // namespace

void CommandClassifier::train(const std::filesystem::path& pairs,
                              const std::filesystem::path& model_dir) {
    std::filesystem::create_directories(model_dir);
    run_command(command_ + " train " + shell_quote(pairs.string()) + " " +
                shell_quote(model_dir.string()));
}

std::vector<PairPrediction> CommandClassifier::predict(const std::filesystem::path& pairs,
                                                       const std::filesystem::path& model_dir) {
    const auto out_path = model_dir / "predictions.jsonl";
    run_command(command_ + " predict " + shell_quote(pairs.string()) + " " +
                shell_quote(model_dir.string()) + " " + shell_quote(out_path.string()));
    if (!std::filesystem::exists(out_path)) {
        fail("ClassifierUnavailable", "classifier wrote no predictions to '" + out_path.string() + "'");
    }
    return load_pair_predictions(out_path);
}

// --- two-stage SLM teacher ----------------------------------------------------

SlmAnnotation slm_teacher_annotate(const std::vector<Tuple>& training, const SlmSplitPlan& plan,
                                   std::uint64_t seed) {
    if (training.empty()) fail("ConfigError", "slm_teacher_annotate needs a non-empty training set");
    if (!(plan.x_fraction > 0.0 && plan.x_fraction < 1.0)) {
        fail("ConfigError", "x_fraction must lie in (0,1)");
    }
    if (!plan.classifier) fail("ClassifierUnavailable", "no pairwise classifier configured");

    // Deterministic X/Y split in key order, shuffled by the stage seed.
    std::vector<std::size_t> order(training.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return training[a].key() < training[b].key();
    });
    Rng rng(derive_seed(seed, "slm-split"));
    rng.shuffle(order);
    const std::size_t x_count = std::min(
        training.size() - 1,
        static_cast<std::size_t>(std::ceil(plan.x_fraction * static_cast<double>(training.size()) -
                                           1e-9)));
    std::vector<Tuple> x_part, y_part;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < x_count ? x_part : y_part).push_back(training[order[i]]);
    }

    TeacherDescriptor llm = plan.llm_teacher;
    if (llm.seed == 0) llm.seed = derive_seed(seed, "slm-llm");
    auto teacher = make_teacher(llm);
    PromptTemplate tmpl = PromptTemplate::select_default();
    Knowledge x_knowledge = annotate_batch(x_part, *teacher, tmpl, plan.batch);

    SlmTimings timings;
    timings.x_fraction = plan.x_fraction;
    timings.llm_annotation_s = x_knowledge.total_elapsed_s;

    std::filesystem::path work =
        plan.work_dir.empty() ? std::filesystem::temp_directory_path() / "erdistill-slm"
                              : plan.work_dir;
    std::filesystem::create_directories(work);
    const auto train_pairs_path = work / "pairs_train.jsonl";
    const auto predict_pairs_path = work / "pairs_predict.jsonl";
    const auto model_dir = work / "model";

    save_pairwise(train_pairs_path, build_pairwise(x_part, x_knowledge));

    // Y-part pairs are written unlabeled (label 0 placeholder); the
    // classifier only reads the texts and scores at predict time.
    {
        Knowledge placeholder;
        placeholder.teacher = "placeholder";
        for (const Tuple& t : y_part) {
            AnnotationResult r;
            r.tuple_key = t.key();
            r.choice = 0;
            placeholder.insert(std::move(r));
        }
        save_pairwise(predict_pairs_path, build_pairwise(y_part, placeholder));
    }

    const auto train_start = std::chrono::steady_clock::now();
    plan.classifier->train(train_pairs_path, model_dir);
    const auto train_end = std::chrono::steady_clock::now();
    timings.finetune_s = std::chrono::duration<double>(train_end - train_start).count();

    const auto predict_start = std::chrono::steady_clock::now();
    std::vector<PairPrediction> predictions =
        plan.classifier->predict(predict_pairs_path, model_dir);
    const auto predict_end = std::chrono::steady_clock::now();
    timings.predict_s = std::chrono::duration<double>(predict_end - predict_start).count();

    std::map<std::string, std::map<std::string, int>> predicted;  // query -> candidate -> label
    for (const auto& p : predictions) predicted[p.query_id][p.candidate_id] = p.label;

    Knowledge merged;
    merged.teacher = "slm_pipeline(" + teacher->id() + ")";
    merged.instruction = tmpl.instruction_kind;
    for (auto& [key, result] : x_knowledge.results) {
        merged.total_elapsed_s += result.elapsed_s;
        merged.insert(result);
    }
    for (const Tuple& t : y_part) {
        auto it = predicted.find(t.key());
        AnnotationResult r;
        r.tuple_key = t.key();
        r.teacher_id = merged.teacher;
        std::vector<int> positives;
        if (it != predicted.end()) {
            for (std::size_t i = 0; i < t.candidates.size(); ++i) {
                auto cit = it->second.find(t.candidates[i].entity.id);
                if (cit != it->second.end() && cit->second == 1) {
                    positives.push_back(static_cast<int>(i) + 1);
                }
            }
        }
        r.positives = positives;
        // choice: the single positive, None when empty, else the
        // highest-scoring positive (lowest canonical index).
        r.choice = positives.empty() ? 0 : positives.front();
        r.completion = "[classifier] positives:";
        for (int p : positives) r.completion += " " + std::to_string(p);
        merged.insert(std::move(r));
    }
    return {std::move(merged), timings};
}

// --- knowledge file IO ---------------------------------------------------------

Json annotation_to_json(const AnnotationResult& r) {
    Json j;
    j["tuple"] = r.tuple_key;
    if (r.choice) {
        j["choice"] = *r.choice;
    } else {
        j["choice"] = "abstain";
    }
    if (!r.positives.empty()) j["positives"] = r.positives;
    if (r.explanation) j["explanation"] = *r.explanation;
    j["completion"] = r.completion;
    j["teacher"] = r.teacher_id;
    j["elapsed_s"] = r.elapsed_s;
    return j;
}

AnnotationResult annotation_from_json(const Json& j) {
    AnnotationResult r;
    r.tuple_key = j.at("tuple").get<std::string>();
    const Json& choice = j.at("choice");
    if (choice.is_string()) {
        if (choice.get<std::string>() != "abstain") {
            fail("ParseError", "knowledge choice must be an integer or \"abstain\"");
        }
    } else {
        r.choice = choice.get<int>();
    }
    if (j.contains("positives")) r.positives = j.at("positives").get<std::vector<int>>();
    if (j.contains("explanation")) r.explanation = j.at("explanation").get<std::string>();
    r.completion = j.value("completion", "");
    r.teacher_id = j.value("teacher", "");
    r.elapsed_s = j.value("elapsed_s", 0.0);
    return r;
}

void save_knowledge(const std::filesystem::path& path, const Knowledge& k) {
    std::vector<Json> lines;
    lines.reserve(k.results.size());
    for (const auto& [key, r] : k.results) lines.push_back(annotation_to_json(r));
    write_jsonl(path, lines);
}

Knowledge load_knowledge(const std::filesystem::path& path) {
    Knowledge k;
    for (const Json& j : read_jsonl(path)) {
        AnnotationResult r = annotation_from_json(j);
        if (k.teacher.empty()) k.teacher = r.teacher_id;
        k.total_elapsed_s += r.elapsed_s;
        k.insert(std::move(r));
    }
    return k;
}

}  // namespace erdistill
