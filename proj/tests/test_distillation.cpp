#include <doctest.h>

#include <algorithm>
#include <set>

#include "erdistill/distillation.hpp"
#include "erdistill/errors.hpp"
#include "erdistill/rng.hpp"
#include "test_support.hpp"

using namespace erdistill;
using test::scored_tuple;
using test::TempDir;

namespace {

Knowledge knowledge_for(const std::vector<Tuple>& tuples, const std::vector<int>& choices) {
    Knowledge k;
    k.teacher = "test";
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        AnnotationResult r;
        r.tuple_key = tuples[i].key();
        if (choices[i] >= 0) {
            r.choice = choices[i];
            r.completion = "[" + std::to_string(choices[i]) + "]";
        }
        r.teacher_id = "test";
        k.insert(std::move(r));
    }
    return k;
}

}  // namespace

TEST_CASE("build_sft writes the bracketed answer as the single assistant turn") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.74, 0.95, 0.90, 0.70, 0.76})};
    Knowledge k = knowledge_for(tuples, {2});
    SftBuild built = build_sft(tuples, k, PromptTemplate::select_default(), false);
    REQUIRE(built.records.size() == 1);
    const SftRecord& rec = built.records[0];
    REQUIRE(rec.messages.size() == 2);
    CHECK(rec.messages[0].role == "user");
    CHECK(rec.messages[1].role == "assistant");
    CHECK(rec.messages[1].content == "[2]");
    CHECK(rec.tuple_key == "q1");
}

TEST_CASE("build_sft handles None labels and skips abstains with a count") {
    std::vector<Tuple> tuples;
    std::vector<int> choices;
    for (int i = 0; i < 10; ++i) {
        tuples.push_back(scored_tuple("q" + std::to_string(i), {0.8, 0.3}));
        choices.push_back(i < 2 ? -1 : 0);  // two abstains, rest None
    }
    Knowledge k = knowledge_for(tuples, choices);
    SftBuild built = build_sft(tuples, k, PromptTemplate::select_default(), false);
    CHECK(built.records.size() == 8);
    CHECK(built.skipped_abstain == 2);
    for (const auto& rec : built.records) CHECK(rec.messages[1].content == "[0]");
}

TEST_CASE("build_sft with explanations requires and appends them") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9, 0.4})};
    Knowledge k = knowledge_for(tuples, {1});
    CHECK_THROWS_WITH_AS(build_sft(tuples, k, PromptTemplate::select_default(), true),
                         doctest::Contains("MissingExplanation"), Error);

    Knowledge with;
    AnnotationResult r;
    r.tuple_key = "q1";
    r.choice = 1;
    r.explanation = "Both records share the brand and model number.";
    with.insert(r);
    SftBuild built = build_sft(tuples, with, PromptTemplate::select_default(), true);
    CHECK(built.records[0].messages[1].content ==
          "Both records share the brand and model number. [1]");

    // An explanation already ending in the answer is kept as-is.
    Knowledge ends;
    r.explanation = "Same brand, so [1]";
    ends.results.clear();
    ends.insert(r);
    built = build_sft(tuples, ends, PromptTemplate::select_default(), true);
    CHECK(built.records[0].messages[1].content == "Same brand, so [1]");
}

TEST_CASE("build_pairwise flattens a 5-candidate tuple into 5 labeled pairs") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.74, 0.95, 0.90, 0.70, 0.76})};
    Knowledge k = knowledge_for(tuples, {2});
    auto records = build_pairwise(tuples, k);
    REQUIRE(records.size() == 5);
    std::vector<int> labels;
    for (const auto& r : records) labels.push_back(r.label);
    CHECK(labels == std::vector<int>{0, 1, 0, 0, 0});
    CHECK(records[1].query_id == "q1");
    CHECK(records[1].candidate_id == tuples[0].candidates[1].entity.id);
    CHECK(records[1].score == tuples[0].candidates[1].score);
}

TEST_CASE("build_pairwise labels every member of a positive-set") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9, 0.8, 0.7, 0.6, 0.5})};
    Knowledge k;
    AnnotationResult r;
    r.tuple_key = "q1";
    r.choice = 2;
    r.positives = {2, 3};
    k.insert(r);
    auto records = build_pairwise(tuples, k);
    std::vector<int> labels;
    for (const auto& rec : records) labels.push_back(rec.label);
    CHECK(labels == std::vector<int>{0, 1, 1, 0, 0});
}

TEST_CASE("build_pairwise yields k zero-labeled pairs for a None label") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9, 0.8, 0.7, 0.6, 0.5})};
    Knowledge k = knowledge_for(tuples, {0});
    auto records = build_pairwise(tuples, k);
    REQUIRE(records.size() == 5);
    for (const auto& r : records) CHECK(r.label == 0);
}

TEST_CASE("build_pairwise emits exactly the sum of candidate counts") {
    Rng rng(41);
    std::vector<Tuple> tuples;
    std::vector<int> choices;
    std::size_t expected = 0;
    int expected_positives = 0;
    for (int i = 0; i < 20; ++i) {
        const int k = 1 + static_cast<int>(rng.uniform_int(7));
        std::vector<double> scores;
        for (int j = 0; j < k; ++j) scores.push_back(rng.uniform_real());
        tuples.push_back(scored_tuple("q" + std::to_string(i), scores));
        const int choice = static_cast<int>(rng.uniform_int(k + 1));
        choices.push_back(choice);
        expected += static_cast<std::size_t>(k);
        expected_positives += choice >= 1;
    }
    auto records = build_pairwise(tuples, knowledge_for(tuples, choices));
    CHECK(records.size() == expected);
    int positives = 0;
    for (const auto& r : records) positives += r.label;
    CHECK(positives == expected_positives);
}

TEST_CASE("build_dpo draws a rejected option distinct from the chosen one") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.74, 0.95, 0.90, 0.70, 0.76})};
    Knowledge k = knowledge_for(tuples, {2});
    PromptTemplate tmpl = PromptTemplate::select_default();

    std::set<std::string> seen;
    bool saw_option_1 = false;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        DpoBuild built = build_dpo(tuples, k, tmpl, RejectedMode::OneRandom, seed);
        REQUIRE(built.records.size() == 1);
        const DpoRecord& rec = built.records[0];
        CHECK(rec.chosen == "[2]");
        CHECK(rec.rejected != rec.chosen);
        seen.insert(rec.rejected);
        if (rec.rejected == "[1]") saw_option_1 = true;
        // Determinism per seed.
        DpoBuild again = build_dpo(tuples, k, tmpl, RejectedMode::OneRandom, seed);
        CHECK(again.records[0].rejected == rec.rejected);
    }
    CHECK(saw_option_1);           // some seed rejects [1]
    CHECK(seen.size() == 5);       // all of {[0],[1],[3],[4],[5]} appear across seeds
}

TEST_CASE("build_dpo all-mode enumerates every alternative") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9, 0.8, 0.7, 0.6, 0.5})};
    Knowledge k = knowledge_for(tuples, {2});
    DpoBuild built = build_dpo(tuples, k, PromptTemplate::select_default(), RejectedMode::All, 1);
    REQUIRE(built.records.size() == 5);
    std::set<std::string> rejected;
    for (const auto& r : built.records) rejected.insert(r.rejected);
    CHECK(rejected == std::set<std::string>{"[0]", "[1]", "[3]", "[4]", "[5]"});
}

TEST_CASE("build_dpo fails when no alternative exists") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9})};
    Knowledge k = knowledge_for(tuples, {1});
    PromptTemplate tmpl = PromptTemplate::select_default();
    tmpl.none_option = false;
    CHECK_THROWS_WITH_AS(build_dpo(tuples, k, tmpl, RejectedMode::OneRandom, 1),
                         doctest::Contains("NoAlternative"), Error);
}

TEST_CASE("reward_digit follows the bracket-count schedule") {
    CHECK(reward_digit("The correct answer is [2]") == 1.0);
    CHECK(reward_digit("The correct answer is [2], since [1] and [4] are of a different brand.") ==
          doctest::Approx(1.0 / 3.0));
    CHECK(reward_digit("no brackets") == 0.0);
}

TEST_CASE("reward_length follows the trimmed-length schedule") {
    CHECK(reward_length("The correct answer is [2]") == doctest::Approx(3.0 / 25.0));
    CHECK(reward_length("Answer: [2]") == doctest::Approx(3.0 / 11.0));
    CHECK(reward_length("  \n") == 0.0);
    CHECK(reward_length("[2]") == 1.0);  // L=3: 3/L
    CHECK(reward_length("ab") == 1.0);
    CHECK(reward_length("a") == 1.0);
    CHECK(reward_length("   padded   ") == reward_length("padded"));
}

TEST_CASE("reward_answer matches the parsed choice against the target") {
    CHECK(reward_answer("Answer: [2]", 2, 5) == 1.0);
    CHECK(reward_answer("Answer: [3]", 2, 5) == 0.0);
    CHECK(reward_answer("unsure", 2, 5) == 0.0);
}

TEST_CASE("reward_total reproduces the three worked examples") {
    RewardWeights equal;
    CHECK(reward_total("The correct answer is [2]", 2, 5, equal) ==
          doctest::Approx(0.706).epsilon(0.002));
    CHECK(reward_total("Answer: [2]", 2, 5, equal) == doctest::Approx(0.757).epsilon(0.002));
    CHECK(reward_total("The correct answer is [2], since [1] and [4] are of a different brand.",
                       2, 5, equal) == doctest::Approx(0.458).epsilon(0.002));
}

TEST_CASE("rewards stay in [0,1] under convex weights and respect invariances") {
    Rng rng(59);
    const char alphabet[] = "ab []0123456789.\n";
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        const int len = static_cast<int>(rng.uniform_int(40));
        for (int i = 0; i < len; ++i) s.push_back(alphabet[rng.uniform_int(sizeof(alphabet) - 1)]);
        const int k = 1 + static_cast<int>(rng.uniform_int(9));
        const int target = static_cast<int>(rng.uniform_int(k + 1));
        RewardWeights equal;
        const double total = reward_total(s, target, k, equal);
        CHECK(total >= 0.0);
        CHECK(total <= 1.0 + 1e-12);
        CHECK(reward_digit(s) >= 0.0);
        CHECK(reward_digit(s) <= 1.0);
        CHECK(reward_length(s) >= 0.0);
        CHECK(reward_length(s) <= 1.0);
        // Leading/trailing whitespace never changes the length reward.
        CHECK(reward_length("  " + s + "\n\n") == reward_length(s));
        // Appending bracket-free text never changes the digit reward.
        CHECK(reward_digit(s + "plain tail") == reward_digit(s));
    }
}

TEST_CASE("reward_total is monotone in each component") {
    // Same digit/answer terms, shorter completion => higher total.
    RewardWeights equal;
    CHECK(reward_total("Answer: [2]", 2, 5, equal) >
          reward_total("The correct answer is [2]", 2, 5, equal));
    // Wrong answer strictly lowers the total.
    CHECK(reward_total("Answer: [2]", 2, 5, equal) > reward_total("Answer: [3]", 2, 5, equal));
}

TEST_CASE("weights must be non-negative with a positive sum") {
    RewardWeights bad{0.0, 0.0, 0.0};
    CHECK_THROWS_WITH_AS(reward_total("x", 1, 1, bad), doctest::Contains("ConfigError"), Error);
    RewardWeights negative{-0.1, 0.6, 0.5};
    CHECK_THROWS_WITH_AS(reward_total("x", 1, 1, negative), doctest::Contains("ConfigError"),
                         Error);
}

// Straightforward re-implementation of the greedy scan, kept deliberately
// independent of disambiguate_umc: walk score-sorted matches and track used
// ids in plain sets.
namespace {

std::vector<MatchCandidate> umc_reference(std::vector<MatchCandidate> matches) {
    std::stable_sort(matches.begin(), matches.end(),
                     [](const MatchCandidate& a, const MatchCandidate& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.query_id != b.query_id) return a.query_id < b.query_id;
                         return a.candidate_id < b.candidate_id;
                     });
    std::vector<MatchCandidate> out;
    std::set<std::string> q_used, c_used;
    for (const auto& m : matches) {
        if (q_used.count(m.query_id) > 0) continue;
        if (c_used.count(m.candidate_id) > 0) continue;
        q_used.insert(m.query_id);
        c_used.insert(m.candidate_id);
        out.push_back(m);
    }
    return out;
}

std::multiset<std::pair<std::string, std::string>> pairs_of(
    const std::vector<MatchCandidate>& matches) {
    std::multiset<std::pair<std::string, std::string>> out;
    for (const auto& m : matches) out.insert({m.query_id, m.candidate_id});
    return out;
}

}  // namespace

TEST_CASE("disambiguate_umc hand trace: the top match blocks both its sides") {
    std::vector<MatchCandidate> matches = {
        {"q1", "c1", 0.9}, {"q1", "c2", 0.8}, {"q2", "c1", 0.85}};
    auto retained = disambiguate_umc(matches);
    REQUIRE(retained.size() == 1);
    CHECK(retained[0].query_id == "q1");
    CHECK(retained[0].candidate_id == "c1");
}

TEST_CASE("disambiguate_umc keeps disjoint matches and accepts empty input") {
    auto retained = disambiguate_umc({{"q1", "c1", 0.5}, {"q2", "c2", 0.4}});
    CHECK(retained.size() == 2);
    CHECK(disambiguate_umc({}).empty());
}

TEST_CASE("disambiguate_umc output is 1-1, a subset, and permutation-invariant") {
    Rng rng(67);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MatchCandidate> matches;
        const int n = static_cast<int>(rng.uniform_int(30));
        for (int i = 0; i < n; ++i) {
            matches.push_back({"q" + std::to_string(rng.uniform_int(8)),
                               "c" + std::to_string(rng.uniform_int(8)),
                               static_cast<double>(rng.uniform_int(20)) / 20.0});
        }
        auto retained = disambiguate_umc(matches);
        std::set<std::string> qs, cs;
        for (const auto& m : retained) {
            CHECK(qs.insert(m.query_id).second);
            CHECK(cs.insert(m.candidate_id).second);
        }
        auto all = pairs_of(matches);
        for (const auto& m : retained) {
            CHECK(all.count({m.query_id, m.candidate_id}) > 0);
        }
        std::vector<MatchCandidate> shuffled = matches;
        rng.shuffle(shuffled);
        CHECK(pairs_of(disambiguate_umc(shuffled)) == pairs_of(retained));
    }
}

TEST_CASE("disambiguate_umc equals the independent greedy reference") {
    Rng rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<MatchCandidate> matches;
        const int n = static_cast<int>(rng.uniform_int(40));
        for (int i = 0; i < n; ++i) {
            matches.push_back({"q" + std::to_string(rng.uniform_int(10)),
                               "c" + std::to_string(rng.uniform_int(10)),
                               rng.uniform_real()});
        }
        CHECK(pairs_of(disambiguate_umc(matches)) == pairs_of(umc_reference(matches)));
    }
}

namespace {

// Scripted teacher for disambiguation tests: answers with a fixed candidate
// id and counts invocations.
class ScriptedTeacher : public Teacher {
public:
    explicit ScriptedTeacher(std::string want_id) : want_id_(std::move(want_id)) {}

    AnnotationResult annotate(const Tuple& t, const PromptTemplate&) const override {
        ++calls;
        AnnotationResult r;
        r.tuple_key = t.key();
        r.teacher_id = "scripted";
        for (std::size_t i = 0; i < t.candidates.size(); ++i) {
            if (t.candidates[i].entity.id == want_id_) {
                r.choice = static_cast<int>(i) + 1;
                r.completion = "[" + std::to_string(*r.choice) + "]";
                return r;
            }
        }
        r.choice = 0;
        r.completion = "[0]";
        return r;
    }

    std::string id() const override { return "scripted"; }

    mutable int calls = 0;

private:
    std::string want_id_;
};

}  // namespace

TEST_CASE("disambiguate_select resolves multi-positive tuples through the teacher") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9, 0.8, 0.7, 0.6, 0.5})};
    const std::string target_id = tuples[0].candidates[1].entity.id;  // original option 2
    ScriptedTeacher teacher(target_id);
    std::map<std::string, std::vector<int>> positives = {{"q1", {2, 3}}};
    Knowledge k = disambiguate_select(tuples, positives, teacher, PromptTemplate::select_default());
    REQUIRE(k.find("q1") != nullptr);
    CHECK(*k.find("q1")->choice == 2);
    CHECK(teacher.calls == 1);
}

TEST_CASE("disambiguate_select shortcuts singletons and empties without prompting") {
    std::vector<Tuple> tuples = {scored_tuple("q1", {0.9, 0.8, 0.7, 0.6, 0.5}),
                                 scored_tuple("q2", {0.9, 0.8})};
    ScriptedTeacher teacher("never");
    std::map<std::string, std::vector<int>> positives = {{"q1", {4}}, {"q2", {}}};
    Knowledge k = disambiguate_select(tuples, positives, teacher, PromptTemplate::select_default());
    CHECK(*k.find("q1")->choice == 4);
    CHECK(*k.find("q2")->choice == 0);
    CHECK(teacher.calls == 0);  // zero endpoint calls for 0/1-positive tuples
}

TEST_CASE("export_training_job writes kind-specific hyperparameter defaults") {
    TempDir dir("jobs");
    save_sft(dir.path / "sft.jsonl", {});
    Json sft_manifest = export_training_job(dir.path / "sft.jsonl", TrainingJobKind::Sft,
                                            Json::object(), dir.path / "sft_job.json");
    CHECK(sft_manifest.at("hyperparameters").at("epochs") == 3);
    CHECK(sft_manifest.at("hyperparameters").at("lora_rank") == 16);
    CHECK(sft_manifest.at("hyperparameters").at("lora_alpha") == 16);
    CHECK(sft_manifest.at("hyperparameters").at("learning_rate") == 2e-4);
    CHECK(sft_manifest.at("hyperparameters").at("gradient_accumulation_steps") == 4);

    save_dpo(dir.path / "dpo.jsonl", {});
    Json dpo_manifest = export_training_job(dir.path / "dpo.jsonl", TrainingJobKind::Dpo,
                                            Json::object(), dir.path / "dpo_job.json");
    CHECK(dpo_manifest.at("hyperparameters").at("epochs") == 1);
    CHECK(dpo_manifest.at("hyperparameters").at("lora_rank") == 8);

    CHECK_THROWS_WITH_AS(export_training_job(dir.path / "nope.jsonl", TrainingJobKind::Sft,
                                             Json::object(), dir.path / "x.json"),
                         doctest::Contains("MissingRecords"), Error);

    // Overrides merge over the defaults.
    Json overridden = export_training_job(dir.path / "sft.jsonl", TrainingJobKind::Sft,
                                          Json{{"epochs", 5}}, dir.path / "sft_job2.json");
    CHECK(overridden.at("hyperparameters").at("epochs") == 5);
    CHECK(overridden.at("hyperparameters").at("lora_rank") == 16);
}
