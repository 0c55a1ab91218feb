#include <doctest.h>

#include "erdistill/core.hpp"
#include "erdistill/errors.hpp"
#include "erdistill/rng.hpp"
#include "test_support.hpp"

using namespace erdistill;
using test::make_entity;
using test::scored_tuple;

namespace {

Tuple raw_tuple(std::vector<double> scores) {
    Tuple t;
    t.query = make_entity("q", {{"name", "query"}});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::string cid = "c" + std::to_string(i + 1);
        t.candidates.push_back({make_entity(cid, {{"name", cid}}), scores[i]});
    }
    return t;
}

}  // namespace

TEST_CASE("validate_tuple sorts candidates into canonical order") {
    Tuple t = validate_tuple(raw_tuple({0.74, 0.95, 0.90, 0.70, 0.76}));
    std::vector<double> got;
    for (const auto& c : t.candidates) got.push_back(c.score);
    CHECK(got == std::vector<double>{0.95, 0.90, 0.76, 0.74, 0.70});
}

TEST_CASE("validate_tuple rejects an empty candidate list") {
    Tuple t;
    t.query = make_entity("q", {});
    CHECK_THROWS_WITH_AS(validate_tuple(t), doctest::Contains("EmptyCandidateList"), Error);
}

TEST_CASE("validate_tuple rejects out-of-range scores") {
    CHECK_THROWS_WITH_AS(validate_tuple(raw_tuple({0.5, 1.2})),
                         doctest::Contains("ScoreOutOfRange"), Error);
    CHECK_THROWS_WITH_AS(validate_tuple(raw_tuple({-0.1})),
                         doctest::Contains("ScoreOutOfRange"), Error);
}

TEST_CASE("validate_tuple rejects duplicate candidate ids and query collisions") {
    Tuple t = raw_tuple({0.5, 0.6});
    t.candidates[1].entity.id = t.candidates[0].entity.id;
    CHECK_THROWS_WITH_AS(validate_tuple(t), doctest::Contains("DuplicateCandidate"), Error);

    Tuple u = raw_tuple({0.5});
    u.candidates[0].entity.id = "q";
    CHECK_THROWS_WITH_AS(validate_tuple(u), doctest::Contains("DuplicateCandidate"), Error);
}

TEST_CASE("validate_tuple bounds the truth index and remaps it through the sort") {
    Tuple t = raw_tuple({0.2, 0.9});
    t.truth = 7;
    CHECK_THROWS_WITH_AS(validate_tuple(t), doctest::Contains("TruthOutOfRange"), Error);

    // c1 has score 0.2, c2 has 0.9; truth points at c1 pre-sort.
    Tuple u = raw_tuple({0.2, 0.9});
    u.truth = 1;
    Tuple v = validate_tuple(u);
    CHECK(v.candidates[0].entity.id == "c2");
    CHECK(*v.truth == 2);  // c1 moved to position 2
}

TEST_CASE("canonicalization is idempotent and a total order") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores;
        const int k = 1 + static_cast<int>(rng.uniform_int(8));
        for (int i = 0; i < k; ++i) {
            scores.push_back(static_cast<double>(rng.uniform_int(20)) / 20.0);
        }
        Tuple t = validate_tuple(raw_tuple(scores));
        Tuple again = validate_tuple(t);
        CHECK(again == t);

        // Same candidate set in any input order lands in the same output order.
        Tuple shuffled = t;
        rng.shuffle(shuffled.candidates);
        CHECK(validate_tuple(shuffled) == t);
    }
}

TEST_CASE("knowledge rejects a second annotation for the same tuple") {
    Knowledge k;
    AnnotationResult r;
    r.tuple_key = "q1";
    r.choice = 1;
    k.insert(r);
    CHECK(k.find("q1") != nullptr);
    CHECK(k.find("q2") == nullptr);
    CHECK_THROWS_WITH_AS(k.insert(r), doctest::Contains("DuplicateAnnotation"), Error);
}

TEST_CASE("abstained means no choice and no positive-set") {
    AnnotationResult r;
    CHECK(r.abstained());
    r.choice = 0;
    CHECK(!r.abstained());
    r.choice.reset();
    r.positives = {2, 3};
    CHECK(!r.abstained());
}

TEST_CASE("utf8_length counts scalar values, not bytes") {
    CHECK(utf8_length("") == 0);
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("caf\xC3\xA9") == 4);           // café
    CHECK(utf8_length("\xE2\x82\xAC 5") == 3);        // € 5
    CHECK(utf8_length("\xF0\x9F\x98\x80") == 1);      // emoji, 4 bytes
}
