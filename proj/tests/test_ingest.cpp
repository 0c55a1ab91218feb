#include <doctest.h>

#include <fstream>
#include <set>

#include "erdistill/errors.hpp"
#include "erdistill/ingest.hpp"
#include "erdistill/rng.hpp"
#include "test_support.hpp"

using namespace erdistill;
using test::make_entity;
using test::TempDir;

namespace {

std::filesystem::path write_file(const TempDir& dir, const std::string& name,
                                 const std::string& content) {
    auto p = dir.path / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

}  // namespace

TEST_CASE("load_entities parses CSV rows into id + attributes in column order") {
    TempDir dir("csv");
    auto p = write_file(dir, "e.csv", "id,name\nr1,Sony Turntable\n");
    auto entities = load_entities(p, EntityFormat::Csv);
    REQUIRE(entities.size() == 1);
    CHECK(entities[0].id == "r1");
    REQUIRE(entities[0].attributes.size() == 1);
    CHECK(entities[0].attributes[0].name == "name");
    CHECK(entities[0].attributes[0].value == "Sony Turntable");
}

TEST_CASE("load_entities handles quoted CSV fields and empty values") {
    TempDir dir("csvq");
    auto p = write_file(dir, "e.csv",
                        "id,title,notes\n"
                        "a,\"X, Y\",\"say \"\"hi\"\"\"\n"
                        "b,,\n");
    auto entities = load_entities(p, EntityFormat::Csv);
    REQUIRE(entities.size() == 2);
    CHECK(entities[0].attributes[0].value == "X, Y");
    CHECK(entities[0].attributes[1].value == "say \"hi\"");
    CHECK(entities[1].attributes[0].value == "");
}

TEST_CASE("a JSONL record with 13 payload fields yields 13 attributes in field order") {
    TempDir dir("jsonl");
    std::string line = R"({"id":"m1")";
    for (int i = 1; i <= 13; ++i) {
        line += ",\"f" + std::to_string(i) + "\":\"v" + std::to_string(i) + "\"";
    }
    line += "}\n";
    auto p = write_file(dir, "e.jsonl", line);
    auto entities = load_entities(p, EntityFormat::Jsonl);
    REQUIRE(entities.size() == 1);
    REQUIRE(entities[0].attributes.size() == 13);
    CHECK(entities[0].attributes[0].name == "f1");
    CHECK(entities[0].attributes[12].name == "f13");
    CHECK(entities[0].attributes[12].value == "v13");
}

TEST_CASE("rows without an id fail with MissingId at the offending line") {
    TempDir dir("noid");
    auto p = write_file(dir, "e.csv", "id,name\nr1,ok\n,missing\n");
    try {
        load_entities(p, EntityFormat::Csv);
        FAIL("expected MissingId");
    } catch (const Error& e) {
        CHECK(e.code() == "MissingId");
        CHECK(e.message().find(":3") != std::string::npos);
    }

    auto q = write_file(dir, "e.jsonl", "{\"name\":\"no id\"}\n");
    CHECK_THROWS_WITH_AS(load_entities(q, EntityFormat::Jsonl), doctest::Contains("MissingId"),
                         Error);

    auto r = write_file(dir, "noidcol.csv", "name\nSony\n");
    CHECK_THROWS_WITH_AS(load_entities(r, EntityFormat::Csv), doctest::Contains("MissingId"),
                         Error);
}

TEST_CASE("malformed lines fail with ParseError carrying the line number") {
    TempDir dir("bad");
    auto p = write_file(dir, "e.jsonl", "{\"id\":\"a\"}\nnot json\n");
    try {
        load_entities(p, EntityFormat::Jsonl);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == "ParseError");
        CHECK(e.message().find(":2") != std::string::npos);
    }

    auto q = write_file(dir, "e.csv", "id,a,b\nr1,1,2\nr2,only\n");
    try {
        load_entities(q, EntityFormat::Csv);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == "ParseError");
        CHECK(e.message().find(":3") != std::string::npos);
    }
}

TEST_CASE("serialize_entity renders name: value pairs with empty values as name:") {
    CHECK(serialize_entity(make_entity("e", {{"title", "X"}})) == "title: X");
    CHECK(serialize_entity(make_entity("e", {{"a", "1"}, {"b", ""}})) == "a: 1; b:");
    CHECK(serialize_entity(make_entity("e", {{"a", ""}, {"b", "2"}})) == "a:; b: 2");
}

TEST_CASE("serialize_entity escapes separators so it stays injective") {
    CHECK(serialize_entity(make_entity("e", {{"a", "x;y"}})) == "a: x\\;y");
    CHECK(serialize_entity(make_entity("e", {{"a", "x\\"}})) == "a: x\\\\");

    // Distinct value lists never collide, even with '; ' inside values.
    std::set<std::string> seen;
    std::vector<std::vector<std::pair<std::string, std::string>>> variants = {
        {{"a", "1; b: 2"}},
        {{"a", "1"}, {"b", "2"}},
        {{"a", "1;"}, {"b", " 2"}},
        {{"a", "1\\; b: 2"}},
    };
    for (const auto& attrs : variants) {
        CHECK(seen.insert(serialize_entity(make_entity("e", attrs))).second);
    }
}

TEST_CASE("block_lexical finds an identical entity with score 1") {
    std::vector<Entity> corpus = {
        make_entity("c1", {{"name", "Sony PS-LX310BT turntable"}}),
        make_entity("c2", {{"name", "Canon EOS camera body"}}),
    };
    std::vector<Entity> queries = {make_entity("q1", {{"name", "Sony PS-LX310BT turntable"}})};
    auto tuples = block_lexical(queries, corpus, 1);
    REQUIRE(tuples.size() == 1);
    REQUIRE(tuples[0].candidates.size() == 1);
    CHECK(tuples[0].candidates[0].entity.id == "c1");
    CHECK(tuples[0].candidates[0].score == doctest::Approx(1.0));
}

TEST_CASE("block_lexical scores token-disjoint entities 0") {
    // Attribute names are part of the serialized text, so the query uses a
    // different one to make the token sets truly disjoint.
    std::vector<Entity> corpus = {
        make_entity("c1", {{"name", "alpha beta"}}),
        make_entity("c2", {{"name", "gamma delta"}}),
        make_entity("c3", {{"name", "epsilon zeta"}}),
    };
    std::vector<Entity> queries = {make_entity("q1", {{"label", "omega psi"}})};
    auto tuples = block_lexical(queries, corpus, 3);
    REQUIRE(tuples[0].candidates.size() == 3);
    for (const auto& c : tuples[0].candidates) CHECK(c.score == 0.0);
}

TEST_CASE("block_lexical truncates to the corpus size") {
    std::vector<Entity> corpus;
    for (int i = 0; i < 5; ++i) {
        corpus.push_back(make_entity("c" + std::to_string(i), {{"name", "item " + std::to_string(i)}}));
    }
    std::vector<Entity> queries = {make_entity("q1", {{"name", "item 3"}})};
    auto tuples = block_lexical(queries, corpus, 10);
    CHECK(tuples[0].candidates.size() == 5);
}

TEST_CASE("block_lexical rejects an empty corpus and orders by non-increasing score") {
    CHECK_THROWS_WITH_AS(block_lexical({make_entity("q", {{"a", "x"}})}, {}, 3),
                         doctest::Contains("EmptyCorpus"), Error);

    std::vector<Entity> corpus;
    for (int i = 0; i < 8; ++i) {
        std::string text = "token" + std::to_string(i) + (i % 2 ? " shared" : " other");
        corpus.push_back(make_entity("c" + std::to_string(i), {{"name", text}}));
    }
    std::vector<Entity> queries = {make_entity("q", {{"name", "shared token1 token3"}})};
    auto tuples = block_lexical(queries, corpus, 8);
    for (std::size_t i = 1; i < tuples[0].candidates.size(); ++i) {
        CHECK(tuples[0].candidates[i - 1].score >= tuples[0].candidates[i].score);
    }
}

TEST_CASE("block_lexical scoring is symmetric for a fixed vectorizer state") {
    // score(a,b) = score(b,a): swap the roles of two singleton collections.
    Entity a = make_entity("a", {{"name", "sony turntable belt drive"}});
    Entity b = make_entity("b", {{"name", "sony turntable usb"}});
    auto ab = block_lexical({a}, {b}, 1);
    auto ba = block_lexical({b}, {a}, 1);
    CHECK(ab[0].candidates[0].score == doctest::Approx(ba[0].candidates[0].score).epsilon(1e-12));
}

TEST_CASE("load_tuples resolves ids, validates and remaps truth") {
    TempDir dir("tuples");
    std::string d2_csv = "id,name\n";
    for (int i = 1; i <= 5; ++i) d2_csv += "c" + std::to_string(i) + ",item\n";
    auto d1p = write_file(dir, "d1.csv", "id,name\nq1,query one\n");
    auto d2p = write_file(dir, "d2.csv", d2_csv);
    auto d1 = load_entities(d1p, EntityFormat::Csv);
    auto d2 = load_entities(d2p, EntityFormat::Csv);

    auto tp = write_file(dir, "t.jsonl",
                         R"({"query":"q1","candidates":[{"id":"c1","score":0.2},{"id":"c2","score":0.9},{"id":"c3","score":0.5},{"id":"c4","score":0.4},{"id":"c5","score":0.3}],"truth":2})"
                         "\n");
    auto tuples = load_tuples(tp, d1, d2);
    REQUIRE(tuples.size() == 1);
    CHECK(tuples[0].candidates.size() == 5);
    CHECK(tuples[0].candidates[0].entity.id == "c2");  // canonical: highest score first
    CHECK(*tuples[0].truth == 1);                      // truth followed c2 through the sort

    auto bad = write_file(dir, "bad.jsonl",
                          R"({"query":"q1","candidates":[{"id":"zzz","score":0.2}]})"
                          "\n");
    try {
        load_tuples(bad, d1, d2);
        FAIL("expected UnknownEntityId");
    } catch (const Error& e) {
        CHECK(e.code() == "UnknownEntityId");
        CHECK(e.message().find("zzz") != std::string::npos);
    }

    auto out_of_range = write_file(
        dir, "oor.jsonl",
        R"({"query":"q1","candidates":[{"id":"c1","score":0.2},{"id":"c2","score":0.9}],"truth":7})"
        "\n");
    CHECK_THROWS_WITH_AS(load_tuples(out_of_range, d1, d2),
                         doctest::Contains("TruthOutOfRange"), Error);
}

TEST_CASE("tuple save/load round trips through the JSONL schema") {
    TempDir dir("ttrip");
    std::vector<Entity> d1 = {make_entity("q1", {{"name", "query one"}})};
    std::vector<Entity> d2 = {make_entity("c1", {{"name", "one"}}),
                              make_entity("c2", {{"name", "two"}})};
    Tuple t;
    t.query = d1[0];
    t.candidates = {{d2[1], 0.9}, {d2[0], 0.4}};
    t.truth = 0;  // explicit none-marker -> "truth": null
    t = validate_tuple(t);
    save_tuples(dir.path / "t.jsonl", {t});
    auto loaded = load_tuples(dir.path / "t.jsonl", d1, d2);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0] == t);
}

TEST_CASE("verify_manifest checks counts exactly") {
    std::vector<Entity> d1 = {make_entity("a", {{"x", "1"}, {"y", "2"}})};
    std::vector<Entity> d2 = {make_entity("b", {{"x", "3"}, {"y", "4"}}),
                              make_entity("c", {{"x", "5"}, {"y", "6"}})};
    DatasetManifest m;
    m.name = "demo";
    m.entity_count_per_source = {1, 2};
    m.attribute_count = 2;
    m.duplicate_count = 1;
    CHECK_NOTHROW(verify_manifest(m, d1, d2));

    m.entity_count_per_source = {2, 2};
    CHECK_THROWS_WITH_AS(verify_manifest(m, d1, d2), doctest::Contains("ManifestMismatch"), Error);

    m.entity_count_per_source = {1, 2};
    m.attribute_count = 3;
    CHECK_THROWS_WITH_AS(verify_manifest(m, d1, d2), doctest::Contains("ManifestMismatch"), Error);
}
