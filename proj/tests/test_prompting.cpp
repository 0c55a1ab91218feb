#include <doctest.h>

#include "erdistill/errors.hpp"
#include "erdistill/ingest.hpp"
#include "erdistill/prompting.hpp"
#include "erdistill/rng.hpp"
#include "test_support.hpp"

using namespace erdistill;
using test::make_entity;
using test::scored_tuple;

TEST_CASE("render_select numbers candidates and appends the none option") {
    Tuple t = scored_tuple("q1", {0.74, 0.95, 0.90, 0.70, 0.76});
    PromptTemplate tmpl = PromptTemplate::select_default();
    RenderedPrompt p = render_select(t, tmpl);
    CHECK(p.tuple_key == "q1");
    for (int i = 1; i <= 5; ++i) {
        CHECK(p.text.find("[" + std::to_string(i) + "] ") != std::string::npos);
    }
    CHECK(p.text.find("[6]") == std::string::npos);
    CHECK(p.text.find("[0] None of the above") != std::string::npos);
    CHECK(p.text.find(serialize_entity(t.query)) != std::string::npos);
    // Canonical candidate order: option [1] is the highest-scoring candidate.
    CHECK(p.text.find("[1] " + serialize_entity(t.candidates[0].entity)) != std::string::npos);

    PromptTemplate no_none = tmpl;
    no_none.none_option = false;
    CHECK(render_select(t, no_none).text.find("[0]") == std::string::npos);
}

TEST_CASE("answer_plus_explanation appends exactly the justification suffix") {
    Tuple t = scored_tuple("q1", {0.6, 0.4});
    PromptTemplate tmpl = PromptTemplate::select_default();
    RenderedPrompt base = render_select(t, tmpl);
    tmpl.instruction_kind = InstructionKind::AnswerPlusExplanation;
    RenderedPrompt with = render_select(t, tmpl);
    CHECK(with.text == base.text + std::string(kExplanationSuffix));
}

TEST_CASE("rendered length counts Unicode characters and matches the text") {
    Tuple t = scored_tuple("q1", {0.5});
    t.query.attributes[0].value = "caf\xC3\xA9";  // é: two bytes, one char
    t = validate_tuple(t);
    RenderedPrompt p = render_select(t, PromptTemplate::select_default());
    CHECK(p.length_chars == utf8_length(p.text));
    CHECK(p.length_chars < p.text.size());
}

TEST_CASE("render_match presents both serializations and accepts degenerate inputs") {
    PromptTemplate tmpl = PromptTemplate::match_default();
    Entity q = make_entity("q", {{"name", "Sony Turntable"}});
    Entity c = make_entity("c", {{"name", "Sony PS Turntable"}});
    RenderedPrompt p = render_match(q, c, tmpl);
    CHECK(p.text.find(serialize_entity(q)) != std::string::npos);
    CHECK(p.text.find(serialize_entity(c)) != std::string::npos);
    CHECK(p.text.find("Yes or No") != std::string::npos);

    // q = c: well-formed, no dedup.
    RenderedPrompt same = render_match(q, q, tmpl);
    CHECK(same.text.find(serialize_entity(q)) != std::string::npos);

    // Empty value renders as `name:`.
    Entity empty_attr = make_entity("e", {{"brand", ""}});
    CHECK(render_match(q, empty_attr, tmpl).text.find("brand:") != std::string::npos);
}

TEST_CASE("templates without their placeholders are rejected") {
    PromptTemplate t = PromptTemplate::select_default();
    t.task_text = "no placeholders at all";
    CHECK_THROWS_WITH_AS(validate_template(t), doctest::Contains("ConfigError"), Error);

    PromptTemplate m = PromptTemplate::match_default();
    m.task_text = "only {query} here";
    CHECK_THROWS_WITH_AS(validate_template(m), doctest::Contains("ConfigError"), Error);
}

TEST_CASE("parse_choice returns the first bracketed integer when in range") {
    CHECK(*parse_choice("The correct answer is [2]", 5) == 2);
    CHECK(*parse_choice("[0]", 5) == 0);
    CHECK(!parse_choice("no idea", 5).has_value());
}

TEST_CASE("parse_choice abstains on an exceeding first index instead of clamping") {
    CHECK(!parse_choice("[7]", 5).has_value());
    CHECK(!parse_choice("[7] or maybe [2]", 5).has_value());  // first bracketed integer decides
    CHECK(*parse_choice("[12]", 15) == 12);                   // multi-digit indices parse
    CHECK(!parse_choice("[99999999999999999999]", 5).has_value());
}

TEST_CASE("parse_choice ignores non-integer brackets") {
    CHECK(*parse_choice("[x] then [3]", 5) == 3);
    CHECK(!parse_choice("[]", 5).has_value());
    CHECK(!parse_choice("[2", 5).has_value());
}

TEST_CASE("parse_choice round trips every canonical answer") {
    for (int k : {1, 3, 9, 12}) {
        for (int m = 0; m <= k; ++m) {
            auto parsed = parse_choice("[" + std::to_string(m) + "]", k);
            REQUIRE(parsed.has_value());
            CHECK(*parsed == m);
        }
    }
}

TEST_CASE("parse_choice never returns an index above k") {
    Rng rng(99);
    const char alphabet[] = "ab []0123456789.";
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const int len = static_cast<int>(rng.uniform_int(30));
        for (int i = 0; i < len; ++i) {
            s.push_back(alphabet[rng.uniform_int(sizeof(alphabet) - 1)]);
        }
        const int k = 1 + static_cast<int>(rng.uniform_int(10));
        auto parsed = parse_choice(s, k);
        if (parsed) {
            CHECK(*parsed >= 0);
            CHECK(*parsed <= k);
        }
    }
}

TEST_CASE("parse_yesno reads the leading token case-insensitively") {
    CHECK(parse_yesno("Yes, same product.") == YesNo::Yes);
    CHECK(parse_yesno("NO") == YesNo::No);
    CHECK(parse_yesno("maybe") == YesNo::Abstain);
    CHECK(parse_yesno("  \"yes\" definitely") == YesNo::Yes);
    CHECK(parse_yesno("Noted: they differ") == YesNo::Abstain);  // token is "noted", not "no"
    CHECK(parse_yesno("") == YesNo::Abstain);
}

TEST_CASE("count_bracketed counts bracketed integers once each") {
    CHECK(count_bracketed("The correct answer is [2]") == 1);
    CHECK(count_bracketed("The correct answer is [2], since [1] and [4] are of a different "
                          "brand.") == 3);
    CHECK(count_bracketed("") == 0);
    CHECK(count_bracketed("[12] beats [3]") == 2);  // multi-digit counts once
    CHECK(count_bracketed("[a] [] [ 1]") == 0);
}

TEST_CASE("count_bracketed is invariant under appending bracket-free text") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::string base = "[1] and [2]";
        std::string tail;
        const char alphabet[] = "abc 0123.";
        const int len = static_cast<int>(rng.uniform_int(20));
        for (int i = 0; i < len; ++i) tail.push_back(alphabet[rng.uniform_int(sizeof(alphabet) - 1)]);
        CHECK(count_bracketed(base + tail) == count_bracketed(base));
    }
}

TEST_CASE("render_select is deterministic and distinct per tuple") {
    Tuple a = scored_tuple("qa", {0.9, 0.5});
    Tuple b = scored_tuple("qb", {0.9, 0.5});
    PromptTemplate tmpl = PromptTemplate::select_default();
    CHECK(render_select(a, tmpl).text == render_select(a, tmpl).text);
    CHECK(render_select(a, tmpl).text != render_select(b, tmpl).text);
}

TEST_CASE("template files round trip through JSON") {
    test::TempDir dir("template");
    PromptTemplate tmpl = PromptTemplate::select_default();
    tmpl.instruction_kind = InstructionKind::AnswerPlusExplanation;
    tmpl.none_option = false;
    write_json_file(dir.path / "t.json", template_to_json(tmpl));
    PromptTemplate loaded = load_template(dir.path / "t.json");
    CHECK(loaded.mode == tmpl.mode);
    CHECK(loaded.instruction_kind == tmpl.instruction_kind);
    CHECK(loaded.task_text == tmpl.task_text);
    CHECK(loaded.none_option == tmpl.none_option);
}
