#include "erdistill/prompting.hpp"

#include <cctype>

#include "erdistill/errors.hpp"
#include "erdistill/ingest.hpp"

namespace erdistill {

namespace {

constexpr std::string_view kSelectTaskText =
    "You are matching records that may refer to the same real-world entity.\n"
    "Select the candidate record that matches the query record. Respond with the\n"
    "index of the correct option in square brackets.\n"
    "\n"
    "Query: {query}\n"
    "\n"
    "Candidates:\n"
    "{candidates}";

constexpr std::string_view kMatchTaskText =
    "Do the following two records refer to the same real-world entity?\n"
    "Answer Yes or No.\n"
    "\n"
    "Record A: {query}\n"
    "Record B: {candidate}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

void replace_once(std::string& text, std::string_view placeholder, std::string_view value) {
    std::size_t pos = text.find(placeholder);
    text.replace(pos, placeholder.size(), value);
}

}  // namespace

std::string to_string(PromptMode mode) {
    return mode == PromptMode::Select ? "select" : "match";
}

PromptMode prompt_mode_from_string(std::string_view s) {
    if (s == "select") return PromptMode::Select;
    if (s == "match") return PromptMode::Match;
    fail("ConfigError", "unknown prompt mode '" + std::string(s) + "'");
}

PromptTemplate PromptTemplate::select_default() {
    return {PromptMode::Select, InstructionKind::AnswerOnly, std::string(kSelectTaskText), true};
}

PromptTemplate PromptTemplate::match_default() {
    return {PromptMode::Match, InstructionKind::AnswerOnly, std::string(kMatchTaskText), false};
}

void validate_template(const PromptTemplate& t) {
    if (count_occurrences(t.task_text, "{query}") != 1) {
        fail("ConfigError", "template task_text must contain '{query}' exactly once");
    }
    if (t.mode == PromptMode::Select) {
        if (count_occurrences(t.task_text, "{candidates}") != 1) {
            fail("ConfigError", "select template task_text must contain '{candidates}' exactly once");
        }
    } else {
        if (count_occurrences(t.task_text, "{candidate}") != 1) {
            fail("ConfigError", "match template task_text must contain '{candidate}' exactly once");
        }
    }
}

PromptTemplate template_from_json(const Json& j) {
    PromptTemplate t;
    t.mode = prompt_mode_from_string(j.value("mode", "select"));
    t.instruction_kind = instruction_kind_from_string(j.value("instruction_kind", "answer_only"));
    if (j.contains("task_text")) {
        t.task_text = j.at("task_text").get<std::string>();
    } else {
        t.task_text = t.mode == PromptMode::Select ? std::string(kSelectTaskText)
                                                   : std::string(kMatchTaskText);
    }
    t.none_option = j.value("none_option", t.mode == PromptMode::Select);
    validate_template(t);
    return t;
}

Json template_to_json(const PromptTemplate& t) {
    return Json{{"mode", to_string(t.mode)},
                {"instruction_kind", to_string(t.instruction_kind)},
                {"task_text", t.task_text},
                {"none_option", t.none_option}};
}

PromptTemplate load_template(const std::filesystem::path& path) {
    return template_from_json(read_json_file(path));
}

RenderedPrompt render_select(const Tuple& t, const PromptTemplate& tmpl) {
    if (tmpl.mode != PromptMode::Select) {
        fail("ConfigError", "render_select needs a select-mode template");
    }
    validate_template(tmpl);
    std::string options;
    for (std::size_t i = 0; i < t.candidates.size(); ++i) {
        if (i > 0) options += '\n';
        options += '[';
        options += std::to_string(i + 1);
        options += "] ";
        options += serialize_entity(t.candidates[i].entity);
    }
    if (tmpl.none_option) {
        options += '\n';
        options += kNoneOptionLine;
    }
    std::string text = tmpl.task_text;
    replace_once(text, "{query}", serialize_entity(t.query));
    replace_once(text, "{candidates}", options);
    if (tmpl.instruction_kind == InstructionKind::AnswerPlusExplanation) {
        text += kExplanationSuffix;
    }
    RenderedPrompt out{std::move(text), t.key(), 0};
    out.length_chars = utf8_length(out.text);
    return out;
}

RenderedPrompt render_match(const Entity& query, const Entity& candidate,
                            const PromptTemplate& tmpl) {
    if (tmpl.mode != PromptMode::Match) {
        fail("ConfigError", "render_match needs a match-mode template");
    }
    validate_template(tmpl);
    std::string text = tmpl.task_text;
    replace_once(text, "{query}", serialize_entity(query));
    replace_once(text, "{candidate}", serialize_entity(candidate));
    if (tmpl.instruction_kind == InstructionKind::AnswerPlusExplanation) {
        text += kExplanationSuffix;
    }
    RenderedPrompt out{std::move(text), query.id + "|" + candidate.id, 0};
    out.length_chars = utf8_length(out.text);
    return out;
}

namespace {

// Locates bracketed integers `[<digits>]`. Returns the digit span or npos.
std::size_t find_bracketed(std::string_view s, std::size_t from, std::size_t* digits_len) {
    for (std::size_t i = from; i < s.size(); ++i) {
        if (s[i] != '[') continue;
        std::size_t j = i + 1;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i + 1 && j < s.size() && s[j] == ']') {
            *digits_len = j - (i + 1);
            return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace

std::optional<int> parse_choice(std::string_view completion, int k) {
    std::size_t len = 0;
    std::size_t pos = find_bracketed(completion, 0, &len);
    if (pos == std::string_view::npos) return std::nullopt;
    if (len > 9) return std::nullopt;  // cannot be a candidate index
    int m = 0;
    for (std::size_t i = 0; i < len; ++i) m = m * 10 + (completion[pos + i] - '0');
    if (m > k) return std::nullopt;
    return m;
}

YesNo parse_yesno(std::string_view completion) {
    std::size_t i = 0;
    while (i < completion.size()) {
        unsigned char c = static_cast<unsigned char>(completion[i]);
        if (std::isalnum(c)) break;
        ++i;
    }
    std::string token;
    while (i < completion.size() && std::isalpha(static_cast<unsigned char>(completion[i]))) {
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(completion[i]))));
        ++i;
    }
    if (token == "yes") return YesNo::Yes;
    if (token == "no") return YesNo::No;
    return YesNo::Abstain;
}

int count_bracketed(std::string_view completion) {
    int n = 0;
    std::size_t pos = 0;
    std::size_t len = 0;
    while ((pos = find_bracketed(completion, pos, &len)) != std::string_view::npos) {
        ++n;
        pos += len + 1;  // past the closing bracket
    }
    return n;
}

}  // namespace erdistill
