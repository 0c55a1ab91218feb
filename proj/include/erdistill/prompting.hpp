#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "erdistill/core.hpp"
#include "erdistill/jsonl.hpp"

namespace erdistill {

enum class PromptMode { Select, Match };

std::string to_string(PromptMode mode);
PromptMode prompt_mode_from_string(std::string_view s);

/// Prompt shape for one run. task_text must contain `{query}` exactly once,
/// plus `{candidates}` (select) or `{candidate}` (match). The shipped
/// defaults are versioned here so runs are reproducible.
struct PromptTemplate {
    PromptMode mode = PromptMode::Select;
    InstructionKind instruction_kind = InstructionKind::AnswerOnly;
    std::string task_text;
    bool none_option = true;

    static PromptTemplate select_default();
    static PromptTemplate match_default();
};

/// Appended to the prompt in answer_plus_explanation mode.
inline constexpr std::string_view kExplanationSuffix =
    "\nAfter the bracketed answer, briefly justify why the selected option matches the query.";

/// Final option line emitted when none_option is enabled.
inline constexpr std::string_view kNoneOptionLine = "[0] None of the above";

/// Throws ConfigError unless the template's placeholders match its mode.
void validate_template(const PromptTemplate& t);

PromptTemplate template_from_json(const Json& j);
Json template_to_json(const PromptTemplate& t);
PromptTemplate load_template(const std::filesystem::path& path);

struct RenderedPrompt {
    std::string text;
    std::string tuple_key;
    std::size_t length_chars = 0;  // Unicode scalar values
};

/// SELECT prompt: task text with the serialized query and candidates numbered
/// `[1]`..`[k]` in canonical order, plus `[0] None of the above` when
/// enabled; answer_plus_explanation appends the justification suffix.
RenderedPrompt render_select(const Tuple& t, const PromptTemplate& tmpl);

/// MATCH prompt: both serialized entities plus a Yes/No question.
RenderedPrompt render_match(const Entity& query, const Entity& candidate,
                            const PromptTemplate& tmpl);

/// Parses the first bracketed integer `[m]` out of a completion. Returns m
/// when 0 <= m <= k; Abstain (nullopt) when there is no bracketed integer or
/// the first one exceeds k — exceeding indices are never clamped.
std::optional<int> parse_choice(std::string_view completion, int k);

enum class YesNo { Yes, No, Abstain };

/// Case-insensitive leading token after trimming whitespace/punctuation:
/// "yes" or "no" decides, anything else is Abstain.
YesNo parse_yesno(std::string_view completion);

/// Number of `[<digits>]` substrings; a multi-digit integer counts once.
int count_bracketed(std::string_view completion);

}  // namespace erdistill
