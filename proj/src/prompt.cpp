#include "vwt/prompt.hpp"

#include "vwt/error.hpp"
#include "vwt/text.hpp"

namespace vwt {

PromptConfig PromptConfig::for_variant(PromptVariant variant) {
    switch (variant) {
    case PromptVariant::baseline: return {variant, true, true, false};
    case PromptVariant::no_emotion: return {variant, true, false, false};
    case PromptVariant::no_role: return {variant, false, false, false};
    case PromptVariant::with_cwe: return {variant, true, true, true};
    }
    return {};
}

bool PromptConfig::consistent() const {
    const PromptConfig expected = for_variant(variant);
    return include_role == expected.include_role && include_emotion == expected.include_emotion &&
           include_cwe == expected.include_cwe;
}

PromptMessage build_initial_prompt(const FocalContext& focal, std::string_view patched_method,
                                   const VulnEntry& entry, const PromptConfig& config) {
    const std::string_view snippet = text::trim_right(focal.snippet);
    const std::string_view patched = text::trim_right(patched_method);
    if (text::trim(snippet).empty()) throw PreconditionError("focal context is empty");
    if (text::trim(patched).empty()) throw PreconditionError("patched method is empty");

    PromptMessage msg;
    std::string& out = msg.text;
    if (config.include_role) {
        out += prompt_text::kRole;
        out += "\n";
    }
    out += prompt_text::kTask;
    out += "\n\n";
    if (config.include_cwe) {
        if (entry.cwe_id) {
            out += "The vulnerability is categorized as " + *entry.cwe_id + ".\n";
        } else {
            msg.missing_cwe_warning = true;
        }
    }
    out += snippet;
    out += "\n\n";
    out += prompt_text::kPatchedIntro;
    out += "\n\n";
    out += patched;
    if (config.include_emotion) {
        out += "\n\n";
        out += prompt_text::kEmotion;
    }
    return msg;
}

PromptMessage build_feedback_prompt(FeedbackKind kind, const std::optional<std::string>& log_excerpt) {
    PromptMessage msg;
    switch (kind) {
    case FeedbackKind::before_pass:
        msg.text = prompt_text::kBeforePass;
        break;
    case FeedbackKind::after_fail:
        msg.text = prompt_text::kAfterFail;
        break;
    case FeedbackKind::error:
        if (!log_excerpt) throw PreconditionError("an ERROR reprompt needs a log excerpt");
        msg.text = std::string(prompt_text::kErrorPrefix) + text::tail(*log_excerpt, kLogExcerptChars) +
                   std::string(prompt_text::kErrorSuffix);
        break;
    }
    return msg;
}

BudgetCheck check_budget(const PromptMessage& message, std::size_t limit) {
    if (limit == 0) throw PreconditionError("token limit must be > 0");
    BudgetCheck check;
    check.limit = limit;
    check.estimated_tokens = (message.text.size() + 2) / 3;
    check.ok = check.estimated_tokens <= limit;
    return check;
}

} // namespace vwt
