#include "vwt/types.hpp"

namespace vwt {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> parse_with(std::string_view text, const std::array<Enum, N>& values) {
    for (Enum value : values) {
        if (to_string(value) == text) return value;
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(ContextLevel level) {
    switch (level) {
    case ContextLevel::L0: return "L0";
    case ContextLevel::L1: return "L1";
    case ContextLevel::L2: return "L2";
    case ContextLevel::L3: return "L3";
    }
    return "?";
}

std::string_view to_string(TreeVersion version) {
    return version == TreeVersion::before ? "before" : "after";
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::err: return "ERR";
    }
    return "?";
}

std::string_view to_string(PromptVariant variant) {
    switch (variant) {
    case PromptVariant::baseline: return "baseline";
    case PromptVariant::no_emotion: return "no_emotion";
    case PromptVariant::no_role: return "no_role";
    case PromptVariant::with_cwe: return "with_cwe";
    }
    return "?";
}

std::string_view to_string(FeedbackKind kind) {
    switch (kind) {
    case FeedbackKind::before_pass: return "BEFORE_PASS";
    case FeedbackKind::after_fail: return "AFTER_FAIL";
    case FeedbackKind::error: return "ERROR";
    }
    return "?";
}

std::optional<ContextLevel> parse_level(std::string_view text) {
    return parse_with(text, kAllLevels);
}

std::optional<TreeVersion> parse_version(std::string_view text) {
    if (text == "before") return TreeVersion::before;
    if (text == "after") return TreeVersion::after;
    return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view text) {
    return parse_with(text, kAllVerdicts);
}

std::optional<PromptVariant> parse_variant(std::string_view text) {
    return parse_with(text, kAllVariants);
}

std::optional<FeedbackKind> parse_feedback_kind(std::string_view text) {
    constexpr std::array kinds{FeedbackKind::before_pass, FeedbackKind::after_fail,
                               FeedbackKind::error};
    return parse_with(text, kinds);
}

} // namespace vwt
