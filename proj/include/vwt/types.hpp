#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace vwt {

enum class ContextLevel { L0, L1, L2, L3 };
inline constexpr std::array<ContextLevel, 4> kAllLevels{ContextLevel::L0, ContextLevel::L1,
                                                        ContextLevel::L2, ContextLevel::L3};

enum class TreeVersion { before, after };

enum class Verdict { pass, fail, err };
inline constexpr std::array<Verdict, 3> kAllVerdicts{Verdict::pass, Verdict::fail, Verdict::err};

struct OutcomePair {
    Verdict before = Verdict::err;
    Verdict after = Verdict::err;

    friend bool operator==(const OutcomePair&, const OutcomePair&) = default;
};

enum class PromptVariant { baseline, no_emotion, no_role, with_cwe };
inline constexpr std::array<PromptVariant, 4> kAllVariants{
    PromptVariant::baseline, PromptVariant::no_emotion, PromptVariant::no_role,
    PromptVariant::with_cwe};

enum class FeedbackKind { before_pass, after_fail, error };

std::string_view to_string(ContextLevel level);
std::string_view to_string(TreeVersion version);
std::string_view to_string(Verdict verdict);
std::string_view to_string(PromptVariant variant);
std::string_view to_string(FeedbackKind kind);

std::optional<ContextLevel> parse_level(std::string_view text);
std::optional<TreeVersion> parse_version(std::string_view text);
std::optional<Verdict> parse_verdict(std::string_view text);
std::optional<PromptVariant> parse_variant(std::string_view text);
std::optional<FeedbackKind> parse_feedback_kind(std::string_view text);

inline int level_index(ContextLevel level) { return static_cast<int>(level); }

} // namespace vwt
