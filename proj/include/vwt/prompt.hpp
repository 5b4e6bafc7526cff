#pragma once

#include "vwt/focal_context.hpp"
#include "vwt/manifest.hpp"
#include "vwt/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace vwt {

struct PromptConfig {
    PromptVariant variant = PromptVariant::baseline;
    bool include_role = true;
    bool include_emotion = true;
    bool include_cwe = false;

    static PromptConfig for_variant(PromptVariant variant);
    /// Flags agree with the variant.
    bool consistent() const;
};

enum class MessageRole { system, user };

struct PromptMessage {
    MessageRole role = MessageRole::user;
    std::string text;
    /// Set when with_cwe was requested for an entry without a CWE id.
    bool missing_cwe_warning = false;
};

namespace prompt_text {
inline constexpr std::string_view kRole =
    "You are a senior software tester and a cyber security specialist.";
inline constexpr std::string_view kTask =
    "You will be given the source code of a Java class where you will find the context of a "
    "vulnerable method before and after the patch.\n"
    "Your task is to create a unit test that triggers the vulnerability and fails before the "
    "patch and passes after it. The class' name should be the name of the class appended with "
    "the string \"Test\".\n"
    "Use simple Java language features in the generated test!";
inline constexpr std::string_view kPatchedIntro = "The method after patching the vulnerability:";
inline constexpr std::string_view kEmotion =
    "It is very important for me, please create the unittest based on your best knowledge in "
    "the given context.";
inline constexpr std::string_view kBeforePass =
    "The test you've provided should have failed for the original version of the vulnerability "
    "before the patch, but it passes. Please fix it and return the whole code.";
inline constexpr std::string_view kAfterFail =
    "The test you've provided should have passed for the patched version of the vulnerability, "
    "but it fails. Please fix it and return the whole code.";
inline constexpr std::string_view kErrorPrefix = "The code you provided has errors in it: ";
inline constexpr std::string_view kErrorSuffix =
    ". Fix the error indicated by the compiler message, and answer with the WHOLE fixed code only.";
inline constexpr std::string_view kNoCodeNote = "your answer contained no code block";
} // namespace prompt_text

/// Characters of a failing log kept for an ERROR reprompt (its tail).
inline constexpr std::size_t kLogExcerptChars = 4000;

/// Throws PreconditionError when the focal snippet or patched method is empty.
PromptMessage build_initial_prompt(const FocalContext& focal, std::string_view patched_method,
                                   const VulnEntry& entry, const PromptConfig& config);

/// `log_excerpt` is required for ERROR (PreconditionError otherwise) and is
/// cut to its last kLogExcerptChars characters.
PromptMessage build_feedback_prompt(FeedbackKind kind,
                                    const std::optional<std::string>& log_excerpt = std::nullopt);

struct BudgetCheck {
    bool ok = true;
    std::size_t estimated_tokens = 0;
    std::size_t limit = 0;
};

/// ceil(bytes / 3) as a deliberately pessimistic token estimate. Throws
/// PreconditionError for a zero limit.
BudgetCheck check_budget(const PromptMessage& message, std::size_t limit);

inline constexpr std::size_t kDefaultTokenLimit = 128000;

} // namespace vwt
