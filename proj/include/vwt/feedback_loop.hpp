#pragma once

#include "vwt/llm_client.hpp"
#include "vwt/manifest.hpp"
#include "vwt/prompt.hpp"
#include "vwt/test_harness.hpp"
#include "vwt/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vwt {

enum class TerminationReason {
    accepted,
    consecutive_errors,
    stagnation,
    extraction_failure,
    budget_exceeded
};

enum class RunStatus { in_progress, complete, failed };

std::string_view to_string(TerminationReason reason);
std::string_view to_string(RunStatus status);
std::optional<TerminationReason> parse_termination_reason(std::string_view text);
std::optional<RunStatus> parse_run_status(std::string_view text);

struct IterationRecord {
    std::size_t ordinal = 0;
    /// Empty for the initial prompt.
    std::optional<FeedbackKind> prompt_kind;
    /// The prompt was an ERROR reprompt about a missing code block.
    bool no_code_reprompt = false;
    std::optional<std::string> extracted_code;
    std::optional<std::string> test_class;
    bool class_name_deviation = false;
    std::optional<TestOutcome> before_outcome;
    std::optional<TestOutcome> after_outcome;
    /// Relative to the directory of the run record.
    std::optional<std::string> before_log;
    std::optional<std::string> after_log;

    std::optional<OutcomePair> pair() const;
};

struct RunRecord {
    std::string entry_id;
    ContextLevel level = ContextLevel::L0;
    PromptVariant config = PromptVariant::baseline;
    std::string conversation_id;
    std::string model;
    std::string cwe_group;
    bool missing_cwe_warning = false;
    std::vector<IterationRecord> iterations;
    std::optional<std::size_t> best_iteration;
    OutcomePair final_pair;
    std::optional<TerminationReason> termination_reason;
    RunStatus status = RunStatus::in_progress;
    std::optional<std::string> error;
};

inline constexpr std::string_view kRunRecordSchema = "vwt.run_record/1";

nlohmann::json to_json(const RunRecord& record);
/// Throws ParseError on a schema mismatch.
RunRecord run_record_from_json(const nlohmann::json& j);
RunRecord load_run_record(const std::filesystem::path& path);
void save_run_record(const std::filesystem::path& path, const RunRecord& record);

/// `<runs>/<config>/<level>/<entry>.json`
std::filesystem::path run_record_path(const std::filesystem::path& runs_dir,
                                      const std::string& entry_id, ContextLevel level,
                                      PromptVariant config);
/// "<entry>.<level>.<config>"
std::string conversation_id(const std::string& entry_id, ContextLevel level, PromptVariant config);

struct LoopState {
    int consecutive_err_count = 0;
    int compilable_noimprove_count = 0;

    friend bool operator==(const LoopState&, const LoopState&) = default;
};

struct LoopLimits {
    int max_consecutive_errors = 3;
    int stagnation_limit = 5;
    int max_consecutive_no_code = 3;
    std::size_t hard_cap = 18;
    std::size_t token_limit = kDefaultTokenLimit;
};

/// Empty means accept: only (FAIL, PASS). Priority ERROR > BEFORE_PASS >
/// AFTER_FAIL.
std::optional<FeedbackKind> select_feedback(const TestOutcome& before, const TestOutcome& after);
std::optional<FeedbackKind> select_feedback(OutcomePair pair);

struct StateUpdate {
    LoopState state;
    std::optional<TerminationReason> stop;
};

/// Acceptance is the caller's business; a (FAIL, PASS) pair here counts as a
/// compilable generation like any other.
StateUpdate update_state(const LoopState& state, OutcomePair pair, const LoopLimits& limits = {});

/// Rank 3 for (FAIL, PASS), 2 without ERR, 1 with one ERR, 0 for (ERR, ERR).
int generation_rank(OutcomePair pair);
/// Highest rank, latest ordinal on ties; empty when no iteration ran code.
std::optional<std::size_t> select_best_generation(const std::vector<IterationRecord>& iterations);

struct Execution {
    TestOutcome outcome;
    ExecutionLog log;
    std::optional<std::string> test_class;
    bool class_name_deviation = false;
};

/// Runs one generated test against one version of the entry.
class TestRunner {
public:
    virtual ~TestRunner() = default;
    virtual Execution execute(const VulnEntry& entry, TreeVersion version, std::string_view code) = 0;
};

/// Places and runs tests in a pair of materialized workspaces, holding the
/// workspace lock for each execution. Code without a class declaration
/// yields a synthesized ERR without running anything.
class WorkspaceTestRunner : public TestRunner {
public:
    WorkspaceTestRunner(std::filesystem::path before_workspace, std::filesystem::path after_workspace,
                        LogMarkers markers = {});
    Execution execute(const VulnEntry& entry, TreeVersion version, std::string_view code) override;

private:
    std::filesystem::path before_;
    std::filesystem::path after_;
    LogMarkers markers_;
};

struct LoopContext {
    TranscriptStore* store = nullptr;
    ChatProvider* provider = nullptr;  ///< may be null in replay mode
    TestRunner* runner = nullptr;
    RetryPolicy retry;
    std::filesystem::path runs_dir;
    std::string model = "gpt-4-turbo";
    std::map<std::string, std::string> sampling_params;
    LoopLimits limits;
    /// Called after each persisted iteration.
    std::function<void(const RunRecord&)> on_iteration;
};

/// Focal context of the entry at the level, from the before tree.
FocalContext focal_context_for(const VulnEntry& entry, ContextLevel level);

/// The generate, execute, reprompt cycle for one (entry, level, config).
/// The record is persisted after every iteration; on a provider or replay
/// error it is saved with status failed and the error rethrown.
RunRecord run_entry(const VulnEntry& entry, ContextLevel level, PromptVariant config,
                    LoopContext& context);

} // namespace vwt
