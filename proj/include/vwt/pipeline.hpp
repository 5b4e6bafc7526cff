#pragma once

#include "vwt/feedback_loop.hpp"
#include "vwt/llm_client.hpp"
#include "vwt/reporting.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vwt {

/// Fixed layout below the output directory; each part can be moved.
struct OutputLayout {
    std::filesystem::path runs;
    std::filesystem::path transcripts;
    std::filesystem::path workspaces;
    std::filesystem::path report;

    static OutputLayout under(const std::filesystem::path& out);
};

struct RunConfig {
    std::filesystem::path manifest;
    std::vector<ContextLevel> levels{kAllLevels.begin(), kAllLevels.end()};
    std::vector<PromptVariant> configs{PromptVariant::baseline};
    TranscriptMode mode = TranscriptMode::record;
    int workers = 1;
    OutputLayout layout = OutputLayout::under("vwt-out");
    bool dry_run = false;
    /// Recompute records that are already complete.
    bool force = false;
    /// Empty selects every entry.
    std::vector<std::string> entries;
    /// Canned answers instead of the HTTP provider (record and live modes).
    std::optional<std::filesystem::path> provider_script;
    HttpProviderSettings http;
    std::map<std::string, std::string> sampling_params;
    bool strict_replay = true;
    LoopLimits limits;
    RetryPolicy retry;

    /// Throws PreconditionError.
    void check() const;
};

struct RunSummary {
    std::size_t requested = 0;
    std::size_t skipped = 0;    ///< already complete
    std::size_t completed = 0;  ///< computed by this invocation
    std::vector<std::string> failures;

    /// 0 when every requested record is complete, 2 otherwise.
    int exit_code() const { return failures.empty() ? 0 : 2; }
};

/// Every (entry x level x config) gets a RunRecord. Configuration problems
/// throw; per-run problems are recorded as failed runs.
RunSummary cmd_run(const RunConfig& config, std::ostream& log);

struct SliceOptions {
    bool with_prompts = false;
    std::vector<PromptVariant> configs{PromptVariant::baseline};
    bool dry_run = false;
};

/// Writes `<id>.L0.txt` .. `<id>.L3.txt` (and `<id>.<level>.<config>.prompt.txt`
/// with prompts); returns the paths. Throws PreconditionError for an unknown id.
std::vector<std::filesystem::path> cmd_slice(const std::filesystem::path& manifest,
                                             const std::string& entry_id,
                                             const std::filesystem::path& out_dir,
                                             const SliceOptions& options = {});

struct ReportConfig {
    std::filesystem::path runs_dir;
    std::optional<std::filesystem::path> labels;
    std::optional<std::filesystem::path> cwe_map;
    std::optional<std::filesystem::path> syntax_exclusions;
    /// Supplies focal signatures for failure tagging.
    std::optional<std::filesystem::path> manifest;
    std::filesystem::path out_dir;
    std::size_t min_group = 4;
    TableFormat format = TableFormat::markdown;
    bool dry_run = false;
};

/// Writes the report bundle and returns summary.json's content. Throws
/// PreconditionError when the runs directory holds no complete record.
nlohmann::json cmd_report(const ReportConfig& config, std::ostream& log);

/// Prints every issue; returns 0 without errors, 1 otherwise.
int cmd_validate(const std::filesystem::path& manifest, std::ostream& log);

} // namespace vwt
