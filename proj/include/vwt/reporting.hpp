#pragma once

#include "vwt/feedback_loop.hpp"
#include "vwt/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vwt {

enum class ManualVerdict { ok, no };

struct ManualLabel {
    std::string entry_id;
    ContextLevel level = ContextLevel::L0;
    PromptVariant config = PromptVariant::baseline;
    ManualVerdict label = ManualVerdict::no;
};

/// Labels indexed by (entry, level, config). Throws ParseError on a
/// duplicate key.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(const std::vector<ManualLabel>& labels);

    std::optional<ManualVerdict> find(const std::string& entry_id, ContextLevel level,
                                      PromptVariant config) const;
    bool empty() const { return labels_.empty(); }
    std::size_t size() const { return labels_.size(); }

private:
    std::map<std::tuple<std::string, ContextLevel, PromptVariant>, ManualVerdict> labels_;
};

/// CSV with header `entry_id,level,config,label`; label is OK or NO.
std::vector<ManualLabel> parse_labels_csv(std::string_view text);
/// CSV with header `entry_id,cwe_id`; an empty cwe_id means Not Mapping.
std::map<std::string, std::string> parse_cwe_map_csv(std::string_view text);

/// Records counted as not syntactically correct while staying in the
/// denominator.
using ExclusionSet = std::set<std::pair<std::string, ContextLevel>>;
/// CSV with header `entry_id,level`.
ExclusionSet parse_exclusions_csv(std::string_view text);

bool syntactic_correct(const RunRecord& record);
bool semantic_correct(const RunRecord& record);

/// x rounded to one decimal, halves away from negative infinity.
double round_half_up_1(double x);
/// "66.5"
std::string format_rate(double percent);
/// "+14.7", "-7.5", "0.0"
std::string format_delta(double delta);

struct Rate {
    std::size_t count = 0;
    std::size_t total = 0;

    /// Unrounded percentage.
    double percent() const;
    /// One decimal, half-up.
    double rounded() const { return round_half_up_1(percent()); }
};

struct Scope {
    std::optional<ContextLevel> level;
    std::optional<PromptVariant> config;
    std::optional<std::string> cwe_group;

    std::string describe() const;
};

struct SummaryOptions {
    ExclusionSet syntactic_exclusions;
    /// entry id -> CWE; consulted for Scope::cwe_group instead of the
    /// record's own group when set.
    const std::map<std::string, std::string>* cwe_map = nullptr;
};

struct MetricsSummary {
    Scope scope;
    std::size_t total = 0;
    std::size_t syntactic_ok = 0;
    std::size_t semantic_ok = 0;
    /// Absent without labels.
    std::optional<std::size_t> usable;

    Rate syntactic() const { return {syntactic_ok, total}; }
    Rate semantic() const { return {semantic_ok, total}; }
    std::optional<Rate> usability() const;
};

std::string cwe_group_of(const RunRecord& record, const SummaryOptions& options);

/// Throws PreconditionError when the scope selects no record.
MetricsSummary summarize(const std::vector<RunRecord>& records, const LabelSet& labels,
                         const Scope& scope, const SummaryOptions& options = {});

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notices;
};

enum class TableFormat { markdown, csv, text };
std::string_view to_string(TableFormat format);
std::optional<TableFormat> parse_table_format(std::string_view text);
std::string_view file_extension(TableFormat format);
std::string render(const Table& table, TableFormat format = TableFormat::markdown);

/// Rows in the order baseline, no_emotion, no_role, with_cwe; a missing
/// config is omitted with a notice. Throws PreconditionError without a
/// baseline.
Table ablation_table(const std::map<PromptVariant, MetricsSummary>& summaries);

struct CweRow {
    std::string group;
    std::size_t entries = 0;
    MetricsSummary summary;
    /// Percentage points versus the average, rounded; absent on the
    /// Average row.
    std::optional<double> syntactic_delta;
    std::optional<double> semantic_delta;
    std::optional<double> usable_delta;
};

inline constexpr std::string_view kAverageRow = "Average";

/// Average row first, then groups with at least `min_group` entries in
/// numeric CWE order, then Not Mapping (regardless of its size).
std::vector<CweRow> cwe_rows(const std::vector<RunRecord>& records, const LabelSet& labels,
                             const std::map<std::string, std::string>& cwe_map,
                             std::size_t min_group, const ExclusionSet& exclusions = {});
Table cwe_table(const std::vector<CweRow>& rows);

enum class FailureCategory {
    import_error,
    undetected_test,
    mistargeted_test,
    misused_call,
    visibility_error,
    version_error,
    other
};
std::string_view to_string(FailureCategory category);
inline constexpr std::array<FailureCategory, 7> kAllFailureCategories{
    FailureCategory::import_error,     FailureCategory::undetected_test,
    FailureCategory::mistargeted_test, FailureCategory::misused_call,
    FailureCategory::visibility_error, FailureCategory::version_error,
    FailureCategory::other};

struct FailurePattern {
    FailureCategory category = FailureCategory::other;
    std::string evidence;
};

struct FocalSignature {
    std::string name;
    std::vector<std::string> parameter_types;
};

struct FailureContext {
    /// Directory holding the record; log paths are relative to it.
    std::filesystem::path record_dir;
    std::optional<FocalSignature> focal;
};

/// Heuristic tag for a record that is not semantically correct, taken from
/// its best iteration. Checks run in the order undetected, mistargeted,
/// import, visibility, version, misused call; the rest is other. Empty for
/// semantically correct records.
std::optional<FailurePattern> classify_failure(const RunRecord& record,
                                               const FailureContext& context = {});

/// Table 1 layout: Before, After and Manual per level, one row per entry.
/// Missing records show "-".
Table emit_results_table(const std::vector<RunRecord>& records, const LabelSet& labels);

/// Complete records below `<runs>/<config>/<level>/`, sorted by config,
/// level and entry. Records of other status go to `skipped`.
std::vector<RunRecord> load_run_records(const std::filesystem::path& runs_dir,
                                        std::vector<std::string>* skipped = nullptr);

struct ReportOptions {
    ExclusionSet syntactic_exclusions;
    std::optional<std::map<std::string, std::string>> cwe_map;
    std::size_t min_group = 4;
    TableFormat format = TableFormat::markdown;
    /// Focal signatures by entry id, for the mistargeted-test check.
    std::map<std::string, FocalSignature> focal_signatures;
    /// Root of the records, for log lookup.
    std::filesystem::path runs_dir;
};

/// table1, ablation, cwe and failures in the chosen format plus
/// summary.json. Output depends only on the inputs.
nlohmann::json write_report_bundle(const std::vector<RunRecord>& records,
                                   const std::optional<LabelSet>& labels,
                                   const ReportOptions& options,
                                   const std::filesystem::path& out_dir,
                                   const std::vector<std::string>& notices = {});

} // namespace vwt
