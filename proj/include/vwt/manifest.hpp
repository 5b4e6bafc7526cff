#pragma once

#include "vwt/focal_context.hpp"
#include "vwt/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vwt {

inline constexpr std::string_view kTestClassPlaceholder = "{test_class}";
inline constexpr std::string_view kNotMapping = "Not Mapping";

/// A source tree: a plain directory, or a revision of a git repository.
struct TreeRef {
    enum class Kind { dir, git };
    Kind kind = Kind::dir;
    std::filesystem::path path;  ///< directory, or local repository for git
    std::string url;             ///< remote repository (git only, when path is empty)
    std::string rev;             ///< git only

    std::string describe() const;
};

struct BuildSpec {
    /// argv template; exactly one element contains kTestClassPlaceholder.
    std::vector<std::string> compile_and_test_command;
    std::map<std::string, std::string> environment;
    std::filesystem::path workdir = ".";  ///< relative to the tree root
    double timeout_seconds = 600.0;
    std::optional<std::string> container_image;
};

struct VulnEntry {
    std::string id;
    std::optional<std::string> cve_id;
    std::optional<std::string> cwe_id;
    TreeRef before_ref;
    TreeRef after_ref;
    std::filesystem::path focal_file;
    MethodLocator method_locator;
    std::string patched_method_text;
    std::filesystem::path test_target_dir;
    BuildSpec build_spec;

    /// cwe_id, or "Not Mapping" when absent.
    std::string cwe_group() const;
    const TreeRef& ref(TreeVersion version) const {
        return version == TreeVersion::before ? before_ref : after_ref;
    }
};

struct ValidationIssue {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string field;
    std::string message;
};

using ValidationReport = std::vector<ValidationIssue>;

bool has_errors(const ValidationReport& report);

struct LoadOptions {
    /// Resolve trees and the method locator while loading. Without it only
    /// the schema and the build-spec invariants are checked.
    bool check_trees = true;
};

/// Parses and validates a manifest. Relative tree paths resolve against the
/// manifest's directory. Throws ParseError or ValidationError (the first
/// error-severity issue of the first failing entry).
std::vector<VulnEntry> load_manifest(const std::filesystem::path& path,
                                     const LoadOptions& options = {});

std::vector<VulnEntry> parse_manifest(std::string_view json_text,
                                      const std::filesystem::path& base_dir,
                                      const LoadOptions& options = {});

nlohmann::json to_json(const VulnEntry& entry);

/// Every failed invariant of the entry. Single-class and patched-text
/// consistency findings are warnings; everything else is an error.
ValidationReport validate_entry(const VulnEntry& entry);

/// Copies (dir) or exports (git) the requested version into `workspace` and
/// returns the tree root. The workspace must be absent, empty, or a previous
/// materialization, which is replaced.
std::filesystem::path materialize(const VulnEntry& entry, TreeVersion version,
                                  const std::filesystem::path& workspace);

/// Directory holding the tree's files. Git revisions are exported once into
/// a cache directory (VWTGEN_CACHE_DIR, default <tmp>/vwtgen-trees) and
/// reused. Throws IoError when the reference does not resolve.
std::filesystem::path resolve_tree(const TreeRef& ref);

/// Regular files below `root`, relative and sorted; `.git` and
/// materialization markers are skipped.
std::vector<std::string> list_tree_files(const std::filesystem::path& root);

} // namespace vwt
