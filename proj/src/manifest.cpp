#include "vwt/manifest.hpp"

#include "vwt/error.hpp"
#include "vwt/process.hpp"
#include "vwt/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <set>
#include <system_error>

#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt {

namespace {

constexpr std::string_view kMarkerName = ".vwt-materialized";

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// --- JSON schema -----------------------------------------------------------

class EntryReader {
public:
    EntryReader(const json& obj, std::string id) : obj_(obj), id_(std::move(id)) {}

    void reject_unknown(std::initializer_list<std::string_view> known, const std::string& where) {
        for (const auto& [key, _] : obj_.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw ValidationError(id_, where.empty() ? key : where + "." + key, "unknown field");
            }
        }
    }

    const json* find(const std::string& key) const {
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    const json& require(const std::string& key, const std::string& field) const {
        const json* v = find(key);
        if (v == nullptr) throw ValidationError(id_, field, "missing");
        return *v;
    }

    std::string string(const std::string& key, const std::string& field) const {
        const json& v = require(key, field);
        if (!v.is_string()) throw ValidationError(id_, field, "expected a string");
        return v.get<std::string>();
    }

    std::optional<std::string> optional_string(const std::string& key, const std::string& field) const {
        const json* v = find(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_string()) throw ValidationError(id_, field, "expected a string");
        return v->get<std::string>();
    }

    const std::string& id() const { return id_; }

private:
    const json& obj_;
    std::string id_;
};

fs::path resolve_path(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

TreeRef parse_tree_ref(const json& v, const std::string& id, const std::string& field,
                       const fs::path& base) {
    if (!v.is_object()) throw ValidationError(id, field, "expected an object");
    EntryReader r(v, id);
    TreeRef ref;
    if (v.contains("dir")) {
        r.reject_unknown({"dir"}, field);
        ref.kind = TreeRef::Kind::dir;
        ref.path = resolve_path(base, r.string("dir", field + ".dir"));
        return ref;
    }
    if (v.contains("git")) {
        r.reject_unknown({"git"}, field);
        const json& g = v.at("git");
        if (!g.is_object()) throw ValidationError(id, field + ".git", "expected an object");
        EntryReader gr(g, id);
        gr.reject_unknown({"url", "path", "rev"}, field + ".git");
        ref.kind = TreeRef::Kind::git;
        auto url = gr.optional_string("url", field + ".git.url");
        auto path = gr.optional_string("path", field + ".git.path");
        if (url.has_value() == path.has_value()) {
            throw ValidationError(id, field + ".git", "exactly one of url and path is required");
        }
        if (path) ref.path = resolve_path(base, *path);
        if (url) ref.url = *url;
        ref.rev = gr.string("rev", field + ".git.rev");
        if (ref.rev.empty()) throw ValidationError(id, field + ".git.rev", "empty revision");
        return ref;
    }
    throw ValidationError(id, field, "expected {\"dir\": ...} or {\"git\": {...}}");
}

json tree_ref_json(const TreeRef& ref) {
    if (ref.kind == TreeRef::Kind::dir) return json{{"dir", ref.path.string()}};
    json g{{"rev", ref.rev}};
    if (!ref.path.empty()) {
        g["path"] = ref.path.string();
    } else {
        g["url"] = ref.url;
    }
    return json{{"git", g}};
}

void check_relative(const fs::path& p, const std::string& id, const std::string& field) {
    if (p.empty()) throw ValidationError(id, field, "empty path");
    if (p.is_absolute()) throw ValidationError(id, field, "must be relative to the project root");
    for (const auto& part : p.lexically_normal()) {
        if (part == "..") throw ValidationError(id, field, "must not leave the project root");
    }
}

BuildSpec parse_build_spec(const json& v, const std::string& id) {
    const std::string field = "build_spec";
    if (!v.is_object()) throw ValidationError(id, field, "expected an object");
    EntryReader r(v, id);
    r.reject_unknown({"compile_and_test_command", "environment", "workdir", "timeout",
                      "container_image"},
                     field);
    BuildSpec spec;
    const json& cmd = r.require("compile_and_test_command", field + ".compile_and_test_command");
    if (!cmd.is_array() || cmd.empty()) {
        throw ValidationError(id, field + ".compile_and_test_command",
                              "expected a non-empty array of strings");
    }
    std::size_t placeholders = 0;
    for (const auto& arg : cmd) {
        if (!arg.is_string()) {
            throw ValidationError(id, field + ".compile_and_test_command", "expected strings");
        }
        spec.compile_and_test_command.push_back(arg.get<std::string>());
        placeholders += text::count_occurrences(spec.compile_and_test_command.back(),
                                                kTestClassPlaceholder);
    }
    if (placeholders != 1) {
        throw ValidationError(id, field + ".compile_and_test_command",
                              "must contain exactly one " + std::string(kTestClassPlaceholder) +
                                  " placeholder, found " + std::to_string(placeholders));
    }
    if (const json* env = r.find("environment")) {
        if (!env->is_object()) throw ValidationError(id, field + ".environment", "expected an object");
        for (const auto& [k, val] : env->items()) {
            if (!val.is_string()) {
                throw ValidationError(id, field + ".environment." + k, "expected a string");
            }
            spec.environment[k] = val.get<std::string>();
        }
    }
    if (auto wd = r.optional_string("workdir", field + ".workdir")) {
        spec.workdir = *wd;
        if (spec.workdir.empty()) spec.workdir = ".";
        if (spec.workdir != ".") check_relative(spec.workdir, id, field + ".workdir");
    }
    if (const json* t = r.find("timeout")) {
        if (!t->is_number()) throw ValidationError(id, field + ".timeout", "expected a number");
        spec.timeout_seconds = t->get<double>();
        if (!(spec.timeout_seconds > 0)) {
            throw ValidationError(id, field + ".timeout", "must be > 0");
        }
    }
    spec.container_image = r.optional_string("container_image", field + ".container_image");
    return spec;
}

VulnEntry parse_entry(const json& v, std::size_t index, const fs::path& base) {
    const std::string fallback_id = "#" + std::to_string(index);
    if (!v.is_object()) throw ValidationError(fallback_id, "", "entry must be an object");
    std::string id = fallback_id;
    if (auto it = v.find("id"); it != v.end() && it->is_string()) id = it->get<std::string>();
    EntryReader r(v, id);
    r.reject_unknown({"id", "cve_id", "cwe_id", "before_ref", "after_ref", "focal_file",
                      "method_locator", "patched_method_text", "test_target_dir", "build_spec"},
                     "");

    VulnEntry e;
    e.id = r.string("id", "id");
    if (text::trim(e.id).empty()) throw ValidationError(fallback_id, "id", "empty id");
    e.cve_id = r.optional_string("cve_id", "cve_id");
    e.cwe_id = r.optional_string("cwe_id", "cwe_id");
    if (e.cwe_id && (text::trim(*e.cwe_id).empty() || *e.cwe_id == kNotMapping)) e.cwe_id.reset();
    e.before_ref = parse_tree_ref(r.require("before_ref", "before_ref"), id, "before_ref", base);
    e.after_ref = parse_tree_ref(r.require("after_ref", "after_ref"), id, "after_ref", base);
    e.focal_file = r.string("focal_file", "focal_file");
    check_relative(e.focal_file, id, "focal_file");

    const json& loc = r.require("method_locator", "method_locator");
    if (!loc.is_object()) throw ValidationError(id, "method_locator", "expected an object");
    EntryReader lr(loc, id);
    lr.reject_unknown({"class_name", "method_name", "parameter_types"}, "method_locator");
    e.method_locator.class_name = lr.string("class_name", "method_locator.class_name");
    e.method_locator.method_name = lr.string("method_name", "method_locator.method_name");
    if (e.method_locator.class_name.empty() || e.method_locator.method_name.empty()) {
        throw ValidationError(id, "method_locator", "class_name and method_name must be non-empty");
    }
    if (const json* pt = lr.find("parameter_types")) {
        if (!pt->is_array()) {
            throw ValidationError(id, "method_locator.parameter_types", "expected an array");
        }
        std::vector<std::string> types;
        for (const auto& t : *pt) {
            if (!t.is_string()) {
                throw ValidationError(id, "method_locator.parameter_types", "expected strings");
            }
            types.push_back(t.get<std::string>());
        }
        e.method_locator.parameter_types = std::move(types);
    }

    e.patched_method_text = r.string("patched_method_text", "patched_method_text");
    if (text::trim(e.patched_method_text).empty()) {
        throw ValidationError(id, "patched_method_text", "empty");
    }
    e.test_target_dir = r.string("test_target_dir", "test_target_dir");
    check_relative(e.test_target_dir, id, "test_target_dir");
    e.build_spec = parse_build_spec(r.require("build_spec", "build_spec"), id);
    return e;
}

// --- trees -----------------------------------------------------------------

fs::path cache_root() {
    if (const char* env = std::getenv("VWTGEN_CACHE_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return fs::temp_directory_path() / ("vwtgen-trees-" + std::to_string(::getuid()));
}

ProcessResult git(const std::vector<std::string>& args, const fs::path& workdir = {}) {
    ProcessSpec spec;
    spec.argv = {"git"};
    spec.argv.insert(spec.argv.end(), args.begin(), args.end());
    spec.workdir = workdir;
    spec.timeout = std::chrono::minutes(30);
    return run_process(spec);
}

void require_ok(const ProcessResult& r, const std::string& what) {
    if (r.exit_code != 0) {
        throw IoError(what + " failed: " + std::string(text::trim(r.stderr_text)));
    }
}

std::mutex& cache_mutex() {
    static std::mutex m;
    return m;
}

fs::path export_git_tree(const TreeRef& ref) {
    const std::string source = ref.path.empty() ? ref.url : ref.path.string();
    const fs::path cache = cache_root();
    const fs::path target = cache / hex64(fnv1a(source + "\n" + ref.rev));
    std::lock_guard lock(cache_mutex());
    if (fs::exists(target / kMarkerName)) return target;

    std::error_code ec;
    fs::create_directories(cache, ec);
    if (ec) throw IoError("cannot create cache directory '" + cache.string() + "': " + ec.message());

    const fs::path staging = cache / (target.filename().string() + ".staging." + std::to_string(::getpid()));
    fs::remove_all(staging, ec);
    fs::create_directories(staging);

    fs::path repo = ref.path;
    if (repo.empty()) {
        repo = cache / (hex64(fnv1a(ref.url)) + ".git");
        if (!fs::exists(repo)) {
            require_ok(git({"clone", "--quiet", "--mirror", ref.url, repo.string()}),
                       "git clone " + ref.url);
        }
    }
    const fs::path archive = staging.string() + ".tar";
    require_ok(git({"-C", repo.string(), "archive", "--format=tar", "-o", archive.string(), ref.rev}),
               "git archive " + ref.describe());
    ProcessSpec tar;
    tar.argv = {"tar", "-xf", archive.string(), "-C", staging.string()};
    require_ok(run_process(tar), "tar");
    fs::remove(archive, ec);
    fsio::write_file_atomic(staging / kMarkerName, ref.describe() + "\n");
    fs::remove_all(target, ec);
    fs::rename(staging, target);
    return target;
}

bool contains_file(const fs::path& root, const fs::path& relative) {
    std::error_code ec;
    return fs::is_regular_file(root / relative, ec);
}

void copy_tree(const fs::path& from, const fs::path& to) {
    for (const auto& rel : list_tree_files(from)) {
        const fs::path dst = to / rel;
        fs::create_directories(dst.parent_path());
        fs::copy_file(from / rel, dst, fs::copy_options::overwrite_existing);
    }
}

std::string marker_text(const VulnEntry& entry, TreeVersion version) {
    return entry.id + "\n" + std::string(to_string(version)) + "\n" + entry.ref(version).describe() + "\n";
}

} // namespace

std::string TreeRef::describe() const {
    if (kind == Kind::dir) return "dir:" + path.string();
    return "git:" + (path.empty() ? url : path.string()) + "@" + rev;
}

std::string VulnEntry::cwe_group() const {
    return cwe_id ? *cwe_id : std::string(kNotMapping);
}

bool has_errors(const ValidationReport& report) {
    return std::any_of(report.begin(), report.end(), [](const ValidationIssue& i) {
        return i.severity == ValidationIssue::Severity::error;
    });
}

fs::path resolve_tree(const TreeRef& ref) {
    if (ref.kind == TreeRef::Kind::dir) {
        std::error_code ec;
        if (!fs::is_directory(ref.path, ec)) {
            throw IoError("source tree '" + ref.path.string() + "' is not a directory");
        }
        return ref.path;
    }
    return export_git_tree(ref);
}

std::vector<std::string> list_tree_files(const fs::path& root) {
    std::vector<std::string> out;
    std::error_code ec;
    fs::recursive_directory_iterator it(root, ec), end;
    if (ec) throw IoError("cannot list '" + root.string() + "': " + ec.message());
    for (; it != end; it.increment(ec)) {
        if (ec) throw IoError("cannot list '" + root.string() + "': " + ec.message());
        const auto name = it->path().filename().string();
        if (it->is_directory() && name == ".git") {
            it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        if (name == kMarkerName || name.ends_with(".vwt-generated")) continue;
        out.push_back(it->path().lexically_relative(root).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<VulnEntry> parse_manifest(std::string_view json_text, const fs::path& base_dir,
                                      const LoadOptions& options) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        auto lc = text::line_column(json_text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what(), lc.line, lc.column);
    }
    if (!doc.is_array()) throw ParseError("manifest must be a JSON array of entries");

    std::vector<VulnEntry> entries;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        VulnEntry e = parse_entry(doc[i], i, base_dir);
        if (!seen.insert(e.id).second) throw ValidationError(e.id, "id", "duplicate id");
        entries.push_back(std::move(e));
    }
    if (options.check_trees) {
        for (const auto& e : entries) {
            for (const auto& issue : validate_entry(e)) {
                if (issue.severity == ValidationIssue::Severity::error) {
                    throw ValidationError(e.id, issue.field, issue.message);
                }
            }
        }
    }
    return entries;
}

std::vector<VulnEntry> load_manifest(const fs::path& path, const LoadOptions& options) {
    const std::string text = fsio::read_file(path);
    fs::path base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_manifest(text, fs::absolute(base), options);
}

json to_json(const VulnEntry& e) {
    json loc{{"class_name", e.method_locator.class_name},
             {"method_name", e.method_locator.method_name}};
    if (e.method_locator.parameter_types) loc["parameter_types"] = *e.method_locator.parameter_types;
    json build{{"compile_and_test_command", e.build_spec.compile_and_test_command},
               {"environment", e.build_spec.environment},
               {"workdir", e.build_spec.workdir.generic_string()},
               {"timeout", e.build_spec.timeout_seconds}};
    if (e.build_spec.container_image) build["container_image"] = *e.build_spec.container_image;
    json out{{"id", e.id},
             {"before_ref", tree_ref_json(e.before_ref)},
             {"after_ref", tree_ref_json(e.after_ref)},
             {"focal_file", e.focal_file.generic_string()},
             {"method_locator", loc},
             {"patched_method_text", e.patched_method_text},
             {"test_target_dir", e.test_target_dir.generic_string()},
             {"build_spec", build}};
    if (e.cve_id) out["cve_id"] = *e.cve_id;
    if (e.cwe_id) out["cwe_id"] = *e.cwe_id;
    return out;
}

ValidationReport validate_entry(const VulnEntry& entry) {
    ValidationReport report;
    auto error = [&](std::string field, std::string msg) {
        report.push_back({ValidationIssue::Severity::error, std::move(field), std::move(msg)});
    };
    auto warning = [&](std::string field, std::string msg) {
        report.push_back({ValidationIssue::Severity::warning, std::move(field), std::move(msg)});
    };

    const auto& cmd = entry.build_spec.compile_and_test_command;
    std::size_t placeholders = 0;
    for (const auto& arg : cmd) placeholders += text::count_occurrences(arg, kTestClassPlaceholder);
    if (placeholders != 1) {
        error("build_spec.compile_and_test_command",
              "must contain exactly one " + std::string(kTestClassPlaceholder) + " placeholder");
    }
    if (!(entry.build_spec.timeout_seconds > 0)) error("build_spec.timeout", "must be > 0");
    if (text::trim(entry.patched_method_text).empty()) error("patched_method_text", "empty");

    std::optional<fs::path> roots[2];
    const char* ref_fields[2] = {"before_ref", "after_ref"};
    for (auto version : {TreeVersion::before, TreeVersion::after}) {
        const int i = version == TreeVersion::before ? 0 : 1;
        try {
            roots[i] = resolve_tree(entry.ref(version));
        } catch (const Error& e) {
            error(ref_fields[i], e.what());
            continue;
        }
        if (!contains_file(*roots[i], entry.focal_file)) {
            error("focal_file", "'" + entry.focal_file.generic_string() + "' not found in " +
                                    ref_fields[i]);
            roots[i].reset();
            continue;
        }
        std::error_code ec;
        fs::path cursor = *roots[i];
        for (const auto& part : entry.test_target_dir) {
            cursor /= part;
            if (fs::exists(cursor, ec) && !fs::is_directory(cursor, ec)) {
                error("test_target_dir", "'" + cursor.lexically_relative(*roots[i]).generic_string() +
                                             "' in " + ref_fields[i] + " is not a directory");
                break;
            }
        }
    }

    if (roots[0]) {
        try {
            const std::string source = fsio::read_file(*roots[0] / entry.focal_file);
            extract_fragments(source, entry.method_locator);
        } catch (const LocatorError& e) {
            error("method_locator", e.what());
        } catch (const ParseError& e) {
            error("focal_file", std::string("before version does not parse: ") + e.what());
        }
    }

    if (roots[1]) {
        const std::string after = fsio::read_file(*roots[1] / entry.focal_file);
        if (!text::contains(text::normalize_whitespace(after),
                            text::normalize_whitespace(entry.patched_method_text))) {
            warning("patched_method_text",
                    "not found in the after version of focal_file (whitespace-normalized)");
        }
    }

    if (roots[0] && roots[1]) {
        auto before_files = list_tree_files(*roots[0]);
        auto after_files = list_tree_files(*roots[1]);
        std::set<std::string> all(before_files.begin(), before_files.end());
        all.insert(after_files.begin(), after_files.end());
        const std::string test_prefix = entry.test_target_dir.generic_string() + "/";
        std::vector<std::string> changed_sources;
        bool focal_changed = false;
        for (const auto& rel : all) {
            const bool in_before = std::binary_search(before_files.begin(), before_files.end(), rel);
            const bool in_after = std::binary_search(after_files.begin(), after_files.end(), rel);
            bool differs = in_before != in_after;
            if (!differs) differs = fsio::read_file(*roots[0] / rel) != fsio::read_file(*roots[1] / rel);
            if (!differs) continue;
            if (rel == entry.focal_file.generic_string()) focal_changed = true;
            if (rel.rfind(test_prefix, 0) == 0 || !rel.ends_with(".java")) continue;
            changed_sources.push_back(rel);
        }
        if (!focal_changed) error("focal_file", "before and after versions are identical");
        if (changed_sources.size() > 1) {
            warning("focal_file", "fix is not confined to one class: " +
                                      std::to_string(changed_sources.size()) +
                                      " source files differ (" + text::join(changed_sources, ", ") + ")");
        }
    }
    return report;
}

fs::path materialize(const VulnEntry& entry, TreeVersion version, const fs::path& workspace) {
    const fs::path source = resolve_tree(entry.ref(version));
    if (!contains_file(source, entry.focal_file)) {
        throw IoError("'" + entry.focal_file.generic_string() + "' not found in " +
                      entry.ref(version).describe());
    }
    std::error_code ec;
    if (fs::exists(workspace, ec)) {
        if (!fs::is_directory(workspace, ec)) {
            throw IoError("workspace '" + workspace.string() + "' is not a directory");
        }
        const bool empty = fs::is_empty(workspace, ec);
        if (!empty) {
            const fs::path marker = workspace / kMarkerName;
            if (!fs::exists(marker, ec)) {
                throw IoError("workspace '" + workspace.string() +
                              "' is not empty and was not created by materialize");
            }
            // a previous materialization: start over so the result is identical
            for (const auto& child : fs::directory_iterator(workspace)) fs::remove_all(child.path());
        }
    } else {
        fs::create_directories(workspace, ec);
        if (ec) throw IoError("cannot create workspace '" + workspace.string() + "': " + ec.message());
    }
    fsio::write_file_atomic(workspace / kMarkerName, marker_text(entry, version));
    try {
        copy_tree(source, workspace);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("materialize failed: ") + e.what());
    }
    return workspace;
}

} // namespace vwt
