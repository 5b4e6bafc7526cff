#include "vwt/reporting.hpp"

#include "vwt/error.hpp"
#include "vwt/java_syntax.hpp"
#include "vwt/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt {

// --- CSV inputs ------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::string(text::trim(field)));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw ParseError("unterminated quote", lineno, line.size());
    out.push_back(std::string(text::trim(field)));
    return out;
}

/// Rows after the header, which must equal `header`. Blank lines and lines
/// starting with '#' are skipped.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv(
    std::string_view content, const std::vector<std::string>& header) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    bool seen_header = false;
    std::size_t lineno = 0;
    for (auto raw : text::split_lines(content)) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_csv_line(line, lineno);
        if (!seen_header) {
            if (fields != header) {
                throw ParseError("expected CSV header '" + text::join(header, ",") + "'", lineno, 1);
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             lineno, 1);
        }
        rows.emplace_back(lineno, std::move(fields));
    }
    if (!seen_header) throw ParseError("missing CSV header '" + text::join(header, ",") + "'");
    return rows;
}

ContextLevel level_field(const std::string& s, std::size_t lineno) {
    auto l = parse_level(s);
    if (!l) throw ParseError("unknown level '" + s + "'", lineno, 1);
    return *l;
}

} // namespace

std::vector<ManualLabel> parse_labels_csv(std::string_view content) {
    std::vector<ManualLabel> out;
    for (auto& [lineno, f] : read_csv(content, {"entry_id", "level", "config", "label"})) {
        ManualLabel l;
        l.entry_id = f[0];
        l.level = level_field(f[1], lineno);
        auto cfg = parse_variant(f[2]);
        if (!cfg) throw ParseError("unknown config '" + f[2] + "'", lineno, 1);
        l.config = *cfg;
        if (f[3] == "OK") l.label = ManualVerdict::ok;
        else if (f[3] == "NO") l.label = ManualVerdict::no;
        else throw ParseError("label must be OK or NO, got '" + f[3] + "'", lineno, 1);
        out.push_back(std::move(l));
    }
    return out;
}

std::map<std::string, std::string> parse_cwe_map_csv(std::string_view content) {
    std::map<std::string, std::string> out;
    for (auto& [lineno, f] : read_csv(content, {"entry_id", "cwe_id"})) {
        const std::string cwe = f[1].empty() ? std::string(kNotMapping) : f[1];
        if (!out.emplace(f[0], cwe).second) throw ParseError("duplicate entry '" + f[0] + "'", lineno, 1);
    }
    return out;
}

ExclusionSet parse_exclusions_csv(std::string_view content) {
    ExclusionSet out;
    for (auto& [lineno, f] : read_csv(content, {"entry_id", "level"})) {
        out.emplace(f[0], level_field(f[1], lineno));
    }
    return out;
}

LabelSet::LabelSet(const std::vector<ManualLabel>& labels) {
    for (const auto& l : labels) {
        if (!labels_.emplace(std::tuple{l.entry_id, l.level, l.config}, l.label).second) {
            throw ParseError("duplicate label for " + l.entry_id + " " + std::string(to_string(l.level)) +
                             " " + std::string(to_string(l.config)));
        }
    }
}

std::optional<ManualVerdict> LabelSet::find(const std::string& entry_id, ContextLevel level,
                                            PromptVariant config) const {
    auto it = labels_.find(std::tuple{entry_id, level, config});
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

// --- metrics ---------------------------------------------------------------

bool syntactic_correct(const RunRecord& r) {
    return r.final_pair.before != Verdict::err && r.final_pair.after != Verdict::err;
}

bool semantic_correct(const RunRecord& r) {
    return r.final_pair == OutcomePair{Verdict::fail, Verdict::pass};
}

double round_half_up_1(double x) { return std::floor(x * 10.0 + 0.5) / 10.0; }

std::string format_rate(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round_half_up_1(percent));
    return buf;
}

std::string format_delta(double delta) {
    const double r = round_half_up_1(delta);
    if (r == 0.0) return "0.0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.1f", r);
    return buf;
}

double Rate::percent() const {
    if (total == 0) return 0.0;
    return static_cast<double>(count) / static_cast<double>(total) * 100.0;
}

std::optional<Rate> MetricsSummary::usability() const {
    if (!usable) return std::nullopt;
    return Rate{*usable, total};
}

std::string Scope::describe() const {
    std::vector<std::string> parts;
    if (config) parts.push_back("config " + std::string(to_string(*config)));
    if (level) parts.push_back("level " + std::string(to_string(*level)));
    if (cwe_group) parts.push_back("group " + *cwe_group);
    return parts.empty() ? "all records" : text::join(parts, ", ");
}

std::string cwe_group_of(const RunRecord& record, const SummaryOptions& options) {
    if (options.cwe_map != nullptr) {
        auto it = options.cwe_map->find(record.entry_id);
        return it == options.cwe_map->end() ? std::string(kNotMapping) : it->second;
    }
    return record.cwe_group.empty() ? std::string(kNotMapping) : record.cwe_group;
}

MetricsSummary summarize(const std::vector<RunRecord>& records, const LabelSet& labels,
                         const Scope& scope, const SummaryOptions& options) {
    MetricsSummary s;
    s.scope = scope;
    std::size_t usable = 0;
    for (const auto& r : records) {
        if (scope.level && r.level != *scope.level) continue;
        if (scope.config && r.config != *scope.config) continue;
        if (scope.cwe_group && cwe_group_of(r, options) != *scope.cwe_group) continue;
        ++s.total;
        const bool excluded = options.syntactic_exclusions.count({r.entry_id, r.level}) != 0;
        if (syntactic_correct(r) && !excluded) ++s.syntactic_ok;
        if (semantic_correct(r)) ++s.semantic_ok;
        if (labels.find(r.entry_id, r.level, r.config) == ManualVerdict::ok) ++usable;
    }
    if (s.total == 0) throw PreconditionError("scope '" + scope.describe() + "' selects no records");
    if (!labels.empty()) s.usable = usable;
    return s;
}

// --- tables ----------------------------------------------------------------

std::string_view to_string(TableFormat format) {
    switch (format) {
    case TableFormat::markdown: return "md";
    case TableFormat::csv: return "csv";
    case TableFormat::text: return "text";
    }
    return "?";
}

std::optional<TableFormat> parse_table_format(std::string_view t) {
    if (t == "md" || t == "markdown") return TableFormat::markdown;
    if (t == "csv") return TableFormat::csv;
    if (t == "text" || t == "txt") return TableFormat::text;
    return std::nullopt;
}

std::string_view file_extension(TableFormat format) {
    switch (format) {
    case TableFormat::markdown: return ".md";
    case TableFormat::csv: return ".csv";
    case TableFormat::text: return ".txt";
    }
    return "";
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    return "\"" + text::replace_all(s, "\"", "\"\"") + "\"";
}

std::string md_cell(const std::string& s) { return text::replace_all(s, "|", "\\|"); }

} // namespace

std::string render(const Table& t, TableFormat format) {
    std::string out;
    switch (format) {
    case TableFormat::markdown: {
        auto row = [&](const std::vector<std::string>& cells) {
            out += "|";
            for (const auto& c : cells) out += " " + md_cell(c) + " |";
            out += "\n";
        };
        row(t.header);
        out += "|";
        for (std::size_t i = 0; i < t.header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
        out += "\n";
        for (const auto& r : t.rows) row(r);
        if (!t.notices.empty()) out += "\n";
        for (const auto& n : t.notices) out += "> " + n + "\n";
        break;
    }
    case TableFormat::csv: {
        auto row = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
            out += "\n";
        };
        row(t.header);
        for (const auto& r : t.rows) row(r);
        for (const auto& n : t.notices) out += "# " + n + "\n";
        break;
    }
    case TableFormat::text: {
        std::vector<std::size_t> width(t.header.size(), 0);
        auto measure = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) {
                width[i] = std::max(width[i], cells[i].size());
            }
        };
        measure(t.header);
        for (const auto& r : t.rows) measure(r);
        auto row = [&](const std::vector<std::string>& cells) {
            std::string line;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) line += "  ";
                line += cells[i];
                if (i + 1 < cells.size()) line += std::string(width[i] - std::min(width[i], cells[i].size()), ' ');
            }
            out += std::string(text::trim_right(line)) + "\n";
        };
        row(t.header);
        std::vector<std::string> rule;
        for (auto w : width) rule.push_back(std::string(w, '-'));
        row(rule);
        for (const auto& r : t.rows) row(r);
        for (const auto& n : t.notices) out += "note: " + n + "\n";
        break;
    }
    }
    return out;
}

namespace {
std::string pct(const Rate& r) { return format_rate(r.percent()) + "%"; }
} // namespace

Table ablation_table(const std::map<PromptVariant, MetricsSummary>& summaries) {
    if (summaries.count(PromptVariant::baseline) == 0) {
        throw PreconditionError("the ablation table needs the baseline config");
    }
    Table t;
    t.header = {"Config", "Syntactic", "Semantic"};
    for (auto v : kAllVariants) {
        auto it = summaries.find(v);
        if (it == summaries.end()) {
            t.notices.push_back("no runs for config '" + std::string(to_string(v)) + "'; row omitted");
            continue;
        }
        t.rows.push_back({std::string(to_string(v)), pct(it->second.syntactic()), pct(it->second.semantic())});
    }
    return t;
}

namespace {

/// Numeric CWE id, or -1 for anything else.
long cwe_number(const std::string& group) {
    static const std::regex re(R"(CWE-(\d+))");
    std::smatch m;
    if (std::regex_match(group, m, re)) return std::stol(m[1]);
    return -1;
}

double fraction(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

double delta(std::size_t gc, std::size_t gt, std::size_t ac, std::size_t at) {
    return round_half_up_1((fraction(gc, gt) - fraction(ac, at)) * 100.0);
}

} // namespace

std::vector<CweRow> cwe_rows(const std::vector<RunRecord>& records, const LabelSet& labels,
                             const std::map<std::string, std::string>& cwe_map, std::size_t min_group,
                             const ExclusionSet& exclusions) {
    if (min_group < 1) throw PreconditionError("min_group must be >= 1");
    SummaryOptions opts;
    opts.syntactic_exclusions = exclusions;
    opts.cwe_map = &cwe_map;

    std::map<std::string, std::set<std::string>> members;
    for (const auto& r : records) members[cwe_group_of(r, opts)].insert(r.entry_id);

    std::vector<CweRow> rows;
    CweRow avg;
    avg.group = std::string(kAverageRow);
    avg.summary = summarize(records, labels, Scope{}, opts);
    for (const auto& [_, ids] : members) avg.entries += ids.size();
    rows.push_back(avg);

    std::vector<std::string> groups;
    for (const auto& [g, ids] : members) {
        if (g == kNotMapping || ids.size() < min_group) continue;
        groups.push_back(g);
    }
    std::sort(groups.begin(), groups.end(), [](const std::string& a, const std::string& b) {
        const long na = cwe_number(a), nb = cwe_number(b);
        if ((na < 0) != (nb < 0)) return na >= 0;
        if (na != nb) return na < nb;
        return a < b;
    });
    if (members.count(std::string(kNotMapping))) groups.push_back(std::string(kNotMapping));

    const auto& a = avg.summary;
    for (const auto& g : groups) {
        CweRow row;
        row.group = g;
        row.entries = members[g].size();
        Scope scope;
        scope.cwe_group = g;
        row.summary = summarize(records, labels, scope, opts);
        const auto& s = row.summary;
        row.syntactic_delta = delta(s.syntactic_ok, s.total, a.syntactic_ok, a.total);
        row.semantic_delta = delta(s.semantic_ok, s.total, a.semantic_ok, a.total);
        if (s.usable && a.usable) row.usable_delta = delta(*s.usable, s.total, *a.usable, a.total);
        rows.push_back(std::move(row));
    }
    return rows;
}

Table cwe_table(const std::vector<CweRow>& rows) {
    Table t;
    const bool with_usable = !rows.empty() && rows.front().summary.usable.has_value();
    t.header = {"CWE", "Entries", "Syntactic", "Δ", "Semantic", "Δ"};
    if (with_usable) {
        t.header.push_back("Usable");
        t.header.push_back("Δ");
    }
    auto d = [](const std::optional<double>& v) { return v ? format_delta(*v) : std::string(); };
    for (const auto& r : rows) {
        std::vector<std::string> cells{r.group, std::to_string(r.entries), pct(r.summary.syntactic()),
                                       d(r.syntactic_delta), pct(r.summary.semantic()), d(r.semantic_delta)};
        if (with_usable) {
            cells.push_back(pct(*r.summary.usability()));
            cells.push_back(d(r.usable_delta));
        }
        t.rows.push_back(std::move(cells));
    }
    if (!with_usable) t.notices.push_back("no manual labels; usability columns omitted");
    return t;
}

// --- failure patterns ------------------------------------------------------

std::string_view to_string(FailureCategory c) {
    switch (c) {
    case FailureCategory::import_error: return "import_error";
    case FailureCategory::undetected_test: return "undetected_test";
    case FailureCategory::mistargeted_test: return "mistargeted_test";
    case FailureCategory::misused_call: return "misused_call";
    case FailureCategory::visibility_error: return "visibility_error";
    case FailureCategory::version_error: return "version_error";
    case FailureCategory::other: return "other";
    }
    return "?";
}

namespace {

constexpr std::size_t kEvidenceChars = 160;

std::string evidence_of(std::string_view line) {
    std::string s(text::trim(line));
    if (s.size() > kEvidenceChars) s = s.substr(0, kEvidenceChars - 3) + "...";
    return s;
}

struct CompileError {
    std::size_t line = 0;  ///< 0 when the log gives no position
    std::string message;   ///< first line, as printed
    std::string detail;    ///< message plus continuation lines
};

std::vector<CompileError> compile_errors(std::string_view log) {
    static const std::regex maven(R"(\.java:\[(\d+),\d+\]\s*(.*))");
    static const std::regex javac(R"(\.java:(\d+):\s*error:\s*(.*))");
    std::vector<CompileError> out;
    for (auto raw : text::split_lines(log)) {
        std::string line(raw);
        std::smatch m;
        if (std::regex_search(line, m, maven) || std::regex_search(line, m, javac)) {
            out.push_back({std::stoul(m[1]), line, m[2]});
        } else if (!out.empty() && (text::contains(line, "symbol:") || text::contains(line, "location:") ||
                                    text::contains(line, "required:") || text::contains(line, "found:"))) {
            out.back().detail += "\n" + std::string(text::trim(line));
        } else if (text::contains(line, "error:") || text::contains(line, "COMPILATION ERROR")) {
            if (!text::contains(line, "COMPILATION ERROR")) out.push_back({0, line, line});
        }
    }
    return out;
}

bool any_of(std::string_view s, std::initializer_list<std::string_view> needles) {
    return std::any_of(needles.begin(), needles.end(), [&](auto n) { return text::contains(s, n); });
}

bool is_import_line(std::string_view code, std::size_t line) {
    if (line == 0) return false;
    auto lines = text::split_lines(code);
    if (line > lines.size()) return false;
    return text::trim(lines[line - 1]).rfind("import ", 0) == 0;
}

bool mentions_class_symbol(const std::string& detail) {
    static const std::regex re(R"(symbol:\s+(class|interface|enum)\s)");
    return std::regex_search(detail, re);
}

std::optional<FailureCategory> compile_category(const CompileError& e, std::string_view code) {
    const std::string& d = e.detail;
    if ((text::contains(d, "package ") && text::contains(d, "does not exist")) ||
        text::contains(d, "static import only") ||
        (text::contains(d, "cannot find symbol") && (is_import_line(code, e.line) || mentions_class_symbol(d)))) {
        return FailureCategory::import_error;
    }
    if (any_of(d, {"has private access", "has protected access", "is not public in", "not visible"})) {
        return FailureCategory::visibility_error;
    }
    if (any_of(d, {"not supported in -source", "use -source", "preview feature", "release version",
                   "invalid target release", "wrong version"})) {
        return FailureCategory::version_error;
    }
    if (any_of(d, {"cannot be applied to", "no suitable method", "no suitable constructor",
                   "incompatible types", "unreported exception", "cannot be instantiated",
                   "non-static method", "cannot be referenced from a static context"}) ||
        (text::contains(d, "cannot find symbol") && text::contains(d, "symbol:"))) {
        return FailureCategory::misused_call;
    }
    return std::nullopt;
}

bool redefines_method(const std::vector<java::TypeDecl>& types, const FocalSignature& focal) {
    for (const auto& t : types) {
        for (const auto& m : t.members) {
            if (m.kind == java::MemberKind::method && m.name == focal.name &&
                java::parameter_types_match(m.parameter_types, focal.parameter_types)) {
                return true;
            }
            if (m.kind == java::MemberKind::nested_type && redefines_method(m.nested, focal)) return true;
        }
    }
    return false;
}

std::string read_log(const FailureContext& ctx, const std::optional<std::string>& rel) {
    if (!rel) return {};
    std::error_code ec;
    const fs::path p = ctx.record_dir / *rel;
    if (!fs::is_regular_file(p, ec)) return {};
    return fsio::read_file(p);
}

} // namespace

std::optional<FailurePattern> classify_failure(const RunRecord& record, const FailureContext& ctx) {
    if (semantic_correct(record)) return std::nullopt;
    if (!record.best_iteration) return FailurePattern{FailureCategory::other, "no code was generated"};
    const IterationRecord& it = record.iterations.at(*record.best_iteration - 1);
    const std::string code = it.extracted_code.value_or("");

    for (const auto* o : {&it.before_outcome, &it.after_outcome}) {
        if (*o && (*o)->has(OutcomeNote::zero_tests_run)) {
            return FailurePattern{FailureCategory::undetected_test, "build succeeded but no test ran"};
        }
    }
    if (ctx.focal) {
        try {
            const auto unit = java::parse(code);
            if (redefines_method(unit.types, *ctx.focal)) {
                return FailurePattern{FailureCategory::mistargeted_test,
                                      "test code declares " + ctx.focal->name + "(" +
                                          text::join(ctx.focal->parameter_types, ", ") + ")"};
            }
        } catch (const ParseError&) {
        }
    }

    std::vector<std::pair<FailureCategory, std::string>> found;
    const std::pair<const std::optional<TestOutcome>*, const std::optional<std::string>*> logs[] = {
        {&it.before_outcome, &it.before_log}, {&it.after_outcome, &it.after_log}};
    for (const auto& [outcome, log] : logs) {
        if (!*outcome || (*outcome)->verdict != Verdict::err) continue;
        for (const auto& e : compile_errors(read_log(ctx, *log))) {
            if (auto c = compile_category(e, code)) found.emplace_back(*c, evidence_of(e.message));
        }
    }
    for (auto want : {FailureCategory::import_error, FailureCategory::visibility_error,
                      FailureCategory::version_error, FailureCategory::misused_call}) {
        for (const auto& [c, ev] : found) {
            if (c == want) return FailurePattern{c, ev};
        }
    }
    const auto p = *it.pair();
    return FailurePattern{FailureCategory::other, "final pair " + std::string(to_string(p.before)) + "/" +
                                                      std::string(to_string(p.after))};
}

// --- results table ---------------------------------------------------------

Table emit_results_table(const std::vector<RunRecord>& records, const LabelSet& labels) {
    std::set<ContextLevel> levels;
    std::map<std::string, std::map<ContextLevel, const RunRecord*>> grid;
    for (const auto& r : records) {
        levels.insert(r.level);
        grid[r.entry_id][r.level] = &r;
    }
    if (levels.empty()) levels = {kAllLevels.begin(), kAllLevels.end()};
    const bool manual = !labels.empty();

    Table t;
    t.header.push_back("Entry");
    for (auto l : levels) {
        const std::string ln(to_string(l));
        t.header.push_back(ln + " Before");
        t.header.push_back(ln + " After");
        if (manual) t.header.push_back(ln + " Manual");
    }
    for (const auto& [id, row] : grid) {
        std::vector<std::string> cells{id};
        for (auto l : levels) {
            auto it = row.find(l);
            if (it == row.end()) {
                cells.insert(cells.end(), manual ? 3 : 2, "-");
                continue;
            }
            cells.emplace_back(to_string(it->second->final_pair.before));
            cells.emplace_back(to_string(it->second->final_pair.after));
            if (manual) {
                auto lab = labels.find(id, l, it->second->config);
                cells.push_back(!lab ? "-" : *lab == ManualVerdict::ok ? "OK" : "NO");
            }
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

// --- loading and bundle ----------------------------------------------------

std::vector<RunRecord> load_run_records(const fs::path& runs_dir, std::vector<std::string>* skipped) {
    std::vector<RunRecord> out;
    std::error_code ec;
    if (!fs::is_directory(runs_dir, ec)) throw IoError("runs directory '" + runs_dir.string() + "' not found");
    for (auto v : kAllVariants) {
        for (auto l : kAllLevels) {
            const fs::path dir = runs_dir / std::string(to_string(v)) / std::string(to_string(l));
            if (!fs::is_directory(dir, ec)) continue;
            std::vector<fs::path> files;
            for (const auto& de : fs::directory_iterator(dir)) {
                if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                RunRecord r = load_run_record(f);
                if (r.status != RunStatus::complete) {
                    if (skipped) skipped->push_back(fs::relative(f, runs_dir).generic_string() + " (" +
                                                    std::string(to_string(r.status)) + ")");
                    continue;
                }
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

namespace {

json rate_json(const Rate& r) {
    return json{{"count", r.count}, {"total", r.total}, {"percent", std::stod(format_rate(r.percent()))}};
}

json summary_json(const MetricsSummary& s) {
    json j{{"scope", s.scope.describe()},
           {"total", s.total},
           {"syntactic", rate_json(s.syntactic())},
           {"semantic", rate_json(s.semantic())}};
    j["usable"] = s.usability() ? rate_json(*s.usability()) : json(nullptr);
    return j;
}

std::string heading(TableFormat f, const std::string& title) {
    switch (f) {
    case TableFormat::markdown: return "## " + title + "\n\n";
    case TableFormat::csv: return "# " + title + "\n";
    case TableFormat::text: return title + "\n\n";
    }
    return "";
}

} // namespace

json write_report_bundle(const std::vector<RunRecord>& records, const std::optional<LabelSet>& labels,
                         const ReportOptions& options, const fs::path& out_dir,
                         const std::vector<std::string>& notices) {
    if (records.empty()) throw PreconditionError("no complete run records to report on");
    const LabelSet no_labels;
    const LabelSet& lab = labels ? *labels : no_labels;
    const auto fmt = options.format;
    const std::string ext(file_extension(fmt));

    std::set<PromptVariant> configs;
    for (const auto& r : records) configs.insert(r.config);
    auto of_config = [&](PromptVariant v) {
        std::vector<RunRecord> out;
        for (const auto& r : records) {
            if (r.config == v) out.push_back(r);
        }
        return out;
    };

    json summary;
    summary["schema"] = "vwt.report/1";
    summary["notices"] = notices;
    if (!labels) summary["notices"].push_back("no manual labels; usability omitted");
    summary["configs"] = json::object();

    std::string table1, cwe, failures;
    std::map<PromptVariant, MetricsSummary> ablation;
    SummaryOptions sopts;
    sopts.syntactic_exclusions = options.syntactic_exclusions;
    if (options.cwe_map) sopts.cwe_map = &*options.cwe_map;

    for (auto v : configs) {
        const std::string vn(to_string(v));
        const auto recs = of_config(v);
        json cj;
        ablation[v] = summarize(recs, lab, Scope{std::nullopt, v, std::nullopt}, sopts);
        cj["overall"] = summary_json(ablation[v]);
        cj["levels"] = json::object();
        for (auto l : kAllLevels) {
            if (std::none_of(recs.begin(), recs.end(), [&](const RunRecord& r) { return r.level == l; })) continue;
            cj["levels"][std::string(to_string(l))] = summary_json(summarize(recs, lab, Scope{l, v, std::nullopt}, sopts));
        }

        Table t1 = emit_results_table(recs, lab);
        if (!labels) t1.notices.push_back("no manual labels; Manual columns omitted");
        table1 += heading(fmt, vn) + render(t1, fmt) + "\n";

        std::map<std::string, std::string> cmap;
        if (options.cwe_map) cmap = *options.cwe_map;
        else for (const auto& r : recs) cmap[r.entry_id] = cwe_group_of(r, {});
        const auto rows = cwe_rows(recs, lab, cmap, options.min_group, options.syntactic_exclusions);
        cwe += heading(fmt, vn) + render(cwe_table(rows), fmt) + "\n";
        cj["cwe"] = json::array();
        for (const auto& row : rows) {
            json rj{{"group", row.group}, {"entries", row.entries}, {"summary", summary_json(row.summary)}};
            auto dj = [](const std::optional<double>& d) { return d ? json(std::stod(format_delta(*d))) : json(nullptr); };
            rj["deltas"] = {{"syntactic", dj(row.syntactic_delta)},
                            {"semantic", dj(row.semantic_delta)},
                            {"usable", dj(row.usable_delta)}};
            cj["cwe"].push_back(rj);
        }

        Table ft;
        ft.header = {"Entry", "Level", "Final pair", "Category", "Evidence"};
        std::map<FailureCategory, std::size_t> counts;
        for (auto c : kAllFailureCategories) counts[c] = 0;
        for (const auto& r : recs) {
            FailureContext fc;
            fc.record_dir = options.runs_dir / vn / std::string(to_string(r.level));
            if (auto it = options.focal_signatures.find(r.entry_id); it != options.focal_signatures.end()) {
                fc.focal = it->second;
            }
            auto fp = classify_failure(r, fc);
            if (!fp) continue;
            ++counts[fp->category];
            ft.rows.push_back({r.entry_id, std::string(to_string(r.level)),
                               std::string(to_string(r.final_pair.before)) + "/" +
                                   std::string(to_string(r.final_pair.after)),
                               std::string(to_string(fp->category)), fp->evidence});
        }
        ft.notices.push_back("categories are heuristic; check the evidence before citing them");
        Table ct;
        ct.header = {"Category", "Count"};
        cj["failures"] = json::object();
        for (auto c : kAllFailureCategories) {
            ct.rows.push_back({std::string(to_string(c)), std::to_string(counts[c])});
            cj["failures"][std::string(to_string(c))] = counts[c];
        }
        failures += heading(fmt, vn) + render(ct, fmt) + "\n" + render(ft, fmt) + "\n";
        summary["configs"][vn] = cj;
    }

    std::string ablation_text;
    if (ablation.count(PromptVariant::baseline)) {
        ablation_text = render(ablation_table(ablation), fmt);
    } else {
        Table t;
        t.header = {"Config", "Syntactic", "Semantic"};
        for (const auto& [v, s] : ablation) t.rows.push_back({std::string(to_string(v)), pct(s.syntactic()), pct(s.semantic())});
        t.notices.push_back("no baseline runs; the table lists the configs present");
        ablation_text = render(t, fmt);
    }

    fsio::write_file_atomic(out_dir / ("table1" + ext), table1);
    fsio::write_file_atomic(out_dir / ("ablation" + ext), ablation_text);
    fsio::write_file_atomic(out_dir / ("cwe" + ext), cwe);
    fsio::write_file_atomic(out_dir / ("failures" + ext), failures);
    fsio::write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

} // namespace vwt
