#include "vwt/test_harness.hpp"

#include "vwt/error.hpp"
#include "vwt/java_syntax.hpp"
#include "vwt/process.hpp"
#include "vwt/text.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <regex>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt {

namespace {
constexpr std::string_view kGeneratedMarker = ".vwt-generated";
constexpr std::array kAllNotes{OutcomeNote::zero_tests_run, OutcomeNote::not_recognized_as_test,
                               OutcomeNote::timeout, OutcomeNote::unrecognized_log};
} // namespace

std::string_view to_string(OutcomeNote note) {
    switch (note) {
    case OutcomeNote::zero_tests_run: return "zero_tests_run";
    case OutcomeNote::not_recognized_as_test: return "not_recognized_as_test";
    case OutcomeNote::timeout: return "timeout";
    case OutcomeNote::unrecognized_log: return "unrecognized_log";
    }
    return "?";
}

std::optional<OutcomeNote> parse_outcome_note(std::string_view text) {
    for (auto n : kAllNotes) {
        if (to_string(n) == text) return n;
    }
    return std::nullopt;
}

std::string ExecutionLog::combined() const {
    if (stderr_text.empty()) return stdout_text;
    std::string out = stdout_text;
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
    return out + stderr_text;
}

// --- classification --------------------------------------------------------

namespace {

struct Summary {
    std::size_t run = 0;
    std::size_t failures = 0;
    std::size_t errors = 0;
};

std::optional<Summary> parse_summary(const std::string& log, const LogMarkers& markers) {
    static const std::regex line_re(
        R"(Tests run:\s*(\d+),\s*Failures:\s*(\d+),\s*Errors:\s*(\d+))");
    std::optional<Summary> aggregate;
    std::optional<Summary> last_any;
    for (auto line : text::split_lines(log)) {
        std::string l(line);
        std::smatch m;
        if (!std::regex_search(l, m, line_re)) continue;
        Summary s{std::stoul(m[1]), std::stoul(m[2]), std::stoul(m[3])};
        last_any = s;
        if (!text::contains(l, markers.per_class_summary)) aggregate = s;
    }
    return aggregate ? aggregate : last_any;
}

} // namespace

TestOutcome classify_log(const ExecutionLog& log, const LogMarkers& markers) {
    const std::string all = log.combined();
    TestOutcome out;
    const auto summary = parse_summary(all, markers);

    if (log.timed_out) {
        out.verdict = Verdict::fail;
        out.tests_run = summary ? summary->run : 0;
        out.notes.insert(OutcomeNote::timeout);
        return out;
    }
    for (const auto& marker : markers.compile_failure) {
        if (text::contains(all, marker)) {
            out.verdict = Verdict::err;
            return out;
        }
    }
    const bool build_ok = text::contains(all, markers.build_success) || log.exit_code == 0;
    if (summary) {
        out.tests_run = summary->run;
        if (summary->failures > 0 || summary->errors > 0) {
            out.verdict = Verdict::fail;
            return out;
        }
    }
    if (!build_ok && text::contains(all, markers.no_tests_executed)) {
        out.verdict = Verdict::fail;
        out.tests_run = 0;
        out.notes = {OutcomeNote::zero_tests_run, OutcomeNote::not_recognized_as_test};
        return out;
    }
    if (build_ok) {
        out.verdict = Verdict::pass;
        if (out.tests_run == 0) {
            out.notes = {OutcomeNote::zero_tests_run, OutcomeNote::not_recognized_as_test};
        }
        return out;
    }
    if (summary) {
        // tests ran clean but the build still failed afterwards
        out.verdict = Verdict::fail;
        return out;
    }
    out.verdict = Verdict::err;
    out.tests_run = 0;
    out.notes.insert(OutcomeNote::unrecognized_log);
    return out;
}

// --- placement -------------------------------------------------------------

TestClassName derive_test_class_name(std::string_view code, const VulnEntry& entry) {
    java::LexResult lexed = java::lex(code, java::LexMode::lenient);
    const auto& toks = lexed.tokens;
    auto word = [&](std::size_t i) { return code.substr(toks[i].begin, toks[i].end - toks[i].begin); };

    std::optional<std::string> first, first_public;
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto w = word(i);
        if (toks[i].kind == java::TokenKind::punct) {
            if (w == "{") ++depth;
            if (w == "}") --depth;
            continue;
        }
        if (depth != 0 || toks[i].kind != java::TokenKind::identifier) continue;
        if (w != "class" && w != "interface" && w != "enum" && w != "record") continue;
        if (i > 0 && (word(i - 1) == "." || word(i - 1) == "@")) continue;
        if (i + 1 >= toks.size() || toks[i + 1].kind != java::TokenKind::identifier) continue;
        std::string name(word(i + 1));
        if (!first) first = name;
        // walk back over modifiers and annotations of this declaration
        for (std::size_t j = i; j-- > 0;) {
            const auto m = word(j);
            if (m == ";" || m == "}" || m == "{") break;
            if (m == "public") {
                if (!first_public) first_public = name;
                break;
            }
        }
    }
    if (!first) throw ParseError("generated code declares no top-level class");
    TestClassName out;
    out.name = first_public ? *first_public : *first;
    out.expected = entry.method_locator.class_name + "Test";
    out.deviation = out.name != out.expected;
    return out;
}

fs::path place_test(std::string_view code, const fs::path& workspace, const VulnEntry& entry) {
    const TestClassName cls = derive_test_class_name(code, entry);
    const fs::path marker = workspace / kGeneratedMarker;
    std::error_code ec;
    if (fs::exists(marker, ec)) {
        const std::string previous(text::trim(fsio::read_file(marker)));
        if (!previous.empty()) fs::remove(workspace / previous, ec);
    }
    const fs::path relative = entry.test_target_dir / (cls.name + ".java");
    const fs::path target = workspace / relative;
    try {
        fsio::write_file_atomic(target, code);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("cannot place test: ") + e.what());
    }
    fsio::write_file_atomic(marker, relative.generic_string() + "\n");
    return target;
}

// --- execution -------------------------------------------------------------

std::vector<std::string> test_command(const VulnEntry& entry, const std::string& class_name,
                                      const fs::path& workspace) {
    const auto& spec = entry.build_spec;
    std::vector<std::string> cmd;
    for (const auto& arg : spec.compile_and_test_command) {
        cmd.push_back(text::replace_all(arg, kTestClassPlaceholder, class_name));
    }
    if (!spec.container_image) return cmd;

    const char* runtime = std::getenv("VWTGEN_CONTAINER_RUNTIME");
    std::vector<std::string> wrapped{runtime != nullptr && *runtime != '\0' ? runtime : "docker",
                                     "run", "--rm", "-v",
                                     fs::absolute(workspace).string() + ":/workspace", "-w",
                                     ("/workspace" / spec.workdir).lexically_normal().string()};
    for (const auto& [k, v] : spec.environment) {
        wrapped.push_back("-e");
        wrapped.push_back(k + "=" + v);
    }
    wrapped.push_back(*spec.container_image);
    wrapped.insert(wrapped.end(), cmd.begin(), cmd.end());
    return wrapped;
}

std::pair<TestOutcome, ExecutionLog> run_generated_test(const fs::path& workspace,
                                                        const VulnEntry& entry,
                                                        const std::string& class_name,
                                                        TreeVersion version,
                                                        const LogMarkers& markers) {
    ProcessSpec spec;
    spec.argv = test_command(entry, class_name, workspace);
    if (!entry.build_spec.container_image) {
        spec.environment = entry.build_spec.environment;
        spec.workdir = (workspace / entry.build_spec.workdir).lexically_normal();
    } else {
        spec.workdir = workspace;
    }
    spec.timeout = std::chrono::milliseconds(
        static_cast<long long>(entry.build_spec.timeout_seconds * 1000.0));
    ProcessResult r = run_process(spec);

    ExecutionLog log;
    log.stdout_text = std::move(r.stdout_text);
    log.stderr_text = std::move(r.stderr_text);
    log.exit_code = r.exit_code;
    log.duration_seconds = r.duration_seconds;
    log.timed_out = r.timed_out;
    log.version = version;
    return {classify_log(log, markers), std::move(log)};
}

json to_json(const TestOutcome& o) {
    json notes = json::array();
    for (auto n : o.notes) notes.push_back(std::string(to_string(n)));
    return json{{"verdict", std::string(to_string(o.verdict))}, {"tests_run", o.tests_run}, {"notes", notes}};
}

TestOutcome outcome_from_json(const json& j) {
    TestOutcome o;
    auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw ParseError("unknown verdict '" + j.at("verdict").get<std::string>() + "'");
    o.verdict = *v;
    o.tests_run = j.value("tests_run", std::size_t{0});
    for (const auto& n : j.value("notes", json::array())) {
        auto note = parse_outcome_note(n.get<std::string>());
        if (!note) throw ParseError("unknown outcome note '" + n.get<std::string>() + "'");
        o.notes.insert(*note);
    }
    return o;
}

void write_execution_log(const fs::path& dir, const ExecutionLog& log, const TestOutcome& outcome) {
    const std::string base(to_string(log.version));
    fsio::write_file_atomic(dir / (base + ".log"), log.combined());
    json sidecar{{"version", base},
                 {"exit_code", log.exit_code},
                 {"timed_out", log.timed_out},
                 {"outcome", to_json(outcome)}};
    fsio::write_file_atomic(dir / (base + ".json"), sidecar.dump(2) + "\n");
}

WorkspaceLock::WorkspaceLock(const fs::path& workspace) {
    fs::path lock_path = workspace;
    lock_path += ".lock";
    std::error_code ec;
    if (lock_path.has_parent_path()) fs::create_directories(lock_path.parent_path(), ec);
    fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file '" + lock_path.string() + "'");
    while (::flock(fd_, LOCK_EX) != 0) {
        if (errno != EINTR) {
            ::close(fd_);
            throw IoError("cannot lock '" + lock_path.string() + "'");
        }
    }
}

WorkspaceLock::~WorkspaceLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

} // namespace vwt
