// Acceptance checks. Prints one line per criterion and exits non-zero when
// any of them fails. Live smoke (AC9) runs only with VWTGEN_LIVE_SMOKE=1.

#include "vwt/error.hpp"
#include "vwt/focal_context.hpp"
#include "vwt/java_syntax.hpp"
#include "vwt/manifest.hpp"
#include "vwt/pipeline.hpp"
#include "vwt/prompt.hpp"
#include "vwt/test_harness.hpp"
#include "vwt/text.hpp"

#include "../support/temp_dir.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using vwt::ContextLevel;
using vwt::OutcomePair;
using vwt::PromptVariant;
using vwt::TerminationReason;
using vwt::Verdict;

namespace {

const fs::path kFixtures = VWT_FIXTURES_DIR;

constexpr Verdict P = Verdict::pass;
constexpr Verdict F = Verdict::fail;
constexpr Verdict E = Verdict::err;
constexpr std::array<Verdict, 3> kVerdicts{P, F, E};

/// Collects mismatches of one criterion.
struct Check {
    std::vector<std::string> problems;
    std::vector<std::string> facts;

    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
    template <typename A, typename B>
    void equal(const A& got, const B& want, const std::string& what) {
        if (!(got == want)) {
            std::ostringstream s;
            s << what << ": got " << got << ", want " << want;
            problems.push_back(s.str());
        }
    }
    void note(std::string fact) { facts.push_back(std::move(fact)); }
};

enum class Result { pass, fail, skip };

struct Outcome {
    Result result;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_seconds(double s) {
    std::ostringstream o;
    o.precision(2);
    o << std::fixed << s << "s";
    return o.str();
}

Outcome finish(const Check& c, double elapsed, double budget) {
    Check out = c;
    if (elapsed >= budget) out.problems.push_back("took " + fmt_seconds(elapsed) + ", limit " + fmt_seconds(budget));
    std::string detail;
    const auto& items = out.problems.empty() ? out.facts : out.problems;
    for (std::size_t i = 0; i < items.size() && i < 6; ++i) detail += (i ? "; " : "") + items[i];
    if (out.problems.size() > 6) detail += "; ... " + std::to_string(out.problems.size() - 6) + " more";
    detail += (detail.empty() ? "" : "; ") + fmt_seconds(elapsed);
    return {out.problems.empty() ? Result::pass : Result::fail, detail};
}

// --- AC1: Table 1 through cmd_report -----------------------------------------

Outcome ac1_table1() {
    const auto start = Clock::now();
    Check c;
    const fs::path t1 = kFixtures / "table1";
    vwt::testing::TempDir dir;
    vwt::ReportConfig cfg;
    cfg.runs_dir = t1 / "runs";
    cfg.labels = t1 / "labels.csv";
    cfg.cwe_map = t1 / "cwe_map.csv";
    cfg.syntax_exclusions = t1 / "syntax_exclusions.csv";
    cfg.out_dir = dir.path();
    std::ostringstream log;
    const json summary = vwt::cmd_report(cfg, log);
    const json& base = summary.at("configs").at("baseline");

    c.equal(base["overall"]["semantic"]["count"].get<int>(), 15, "overall semantic count");
    c.equal(base["overall"]["semantic"]["total"].get<int>(), 200, "overall total");
    c.equal(base["overall"]["semantic"]["percent"].get<double>(), 7.5, "overall semantic %");
    c.equal(base["overall"]["usable"]["count"].get<int>(), 137, "overall usable count");
    c.equal(base["overall"]["usable"]["percent"].get<double>(), 68.5, "overall usable %");

    // independent recount straight from the records
    const auto records = vwt::load_run_records(t1 / "runs");
    const auto exclusions = vwt::parse_exclusions_csv(vwt::fsio::read_file(t1 / "syntax_exclusions.csv"));
    const std::array<int, 4> ref_syn{35, 35, 31, 32}, ref_sem{5, 5, 3, 2}, ref_use{28, 34, 40, 35};
    std::string counts;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto level = vwt::kAllLevels[i];
        const std::string name(vwt::to_string(level));
        int recount = 0;
        for (const auto& r : records) {
            if (r.level != level) continue;
            if (r.final_pair.before == E || r.final_pair.after == E) continue;
            if (exclusions.count({r.entry_id, level})) continue;
            ++recount;
        }
        const json& lv = base["levels"][name];
        const int syn = lv["syntactic"]["count"].get<int>();
        c.equal(syn, recount, name + " syntactic vs recount");
        c.expect(std::abs(syn - ref_syn[i]) <= 1,
                 name + " syntactic " + std::to_string(syn) + " not within 1 of " + std::to_string(ref_syn[i]));
        c.equal(lv["semantic"]["count"].get<int>(), ref_sem[i], name + " semantic");
        c.equal(lv["usable"]["count"].get<int>(), ref_use[i], name + " usable");
        counts += (i ? "/" : "") + std::to_string(syn);
    }
    c.note("200 records; semantic 15 (7.5%), usable 137 (68.5%), syntactic " + counts + " = recount");
    return finish(c, seconds_since(start), 5.0);
}

// --- AC2: ablation table -----------------------------------------------------

Outcome ac2_ablation() {
    const auto start = Clock::now();
    Check c;
    auto synthetic = [](std::size_t syn, std::size_t sem) {
        vwt::MetricsSummary s;
        s.total = 200;
        s.syntactic_ok = syn;
        s.semantic_ok = sem;
        return s;
    };
    const auto table = vwt::ablation_table({{PromptVariant::baseline, synthetic(133, 15)},
                                            {PromptVariant::no_emotion, synthetic(137, 9)},
                                            {PromptVariant::no_role, synthetic(125, 9)},
                                            {PromptVariant::with_cwe, synthetic(130, 8)}});
    const std::vector<std::vector<std::string>> want{{"baseline", "66.5%", "7.5%"},
                                                     {"no_emotion", "68.5%", "4.5%"},
                                                     {"no_role", "62.5%", "4.5%"},
                                                     {"with_cwe", "65.0%", "4.0%"}};
    c.expect(table.rows == want, "ablation rows differ from the four hand-built summaries");
    c.expect(table.notices.empty(), "unexpected notices");

    // round half up at one decimal, on values exact in binary
    c.equal(vwt::format_rate(100.0 / 16), "6.3", "1/16");
    c.equal(vwt::format_rate(100.0 * 3 / 16), "18.8", "3/16");
    c.equal(vwt::format_rate(100.0 * 5 / 16), "31.3", "5/16");
    c.equal(vwt::format_rate(100.0 / 8), "12.5", "1/8");
    c.equal(vwt::format_rate(200.0 / 3), "66.7", "2/3");
    c.equal(vwt::format_delta(66.7 - 66.5), "+0.2", "delta");
    c.note("4 rows verbatim; half-up rounding on 6.25, 18.75, 31.25");
    return finish(c, seconds_since(start), 1.0);
}

// --- AC3: CWE table ----------------------------------------------------------

Outcome ac3_cwe() {
    const auto start = Clock::now();
    Check c;
    const fs::path t1 = kFixtures / "table1";
    const auto records = vwt::load_run_records(t1 / "runs");
    const vwt::LabelSet labels(vwt::parse_labels_csv(vwt::fsio::read_file(t1 / "labels.csv")));
    const auto map = vwt::parse_cwe_map_csv(vwt::fsio::read_file(t1 / "cwe_map.csv"));
    const auto exclusions = vwt::parse_exclusions_csv(vwt::fsio::read_file(t1 / "syntax_exclusions.csv"));
    const auto rows = vwt::cwe_rows(records, labels, map, 4, exclusions);

    struct Want {
        const char* group;
        std::array<double, 3> rates;
        std::array<double, 3> deltas;
    };
    const std::vector<Want> want{
        {"CWE-20", {66.7, 0.0, 54.2}, {0.2, -7.5, -14.3}},
        {"CWE-22", {70.0, 0.0, 85.0}, {3.5, -7.5, 16.5}},
        {"CWE-79", {81.3, 0.0, 81.3}, {14.7, -7.5, 12.7}},
        {"CWE-611", {56.3, 0.0, 50.0}, {-10.3, -7.5, -18.5}},
        {"CWE-835", {82.1, 0.0, 60.7}, {15.6, -7.5, -7.8}},
        {"Not Mapping", {61.1, 25.0, 88.9}, {-5.4, 17.5, 20.4}},
    };
    if (rows.size() != want.size() + 1) {
        c.problems.push_back("expected Average + 6 groups, got " + std::to_string(rows.size()) + " rows");
        return finish(c, seconds_since(start), 5.0);
    }
    c.equal(rows[0].group, "Average", "first row");
    c.equal(rows[0].summary.syntactic().rounded(), 66.5, "average syntactic");
    int matched = 0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        const auto& r = rows[i + 1];
        const auto& w = want[i];
        c.equal(r.group, w.group, "row " + std::to_string(i + 1));
        const std::array<double, 3> rates{r.summary.syntactic().rounded(), r.summary.semantic().rounded(),
                                          r.summary.usability() ? r.summary.usability()->rounded() : -1.0};
        const std::array<double, 3> deltas{r.syntactic_delta.value_or(-999), r.semantic_delta.value_or(-999),
                                           r.usable_delta.value_or(-999)};
        for (int k = 0; k < 3; ++k) {
            c.equal(rates[k], w.rates[k], std::string(w.group) + " rate " + std::to_string(k));
            c.equal(deltas[k], w.deltas[k], std::string(w.group) + " delta " + std::to_string(k));
            matched += (rates[k] == w.rates[k]) + (deltas[k] == w.deltas[k]);
        }
    }
    // CWE-502 has 3 entries in the fixture: present in the map, absent from the table
    std::size_t size_502 = 0;
    for (const auto& [id, cwe] : map) size_502 += cwe == "CWE-502";
    c.equal(size_502, 3u, "CWE-502 fixture size");
    for (const auto& r : rows) c.expect(r.group != "CWE-502", "group of size 3 was not excluded");
    const auto table = vwt::cwe_table(rows);
    c.expect(vwt::text::contains(vwt::render(table), "| Not Mapping |"), "rendered table lacks Not Mapping");
    c.note(std::to_string(matched) + "/36 rates and deltas exact; CWE-502 (3 entries) excluded");
    return finish(c, seconds_since(start), 5.0);
}

// --- AC4: loop state machine -------------------------------------------------

/// Outcomes come from a "// outcome: BEFORE AFTER" line in the code.
class ScriptRunner : public vwt::TestRunner {
public:
    vwt::Execution execute(const vwt::VulnEntry&, vwt::TreeVersion version, std::string_view code) override {
        static const std::regex re(R"(// outcome: (\w+) (\w+))");
        const std::string s(code);
        std::smatch m;
        vwt::Execution ex;
        ex.test_class = "GreeterTest";
        if (!std::regex_search(s, m, re)) {
            ex.outcome.verdict = E;
            ex.log.stdout_text = "[ERROR] COMPILATION ERROR\n";
            return ex;
        }
        ex.outcome.verdict = *vwt::parse_verdict(std::string(version == vwt::TreeVersion::before ? m[1] : m[2]));
        ex.log.stdout_text = ex.outcome.verdict == E ? "[ERROR] X.java:[1,1] cannot find symbol\n" : "Tests run: 1\n";
        return ex;
    }
};

std::string answer(OutcomePair p) {
    return "```java\npublic class GreeterTest {\n    // outcome: " + std::string(vwt::to_string(p.before)) + " " +
           std::string(vwt::to_string(p.after)) + "\n}\n```\n";
}

vwt::RunRecord run_script(const std::vector<std::string>& answers) {
    vwt::testing::TempDir dir;
    dir.write("tree/src/Greeter.java",
              "package demo;\n\npublic class Greeter {\n    public String greet(String who) {\n"
              "        return who;\n    }\n}\n");
    vwt::VulnEntry entry;
    entry.id = "DEMO-1";
    entry.before_ref.path = dir / "tree";
    entry.after_ref.path = dir / "tree";
    entry.focal_file = "src/Greeter.java";
    entry.method_locator = {"Greeter", "greet", std::nullopt};
    entry.patched_method_text = "    public String greet(String who) {\n        return \"\";\n    }";
    entry.test_target_dir = "src/test";
    entry.build_spec.compile_and_test_command = {"true", "{test_class}"};

    vwt::ScriptedProvider provider({{entry.id, answers}});
    vwt::TranscriptStore store(vwt::TranscriptMode::record, dir / "transcripts");
    ScriptRunner runner;
    vwt::LoopContext ctx;
    ctx.store = &store;
    ctx.provider = &provider;
    ctx.runner = &runner;
    ctx.runs_dir = dir / "runs";
    ctx.retry.sleep = [](auto) {};
    return vwt::run_entry(entry, ContextLevel::L0, PromptVariant::baseline, ctx);
}

Outcome ac4_loop() {
    const auto start = Clock::now();
    Check c;
    // decision table, written out independently of the implementation
    int pairs = 0;
    for (auto b : kVerdicts) {
        for (auto a : kVerdicts) {
            std::optional<vwt::FeedbackKind> want;
            if (b == E || a == E) want = vwt::FeedbackKind::error;
            else if (b == P) want = vwt::FeedbackKind::before_pass;
            else if (a == F) want = vwt::FeedbackKind::after_fail;
            const auto got = vwt::select_feedback(OutcomePair{b, a});
            c.expect(got == want, "select_feedback(" + std::string(vwt::to_string(b)) + "," +
                                      std::string(vwt::to_string(a)) + ")");
            vwt::TestOutcome tb{b, 0, {}}, ta{a, 0, {}};
            c.expect(vwt::select_feedback(tb, ta) == want, "select_feedback(outcomes) disagrees");
            ++pairs;
        }
    }
    // update_state over its whole reachable domain against a reference model
    int transitions = 0;
    const vwt::LoopLimits limits;
    for (int errs = 0; errs < limits.max_consecutive_errors; ++errs) {
        for (int stag = 0; stag < limits.stagnation_limit; ++stag) {
            for (auto b : kVerdicts) {
                for (auto a : kVerdicts) {
                    const bool err = b == E || a == E;
                    const vwt::LoopState want_state{err ? errs + 1 : 0, err ? stag : stag + 1};
                    std::optional<TerminationReason> want_stop;
                    if (err && errs + 1 == 3) want_stop = TerminationReason::consecutive_errors;
                    if (!err && stag + 1 == 5) want_stop = TerminationReason::stagnation;
                    const auto got = vwt::update_state({errs, stag}, {b, a}, limits);
                    c.expect(got.state == want_state && got.stop == want_stop,
                             "update_state(" + std::to_string(errs) + "," + std::to_string(stag) + ")");
                    ++transitions;
                }
            }
        }
    }
    // scripted conversations
    auto pairs_script = [](std::initializer_list<OutcomePair> ps) {
        std::vector<std::string> out;
        for (auto p : ps) out.push_back(answer(p));
        for (int i = 0; i < 20; ++i) out.push_back(answer({F, F}));
        return out;
    };
    auto r = run_script(pairs_script({{E, E}, {E, P}, {F, E}}));
    c.equal(r.iterations.size(), 3u, "3 ERR pairs: iterations");
    c.expect(r.termination_reason == TerminationReason::consecutive_errors, "3 ERR pairs: reason");
    r = run_script(pairs_script({{E, E}, {E, E}, {F, F}, {E, E}, {E, E}, {E, P}}));
    c.equal(r.iterations.size(), 6u, "reset ERR streak: iterations");
    c.expect(r.termination_reason == TerminationReason::consecutive_errors, "reset ERR streak: reason");
    r = run_script(pairs_script({{P, P}, {F, F}, {P, F}, {E, E}, {P, P}, {F, F}}));
    c.equal(r.iterations.size(), 6u, "5 compilable: iterations");
    c.expect(r.termination_reason == TerminationReason::stagnation, "5 compilable: reason");
    r = run_script(pairs_script({{F, F}, {F, P}}));
    c.expect(r.termination_reason == TerminationReason::accepted && r.iterations.size() == 2, "accept on (F,P)");

    std::mt19937 rng(2024);
    const std::vector<std::string> kinds{answer({E, E}), answer({E, P}), answer({P, P}), answer({F, F}),
                                         answer({P, F}), "no code at all"};
    std::size_t longest = 0;
    const int scripts = 50;
    for (int round = 0; round < scripts; ++round) {
        std::vector<std::string> script;
        for (int i = 0; i < 40; ++i) script.push_back(kinds[rng() % kinds.size()]);
        const auto rec = run_script(script);
        longest = std::max(longest, rec.iterations.size());
        c.expect(rec.iterations.size() <= 18, "script " + std::to_string(round) + " exceeded 18 iterations");
        c.expect(rec.termination_reason.has_value(), "script without termination reason");
    }
    c.note(std::to_string(pairs) + " pairs, " + std::to_string(transitions) + " transitions (whole domain), " +
           std::to_string(scripts) + " random scripts, longest " + std::to_string(longest) + " iterations");
    return finish(c, seconds_since(start), 1.0);
}

// --- AC5: replay determinism -------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& rel : vwt::list_tree_files(root)) out[rel] = vwt::fsio::read_file(root / rel);
    return out;
}

Outcome ac5_replay() {
    const auto start = Clock::now();
    Check c;
    const fs::path bundle = kFixtures / "sample_bundle";
    vwt::testing::TempDir dir;
    std::array<std::map<std::string, std::string>, 2> runs, reports;
    for (int i = 0; i < 2; ++i) {
        const fs::path out = dir / ("run" + std::to_string(i));
        vwt::RunConfig cfg;
        cfg.manifest = bundle / "manifest.json";
        cfg.mode = vwt::TranscriptMode::replay;
        cfg.layout = vwt::OutputLayout::under(out);
        cfg.layout.transcripts = bundle / "transcripts";
        cfg.workers = 2;
        std::ostringstream log;
        const auto s = vwt::cmd_run(cfg, log);
        c.equal(s.exit_code(), 0, "replay " + std::to_string(i) + " exit code");
        c.equal(s.completed, 12u, "replay " + std::to_string(i) + " completed");
        vwt::ReportConfig rc;
        rc.runs_dir = cfg.layout.runs;
        rc.labels = bundle / "labels.csv";
        rc.manifest = cfg.manifest;
        rc.out_dir = cfg.layout.report;
        vwt::cmd_report(rc, log);
        runs[i] = tree(cfg.layout.runs);
        reports[i] = tree(cfg.layout.report);
    }
    std::size_t records = 0;
    for (const auto& [rel, _] : runs[0]) records += rel.ends_with(".json") && std::count(rel.begin(), rel.end(), '/') == 2;
    c.equal(records, 12u, "run records");
    c.expect(runs[0] == runs[1], "run directories differ");
    c.expect(reports[0] == reports[1], "report bundles differ");
    c.note(std::to_string(runs[0].size()) + " run files and " + std::to_string(reports[0].size()) +
           " report files byte-identical across 2 replays");
    return finish(c, seconds_since(start), 30.0);
}

// --- AC6: focal-context properties -------------------------------------------

std::multiset<std::string> content_lines(const std::string& s) {
    std::multiset<std::string> out;
    for (const auto& line : vwt::text::split_lines(s)) {
        const auto t = vwt::text::trim(line);
        if (!t.empty() && t != ";") out.insert(std::string(line));
    }
    return out;
}

Outcome ac6_focal() {
    const auto start = Clock::now();
    Check c;
    const fs::path corpus = kFixtures / "java_corpus";
    const json locators = json::parse(vwt::fsio::read_file(corpus / "locators.json"));
    const json oracle = json::parse(vwt::fsio::read_file(corpus / "oracle_counts.json"));
    std::set<std::string> files;
    for (const auto& l : locators) {
        const std::string file = l.at("file");
        files.insert(file);
        vwt::MethodLocator loc;
        loc.class_name = l.at("class_name");
        loc.method_name = l.at("method_name");
        if (l.contains("parameter_types")) loc.parameter_types = l["parameter_types"].get<std::vector<std::string>>();
        const std::string src = vwt::text::replace_all(vwt::fsio::read_file(corpus / file), "\r\n", "\n");
        const auto bins = vwt::extract_fragments(src, loc);
        std::vector<std::string> levels;
        for (auto lv : vwt::kAllLevels) levels.push_back(vwt::assemble_context(bins, lv).snippet);
        for (std::size_t k = 0; k < levels.size(); ++k) {
            c.expect(vwt::text::contains(levels[k], bins.vulnerable_method), file + " L" + std::to_string(k) + " lacks the method");
            if (k == 0) continue;
            const auto prev = content_lines(levels[k - 1]), cur = content_lines(levels[k]);
            c.expect(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()),
                     file + " L" + std::to_string(k - 1) + " not contained in L" + std::to_string(k));
        }
        const auto unit = vwt::java::parse(levels[3]);
        c.equal(vwt::java::declared_member_count(vwt::locate_type(unit, loc.class_name)),
                oracle.at(file).at("l3_members").get<std::size_t>(), file + " L3 members");
    }
    c.expect(files.size() >= 20, "corpus has fewer than 20 classes");
    for (const char* needed : {"NoConstructors.java", "Overloads.java", "AnnotatedService.java"}) {
        c.expect(files.count(needed) == 1, std::string("corpus lacks ") + needed);
    }
    c.note(std::to_string(files.size()) + " classes: containment, verbatim method, L3 counts = frozen oracle");
    return finish(c, seconds_since(start), 10.0);
}

// --- AC7: log classification -------------------------------------------------

Outcome ac7_logs() {
    const auto start = Clock::now();
    Check c;
    const fs::path logs = kFixtures / "logs";
    const json labels = json::parse(vwt::fsio::read_file(logs / "labels.json"));
    std::size_t zero_tests = 0;
    for (const auto& [name, label] : labels.items()) {
        vwt::ExecutionLog log;
        log.stdout_text = vwt::fsio::read_file(logs / (name + ".log"));
        log.exit_code = label.at("exit_code");
        log.timed_out = label.at("timed_out");
        const auto got = vwt::classify_log(log);
        const json& want = label.at("expected");
        std::set<vwt::OutcomeNote> notes;
        for (const auto& n : want.at("notes")) notes.insert(*vwt::parse_outcome_note(n.get<std::string>()));
        c.expect(got.verdict == *vwt::parse_verdict(want.at("verdict").get<std::string>()) && got.notes == notes &&
                     got.tests_run == want.at("tests_run").get<int>(),
                 name + " misclassified as " + std::string(vwt::to_string(got.verdict)));
        if (got.verdict == P && got.has(vwt::OutcomeNote::zero_tests_run)) ++zero_tests;
    }
    c.expect(labels.size() >= 12, "fewer than 12 logs");
    c.expect(zero_tests >= 1, "no PASS + zero_tests_run case");
    c.note(std::to_string(labels.size()) + " logs, 0 misclassified, " + std::to_string(zero_tests) +
           " PASS with zero_tests_run");
    return finish(c, seconds_since(start), 5.0);
}

// --- AC8: prompt fidelity ----------------------------------------------------

Outcome ac8_prompts() {
    const auto start = Clock::now();
    Check c;
    const fs::path dir = kFixtures / "prompts";
    auto golden = [&](const char* name) {
        std::string s = vwt::fsio::read_file(dir / name);
        if (!s.empty() && s.back() == '\n') s.pop_back();
        return s;
    };
    vwt::FocalContext focal;
    focal.snippet = "{focal context of the vulnerable code}";
    vwt::VulnEntry entry;
    entry.id = "VUL4J-05";
    entry.cwe_id = "CWE-22";
    auto build = [&](PromptVariant v) {
        return vwt::build_initial_prompt(focal, "{patched method of vulnerable code}", entry,
                                         vwt::PromptConfig::for_variant(v))
            .text;
    };
    for (auto v : vwt::kAllVariants) {
        const std::string name = std::string(vwt::to_string(v)) + ".txt";
        c.expect(build(v) == golden(name.c_str()), name + " differs from golden");
    }
    c.expect(vwt::build_feedback_prompt(vwt::FeedbackKind::before_pass).text == golden("before_pass.txt"), "before_pass");
    c.expect(vwt::build_feedback_prompt(vwt::FeedbackKind::after_fail).text == golden("after_fail.txt"), "after_fail");
    c.expect(vwt::build_feedback_prompt(vwt::FeedbackKind::error, std::string("<log>")).text == golden("error.txt"),
             "error");

    const std::string baseline = build(PromptVariant::baseline), no_emotion = build(PromptVariant::no_emotion),
                      no_role = build(PromptVariant::no_role), with_cwe = build(PromptVariant::with_cwe);
    c.expect(baseline == no_emotion + "\n\n" + std::string(vwt::prompt_text::kEmotion), "baseline = no_emotion + emotion");
    c.expect(no_emotion == std::string(vwt::prompt_text::kRole) + "\n" + no_role, "no_emotion = role + no_role");
    const std::string cwe_line = "The vulnerability is categorized as CWE-22.\n";
    const auto pos = with_cwe.find(cwe_line);
    c.expect(pos != std::string::npos &&
                 with_cwe.substr(0, pos) + with_cwe.substr(pos + cwe_line.size()) == baseline,
             "with_cwe = baseline + CWE line");
    c.note("4 templates and 3 feedback sentences byte-exact; variant containment holds");
    return finish(c, seconds_since(start), 1.0);
}

// --- AC9: live smoke ---------------------------------------------------------

Outcome ac9_live() {
    const char* flag = std::getenv("VWTGEN_LIVE_SMOKE");
    if (flag == nullptr || std::string(flag) != "1") {
        return {Result::skip, "set VWTGEN_LIVE_SMOKE=1 and VWTGEN_API_KEY to run one entry against the real API"};
    }
    if (std::getenv("VWTGEN_API_KEY") == nullptr) return {Result::fail, "VWTGEN_LIVE_SMOKE=1 but VWTGEN_API_KEY is unset"};
    const auto start = Clock::now();
    Check c;
    vwt::testing::TempDir dir;
    vwt::RunConfig cfg;
    cfg.manifest = kFixtures / "sample_bundle/manifest.json";
    cfg.mode = vwt::TranscriptMode::record;
    cfg.layout = vwt::OutputLayout::under(dir.path());
    cfg.entries = {"SAMPLE-01"};
    cfg.levels = {ContextLevel::L0};
    if (const char* url = std::getenv("VWTGEN_BASE_URL")) cfg.http.base_url = url;
    if (const char* model = std::getenv("VWTGEN_MODEL")) cfg.http.model = model;
    std::ostringstream log;
    const auto s = vwt::cmd_run(cfg, log);
    c.equal(s.exit_code(), 0, "live run exit code");
    const auto path = vwt::run_record_path(cfg.layout.runs, "SAMPLE-01", ContextLevel::L0, PromptVariant::baseline);
    try {
        const auto r = vwt::load_run_record(path);
        c.expect(r.status == vwt::RunStatus::complete, "record not complete");
        c.note(std::to_string(r.iterations.size()) + " iterations, final (" + std::string(vwt::to_string(r.final_pair.before)) +
               "," + std::string(vwt::to_string(r.final_pair.after)) + ")");
    } catch (const std::exception& e) {
        c.problems.push_back(std::string("record unreadable: ") + e.what());
    }
    return finish(c, seconds_since(start), 600.0);
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 Table 1 fixture reproduction", ac1_table1},
        {"AC2 ablation table formatting", ac2_ablation},
        {"AC3 CWE grouping table", ac3_cwe},
        {"AC4 loop state machine", ac4_loop},
        {"AC5 replay determinism", ac5_replay},
        {"AC6 focal-context properties", ac6_focal},
        {"AC7 log classification", ac7_logs},
        {"AC8 prompt fidelity", ac8_prompts},
        {"AC9 live smoke", ac9_live},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {Result::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.result == Result::pass ? "PASS" : o.result == Result::skip ? "SKIP" : "FAIL";
        failed += o.result == Result::fail;
        std::cout << tag << "  " << name << " (" << o.detail << ")\n";
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria met") << "\n";
    return failed ? 1 : 0;
}
