#include "vwt/pipeline.hpp"

#include "vwt/error.hpp"
#include "vwt/text.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <mutex>
#include <ostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt {

OutputLayout OutputLayout::under(const fs::path& out) {
    return {out / "runs", out / "transcripts", out / "workspaces", out / "report"};
}

void RunConfig::check() const {
    if (manifest.empty()) throw PreconditionError("no manifest given");
    if (levels.empty()) throw PreconditionError("no levels selected");
    if (configs.empty()) throw PreconditionError("no prompt configs selected");
    if (workers < 1) throw PreconditionError("workers must be >= 1");
    if (mode == TranscriptMode::replay && provider_script) {
        throw PreconditionError("a provider script is not used in replay mode");
    }
}

namespace {

struct Job {
    const VulnEntry* entry;
    ContextLevel level;
    PromptVariant config;

    std::string name() const {
        return entry->id + " " + std::string(to_string(level)) + " " + std::string(to_string(config));
    }
};

std::vector<VulnEntry> select_entries(std::vector<VulnEntry> all, const std::vector<std::string>& ids) {
    if (ids.empty()) return all;
    std::vector<VulnEntry> out;
    for (const auto& id : ids) {
        auto it = std::find_if(all.begin(), all.end(), [&](const VulnEntry& e) { return e.id == id; });
        if (it == all.end()) throw PreconditionError("unknown entry id '" + id + "'");
        out.push_back(*it);
    }
    return out;
}

bool already_complete(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return false;
    try {
        return load_run_record(path).status == RunStatus::complete;
    } catch (const Error&) {
        return false;
    }
}

/// Record for a run that failed before the loop could start.
void save_setup_failure(const RunConfig& cfg, const Job& job, const std::string& message) {
    RunRecord r;
    r.entry_id = job.entry->id;
    r.level = job.level;
    r.config = job.config;
    r.conversation_id = conversation_id(job.entry->id, job.level, job.config);
    r.model = cfg.http.model;
    r.cwe_group = job.entry->cwe_group();
    r.status = RunStatus::failed;
    r.error = message;
    save_run_record(run_record_path(cfg.layout.runs, job.entry->id, job.level, job.config), r);
}

} // namespace

RunSummary cmd_run(const RunConfig& cfg, std::ostream& log) {
    cfg.check();
    const auto entries = select_entries(load_manifest(cfg.manifest), cfg.entries);

    std::vector<Job> jobs;
    for (const auto& e : entries) {
        for (auto c : cfg.configs) {
            for (auto l : cfg.levels) jobs.push_back({&e, l, c});
        }
    }
    RunSummary summary;
    summary.requested = jobs.size();

    if (cfg.dry_run) {
        for (const auto& j : jobs) {
            const bool done = already_complete(run_record_path(cfg.layout.runs, j.entry->id, j.level, j.config));
            log << (done ? "skip " : "run  ") << j.name() << "\n";
            if (done) ++summary.skipped;
        }
        return summary;
    }

    std::unique_ptr<ChatProvider> provider;
    if (cfg.mode != TranscriptMode::replay) {
        if (cfg.provider_script) provider = ScriptedProvider::from_file(*cfg.provider_script);
        else provider = make_http_provider(cfg.http);
    }
    TranscriptStore store(cfg.mode, cfg.layout.transcripts, cfg.strict_replay);

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const Job& job = jobs[i];
            const fs::path record = run_record_path(cfg.layout.runs, job.entry->id, job.level, job.config);
            if (!cfg.force && already_complete(record)) {
                std::lock_guard lock(mu);
                ++summary.skipped;
                log << "skip " << job.name() << " (complete)\n";
                continue;
            }
            std::string error;
            std::optional<RunRecord> result;
            const fs::path ws = cfg.layout.workspaces / job.entry->id /
                                (std::string(to_string(job.level)) + "." + std::string(to_string(job.config)));
            try {
                fs::path before, after;
                {
                    WorkspaceLock lock_b(ws / "before");
                    before = materialize(*job.entry, TreeVersion::before, ws / "before");
                }
                {
                    WorkspaceLock lock_a(ws / "after");
                    after = materialize(*job.entry, TreeVersion::after, ws / "after");
                }
                WorkspaceTestRunner runner(before, after);
                LoopContext ctx;
                ctx.store = &store;
                ctx.provider = provider.get();
                ctx.runner = &runner;
                ctx.retry = cfg.retry;
                ctx.runs_dir = cfg.layout.runs;
                ctx.model = cfg.http.model;
                ctx.sampling_params = cfg.sampling_params;
                ctx.limits = cfg.limits;
                result = run_entry(*job.entry, job.level, job.config, ctx);
            } catch (const std::exception& e) {
                error = e.what();
                if (!already_complete(record)) {
                    std::error_code ec;
                    // run_entry saves its own failed record; anything earlier needs one
                    bool saved = false;
                    if (fs::is_regular_file(record, ec)) {
                        try {
                            saved = load_run_record(record).status == RunStatus::failed;
                        } catch (const Error&) {
                        }
                    }
                    if (!saved) save_setup_failure(cfg, job, error);
                }
            }
            std::lock_guard lock(mu);
            if (result) {
                ++summary.completed;
                const auto p = result->final_pair;
                log << "done " << job.name() << ": " << to_string(p.before) << "/" << to_string(p.after) << " ("
                    << to_string(*result->termination_reason) << ", " << result->iterations.size()
                    << " iterations)\n";
            } else {
                summary.failures.push_back(job.name() + ": " + error);
                log << "FAIL " << job.name() << ": " << error << "\n";
            }
        }
    };
    const int n = std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    std::vector<std::thread> threads;
    for (int i = 1; i < n; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    std::sort(summary.failures.begin(), summary.failures.end());
    return summary;
}

std::vector<fs::path> cmd_slice(const fs::path& manifest, const std::string& entry_id, const fs::path& out_dir,
                                const SliceOptions& options) {
    const auto entries = load_manifest(manifest);
    auto it = std::find_if(entries.begin(), entries.end(), [&](const VulnEntry& e) { return e.id == entry_id; });
    if (it == entries.end()) throw PreconditionError("unknown entry id '" + entry_id + "'");
    const VulnEntry& entry = *it;

    const std::string source = fsio::read_file(resolve_tree(entry.before_ref) / entry.focal_file);
    const FragmentBins bins = extract_fragments(source, entry.method_locator);
    std::vector<std::pair<fs::path, std::string>> files;
    for (auto l : kAllLevels) {
        const FocalContext ctx = assemble_context(bins, l);
        const std::string ln(to_string(l));
        files.emplace_back(out_dir / (entry.id + "." + ln + ".txt"), ctx.snippet);
        if (!options.with_prompts) continue;
        for (auto v : options.configs) {
            const auto msg = build_initial_prompt(ctx, entry.patched_method_text, entry, PromptConfig::for_variant(v));
            files.emplace_back(out_dir / (entry.id + "." + ln + "." + std::string(to_string(v)) + ".prompt.txt"),
                               msg.text);
        }
    }
    std::vector<fs::path> out;
    for (const auto& [path, content] : files) {
        if (!options.dry_run) fsio::write_file_atomic(path, content);
        out.push_back(path);
    }
    return out;
}

json cmd_report(const ReportConfig& cfg, std::ostream& log) {
    std::vector<std::string> skipped;
    const auto records = load_run_records(cfg.runs_dir, &skipped);
    if (records.empty()) {
        throw PreconditionError("no complete run records under '" + cfg.runs_dir.string() + "'");
    }
    std::vector<std::string> notices;
    for (const auto& s : skipped) notices.push_back("not complete, left out: " + s);

    std::optional<LabelSet> labels;
    if (cfg.labels) labels = LabelSet(parse_labels_csv(fsio::read_file(*cfg.labels)));
    ReportOptions opts;
    opts.min_group = cfg.min_group;
    opts.format = cfg.format;
    opts.runs_dir = cfg.runs_dir;
    if (cfg.syntax_exclusions) opts.syntactic_exclusions = parse_exclusions_csv(fsio::read_file(*cfg.syntax_exclusions));
    if (cfg.cwe_map) opts.cwe_map = parse_cwe_map_csv(fsio::read_file(*cfg.cwe_map));
    if (cfg.manifest) {
        LoadOptions lo;
        lo.check_trees = false;
        for (const auto& e : load_manifest(*cfg.manifest, lo)) {
            try {
                const std::string src = fsio::read_file(resolve_tree(e.before_ref) / e.focal_file);
                const auto unit = java::parse(src);
                const auto& m = locate_method(unit, e.method_locator);
                opts.focal_signatures[e.id] = FocalSignature{m.name, m.parameter_types};
            } catch (const Error& err) {
                notices.push_back("no focal signature for " + e.id + ": " + err.what());
            }
        }
    }
    if (!labels) log << "note: no labels file; usability columns omitted\n";
    for (const auto& n : notices) log << "note: " << n << "\n";
    if (cfg.dry_run) {
        log << records.size() << " records would be reported to " << cfg.out_dir.string() << "\n";
        return json::object();
    }
    return write_report_bundle(records, labels, opts, cfg.out_dir, notices);
}

int cmd_validate(const fs::path& manifest, std::ostream& log) {
    LoadOptions lo;
    lo.check_trees = false;
    const auto entries = load_manifest(manifest, lo);
    std::size_t errors = 0, warnings = 0;
    for (const auto& e : entries) {
        for (const auto& issue : validate_entry(e)) {
            const bool err = issue.severity == ValidationIssue::Severity::error;
            (err ? errors : warnings) += 1;
            log << (err ? "error" : "warning") << ": " << e.id << ": " << issue.field << ": " << issue.message << "\n";
        }
    }
    log << entries.size() << " entries, " << errors << " errors, " << warnings << " warnings\n";
    return errors == 0 ? 0 : 1;
}

} // namespace vwt
