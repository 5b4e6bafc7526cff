// vwtgen: generate vulnerability-witnessing unit tests with an LLM.

#include "vwt/error.hpp"
#include "vwt/pipeline.hpp"
#include "vwt/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

namespace fs = std::filesystem;

namespace {

template <class T, class F>
std::vector<T> parse_list(const std::vector<std::string>& items, F parse, const char* what) {
    std::vector<T> out;
    for (const auto& item : items) {
        for (auto part : vwt::text::split(item, ',')) {
            const auto t = vwt::text::trim(part);
            if (t.empty()) continue;
            if (t == "all") {
                out.clear();
                return {};
            }
            auto v = parse(t);
            if (!v) throw CLI::ValidationError(std::string("unknown ") + what + " '" + std::string(t) + "'");
            if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate vulnerability-witnessing unit tests with an LLM"};
    app.set_config("--config", "", "Key-value file with default flag values (flags win)");
    app.require_subcommand(1);
    app.fallthrough();

    std::string manifest, mode = "record", out = "vwt-out";
    std::vector<std::string> levels{"all"}, configs{"baseline"};
    int workers = 1;
    bool dry_run = false;
    app.add_option("--manifest", manifest, "Dataset manifest (JSON)");
    app.add_option("--mode", mode, "Transcript mode: live, record or replay")->capture_default_str();
    app.add_option("--levels", levels, "Context levels, e.g. L0,L2 or all")->delimiter(',')->capture_default_str();
    app.add_option("--configs", configs, "Prompt configs: baseline, no_emotion, no_role, with_cwe or all")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_flag("--dry-run", dry_run, "Validate inputs and show the plan without side effects");

    // run
    auto* run = app.add_subcommand("run", "Run the generate, execute, reprompt loop");
    std::string runs_dir, transcripts_dir, workspaces_dir, provider_script, base_url, model;
    std::vector<std::string> entries;
    bool force = false, lenient_replay = false;
    std::size_t token_limit = vwt::kDefaultTokenLimit;
    run->add_option("--entry", entries, "Only these entry ids")->delimiter(',');
    run->add_option("--runs-dir", runs_dir, "Override <out>/runs");
    run->add_option("--transcripts-dir", transcripts_dir, "Override <out>/transcripts");
    run->add_option("--workspaces-dir", workspaces_dir, "Override <out>/workspaces");
    run->add_option("--provider-script", provider_script, "JSON map of canned answers instead of the HTTP API");
    run->add_option("--base-url", base_url, "Chat-completions server");
    run->add_option("--model", model, "Model name");
    run->add_option("--token-limit", token_limit, "Estimated prompt token budget");
    run->add_flag("--force", force, "Recompute complete records");
    run->add_flag("--lenient-replay", lenient_replay, "Do not compare sent prompts with the transcript");

    // slice
    auto* slice = app.add_subcommand("slice", "Write the L0-L3 focal contexts of one entry");
    std::string slice_entry;
    bool with_prompts = false;
    slice->add_option("entry", slice_entry, "Entry id")->required();
    slice->add_flag("--with-prompts", with_prompts, "Also write the initial prompts for --configs");

    // report
    auto* report = app.add_subcommand("report", "Aggregate run records into the report bundle");
    std::string report_runs, labels, cwe_map, exclusions, format = "md";
    std::size_t min_group = 4;
    report->add_option("--runs-dir", report_runs, "Override <out>/runs");
    report->add_option("--labels", labels, "Manual labels CSV (entry_id,level,config,label)");
    report->add_option("--cwe-map", cwe_map, "CWE map CSV (entry_id,cwe_id); default: the records' CWE");
    report->add_option("--syntax-exclusions", exclusions, "Records not counted as syntactically correct (entry_id,level)");
    report->add_option("--min-group", min_group, "Smallest CWE group shown")->check(CLI::PositiveNumber)->capture_default_str();
    report->add_option("--format", format, "md, csv or text")->capture_default_str();

    // validate
    auto* validate = app.add_subcommand("validate", "Check the manifest and report every issue");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path out_dir(out);
        const auto layout = vwt::OutputLayout::under(out_dir);
        auto need_manifest = [&] {
            if (manifest.empty()) throw vwt::PreconditionError("--manifest is required");
        };
        auto sel_configs = parse_list<vwt::PromptVariant>(configs, vwt::parse_variant, "config");
        if (sel_configs.empty()) sel_configs.assign(vwt::kAllVariants.begin(), vwt::kAllVariants.end());

        if (*run) {
            need_manifest();
            vwt::RunConfig cfg;
            cfg.manifest = manifest;
            auto m = vwt::parse_transcript_mode(mode);
            if (!m) throw vwt::PreconditionError("unknown mode '" + mode + "'");
            cfg.mode = *m;
            cfg.levels = parse_list<vwt::ContextLevel>(levels, vwt::parse_level, "level");
            if (cfg.levels.empty()) cfg.levels.assign(vwt::kAllLevels.begin(), vwt::kAllLevels.end());
            cfg.configs = sel_configs;
            cfg.workers = workers;
            cfg.layout = layout;
            if (!runs_dir.empty()) cfg.layout.runs = runs_dir;
            if (!transcripts_dir.empty()) cfg.layout.transcripts = transcripts_dir;
            if (!workspaces_dir.empty()) cfg.layout.workspaces = workspaces_dir;
            cfg.dry_run = dry_run;
            cfg.force = force;
            cfg.entries = entries;
            if (!provider_script.empty()) cfg.provider_script = provider_script;
            if (!base_url.empty()) cfg.http.base_url = base_url;
            if (!model.empty()) cfg.http.model = model;
            cfg.strict_replay = !lenient_replay;
            cfg.limits.token_limit = token_limit;
            const auto summary = vwt::cmd_run(cfg, std::cerr);
            std::cerr << summary.requested << " requested, " << summary.completed << " computed, "
                      << summary.skipped << " already complete, " << summary.failures.size() << " failed\n";
            return summary.exit_code();
        }
        if (*slice) {
            need_manifest();
            vwt::SliceOptions opts;
            opts.with_prompts = with_prompts;
            opts.configs = sel_configs;
            opts.dry_run = dry_run;
            for (const auto& p : vwt::cmd_slice(manifest, slice_entry, out_dir, opts)) {
                std::cout << (dry_run ? "would write " : "") << p.string() << "\n";
            }
            return 0;
        }
        if (*report) {
            vwt::ReportConfig cfg;
            cfg.runs_dir = report_runs.empty() ? layout.runs : fs::path(report_runs);
            if (!labels.empty()) cfg.labels = labels;
            if (!cwe_map.empty()) cfg.cwe_map = cwe_map;
            if (!exclusions.empty()) cfg.syntax_exclusions = exclusions;
            if (!manifest.empty()) cfg.manifest = manifest;
            cfg.out_dir = layout.report;
            cfg.min_group = min_group;
            auto f = vwt::parse_table_format(format);
            if (!f) throw vwt::PreconditionError("unknown format '" + format + "'");
            cfg.format = *f;
            cfg.dry_run = dry_run;
            vwt::cmd_report(cfg, std::cerr);
            if (!dry_run) std::cerr << "report written to " << cfg.out_dir.string() << "\n";
            return 0;
        }
        if (*validate) {
            need_manifest();
            return vwt::cmd_validate(manifest, std::cout);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "vwtgen: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
