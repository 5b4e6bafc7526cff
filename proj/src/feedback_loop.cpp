#include "vwt/feedback_loop.hpp"

#include "vwt/error.hpp"
#include "vwt/text.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt {

std::string_view to_string(TerminationReason reason) {
    switch (reason) {
    case TerminationReason::accepted: return "accepted";
    case TerminationReason::consecutive_errors: return "consecutive_errors";
    case TerminationReason::stagnation: return "stagnation";
    case TerminationReason::extraction_failure: return "extraction_failure";
    case TerminationReason::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

std::string_view to_string(RunStatus status) {
    switch (status) {
    case RunStatus::in_progress: return "in_progress";
    case RunStatus::complete: return "complete";
    case RunStatus::failed: return "failed";
    }
    return "?";
}

std::optional<TerminationReason> parse_termination_reason(std::string_view text) {
    for (auto r : {TerminationReason::accepted, TerminationReason::consecutive_errors,
                   TerminationReason::stagnation, TerminationReason::extraction_failure,
                   TerminationReason::budget_exceeded}) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
    for (auto s : {RunStatus::in_progress, RunStatus::complete, RunStatus::failed}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::optional<OutcomePair> IterationRecord::pair() const {
    if (!before_outcome || !after_outcome) return std::nullopt;
    return OutcomePair{before_outcome->verdict, after_outcome->verdict};
}

// --- decisions -------------------------------------------------------------

std::optional<FeedbackKind> select_feedback(OutcomePair pair) {
    if (pair.before == Verdict::err || pair.after == Verdict::err) return FeedbackKind::error;
    if (pair.before == Verdict::pass) return FeedbackKind::before_pass;
    if (pair.after == Verdict::fail) return FeedbackKind::after_fail;
    return std::nullopt;
}

std::optional<FeedbackKind> select_feedback(const TestOutcome& before, const TestOutcome& after) {
    return select_feedback(OutcomePair{before.verdict, after.verdict});
}

StateUpdate update_state(const LoopState& state, OutcomePair pair, const LoopLimits& limits) {
    StateUpdate out{state, std::nullopt};
    if (pair.before == Verdict::err || pair.after == Verdict::err) {
        out.state.consecutive_err_count += 1;
        if (out.state.consecutive_err_count >= limits.max_consecutive_errors) {
            out.stop = TerminationReason::consecutive_errors;
        }
    } else {
        out.state.consecutive_err_count = 0;
        out.state.compilable_noimprove_count += 1;
        if (out.state.compilable_noimprove_count >= limits.stagnation_limit) {
            out.stop = TerminationReason::stagnation;
        }
    }
    return out;
}

int generation_rank(OutcomePair pair) {
    const int errs = (pair.before == Verdict::err) + (pair.after == Verdict::err);
    if (errs == 2) return 0;
    if (errs == 1) return 1;
    if (pair.before == Verdict::fail && pair.after == Verdict::pass) return 3;
    return 2;
}

std::optional<std::size_t> select_best_generation(const std::vector<IterationRecord>& iterations) {
    std::optional<std::size_t> best;
    int best_rank = -1;
    for (const auto& it : iterations) {
        const auto p = it.pair();
        if (!p) continue;
        const int rank = generation_rank(*p);
        if (rank >= best_rank) {
            best_rank = rank;
            best = it.ordinal;
        }
    }
    return best;
}

// --- records ---------------------------------------------------------------

namespace {

json pair_json(OutcomePair p) {
    return json::array({std::string(to_string(p.before)), std::string(to_string(p.after))});
}

template <class T, class F>
T parse_or_throw(const json& j, F parse, const char* what) {
    const auto text = j.get<std::string>();
    auto v = parse(text);
    if (!v) throw ParseError(std::string("unknown ") + what + " '" + text + "'");
    return *v;
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
}

json iteration_json(const IterationRecord& it) {
    json j;
    j["ordinal"] = it.ordinal;
    j["prompt_kind"] = it.prompt_kind ? std::string(to_string(*it.prompt_kind)) : "INITIAL";
    j["no_code_reprompt"] = it.no_code_reprompt;
    put_optional(j, "extracted_code", it.extracted_code);
    put_optional(j, "test_class", it.test_class);
    j["class_name_deviation"] = it.class_name_deviation;
    j["before_outcome"] = it.before_outcome ? to_json(*it.before_outcome) : json(nullptr);
    j["after_outcome"] = it.after_outcome ? to_json(*it.after_outcome) : json(nullptr);
    put_optional(j, "before_log", it.before_log);
    put_optional(j, "after_log", it.after_log);
    return j;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

IterationRecord iteration_from_json(const json& j) {
    IterationRecord it;
    it.ordinal = j.at("ordinal").get<std::size_t>();
    const auto kind = j.at("prompt_kind").get<std::string>();
    if (kind != "INITIAL") it.prompt_kind = parse_or_throw<FeedbackKind>(j["prompt_kind"], parse_feedback_kind, "prompt kind");
    it.no_code_reprompt = j.value("no_code_reprompt", false);
    it.extracted_code = opt_string(j, "extracted_code");
    it.test_class = opt_string(j, "test_class");
    it.class_name_deviation = j.value("class_name_deviation", false);
    if (j.contains("before_outcome") && !j["before_outcome"].is_null()) it.before_outcome = outcome_from_json(j["before_outcome"]);
    if (j.contains("after_outcome") && !j["after_outcome"].is_null()) it.after_outcome = outcome_from_json(j["after_outcome"]);
    it.before_log = opt_string(j, "before_log");
    it.after_log = opt_string(j, "after_log");
    if (!it.extracted_code && (it.before_outcome || it.after_outcome)) {
        throw ParseError("iteration " + std::to_string(it.ordinal) + " has outcomes but no code");
    }
    if (it.before_outcome.has_value() != it.after_outcome.has_value()) {
        throw ParseError("iteration " + std::to_string(it.ordinal) + " has only one outcome");
    }
    return it;
}

} // namespace

json to_json(const RunRecord& r) {
    json iterations = json::array();
    for (const auto& it : r.iterations) iterations.push_back(iteration_json(it));
    json j;
    j["schema"] = kRunRecordSchema;
    j["entry_id"] = r.entry_id;
    j["level"] = std::string(to_string(r.level));
    j["config"] = std::string(to_string(r.config));
    j["conversation_id"] = r.conversation_id;
    j["model"] = r.model;
    j["cwe_group"] = r.cwe_group;
    j["missing_cwe_warning"] = r.missing_cwe_warning;
    j["iterations"] = iterations;
    put_optional(j, "best_iteration", r.best_iteration);
    j["final_pair"] = pair_json(r.final_pair);
    j["termination_reason"] =
        r.termination_reason ? json(std::string(to_string(*r.termination_reason))) : json(nullptr);
    j["status"] = std::string(to_string(r.status));
    put_optional(j, "error", r.error);
    return j;
}

RunRecord run_record_from_json(const json& j) {
    try {
        if (j.value("schema", "") != kRunRecordSchema) {
            throw ParseError("not a run record (schema '" + j.value("schema", "") + "')");
        }
        RunRecord r;
        r.entry_id = j.at("entry_id").get<std::string>();
        r.level = parse_or_throw<ContextLevel>(j.at("level"), parse_level, "level");
        r.config = parse_or_throw<PromptVariant>(j.at("config"), parse_variant, "config");
        r.conversation_id = j.at("conversation_id").get<std::string>();
        r.model = j.value("model", "");
        r.cwe_group = j.value("cwe_group", std::string(kNotMapping));
        r.missing_cwe_warning = j.value("missing_cwe_warning", false);
        for (const auto& it : j.at("iterations")) r.iterations.push_back(iteration_from_json(it));
        if (!j.at("best_iteration").is_null()) r.best_iteration = j["best_iteration"].get<std::size_t>();
        const auto& fp = j.at("final_pair");
        if (!fp.is_array() || fp.size() != 2) throw ParseError("final_pair must have two verdicts");
        r.final_pair = {parse_or_throw<Verdict>(fp[0], parse_verdict, "verdict"),
                        parse_or_throw<Verdict>(fp[1], parse_verdict, "verdict")};
        if (!j.at("termination_reason").is_null()) {
            r.termination_reason = parse_or_throw<TerminationReason>(
                j["termination_reason"], parse_termination_reason, "termination reason");
        }
        r.status = parse_or_throw<RunStatus>(j.at("status"), parse_run_status, "status");
        r.error = opt_string(j, "error");
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed run record: ") + e.what());
    }
}

RunRecord load_run_record(const fs::path& path) {
    json j;
    try {
        j = json::parse(fsio::read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return run_record_from_json(j);
}

void save_run_record(const fs::path& path, const RunRecord& record) {
    fsio::write_file_atomic(path, to_json(record).dump(2) + "\n");
}

fs::path run_record_path(const fs::path& runs_dir, const std::string& entry_id, ContextLevel level,
                         PromptVariant config) {
    return runs_dir / std::string(to_string(config)) / std::string(to_string(level)) /
           (entry_id + ".json");
}

std::string conversation_id(const std::string& entry_id, ContextLevel level, PromptVariant config) {
    return entry_id + "." + std::string(to_string(level)) + "." + std::string(to_string(config));
}

// --- execution -------------------------------------------------------------

WorkspaceTestRunner::WorkspaceTestRunner(fs::path before_workspace, fs::path after_workspace,
                                         LogMarkers markers)
    : before_(std::move(before_workspace)), after_(std::move(after_workspace)), markers_(std::move(markers)) {}

Execution WorkspaceTestRunner::execute(const VulnEntry& entry, TreeVersion version, std::string_view code) {
    const fs::path& ws = version == TreeVersion::before ? before_ : after_;
    Execution ex;
    ex.log.version = version;
    TestClassName name;
    try {
        name = derive_test_class_name(code, entry);
    } catch (const ParseError& e) {
        ex.log.stderr_text = std::string("error: ") + e.what() + "\n";
        ex.log.exit_code = 1;
        ex.outcome.verdict = Verdict::err;
        return ex;
    }
    ex.test_class = name.name;
    ex.class_name_deviation = name.deviation;
    WorkspaceLock lock(ws);
    place_test(code, ws, entry);
    auto [outcome, log] = run_generated_test(ws, entry, name.name, version, markers_);
    ex.outcome = std::move(outcome);
    ex.log = std::move(log);
    return ex;
}

FocalContext focal_context_for(const VulnEntry& entry, ContextLevel level) {
    const fs::path root = resolve_tree(entry.before_ref);
    const std::string source = fsio::read_file(root / entry.focal_file);
    return assemble_context(extract_fragments(source, entry.method_locator), level);
}

namespace {

class Loop {
public:
    Loop(const VulnEntry& entry, ContextLevel level, PromptVariant config, LoopContext& ctx)
        : entry_(entry), ctx_(ctx),
          conv_(conversation_id(entry.id, level, config), ctx.model, ctx.sampling_params) {
        if (ctx.store == nullptr || ctx.runner == nullptr) {
            throw PreconditionError("run_entry needs a transcript store and a test runner");
        }
        record_.entry_id = entry.id;
        record_.level = level;
        record_.config = config;
        record_.conversation_id = conv_.id();
        record_.model = ctx.model;
        record_.cwe_group = entry.cwe_group();
        path_ = run_record_path(ctx.runs_dir, entry.id, level, config);
        log_root_ = fs::path(entry.id);
    }

    RunRecord run() {
        try {
            drive();
        } catch (const std::exception& e) {
            record_.status = RunStatus::failed;
            record_.error = e.what();
            finish_pair();
            save_run_record(path_, record_);
            throw;
        }
        return record_;
    }

private:
    void drive() {
        const PromptConfig cfg = PromptConfig::for_variant(record_.config);
        const FocalContext focal = focal_context_for(entry_, record_.level);
        PromptMessage message = build_initial_prompt(focal, entry_.patched_method_text, entry_, cfg);
        record_.missing_cwe_warning = message.missing_cwe_warning;

        std::optional<FeedbackKind> kind;
        bool no_code_reprompt = false;
        LoopState state;
        int no_code_streak = 0;

        while (true) {
            if (record_.iterations.size() >= ctx_.limits.hard_cap ||
                !check_budget(message, ctx_.limits.token_limit).ok) {
                return stop(TerminationReason::budget_exceeded);
            }
            const std::string reply = send(conv_, message, *ctx_.store, ctx_.provider, ctx_.retry);

            IterationRecord it;
            it.ordinal = record_.iterations.size() + 1;
            it.prompt_kind = kind;
            it.no_code_reprompt = no_code_reprompt;
            it.extracted_code = extract_code(reply);

            if (!it.extracted_code) {
                record_.iterations.push_back(std::move(it));
                if (++no_code_streak >= ctx_.limits.max_consecutive_no_code) {
                    return stop(TerminationReason::extraction_failure);
                }
                kind = FeedbackKind::error;
                no_code_reprompt = true;
                message = build_feedback_prompt(FeedbackKind::error, std::string(prompt_text::kNoCodeNote));
                checkpoint();
                continue;
            }
            no_code_streak = 0;

            const Execution before = execute(it, TreeVersion::before);
            const Execution after = execute(it, TreeVersion::after);
            const OutcomePair pair{before.outcome.verdict, after.outcome.verdict};
            record_.iterations.push_back(std::move(it));

            kind = select_feedback(pair);
            if (!kind) return stop(TerminationReason::accepted);
            const StateUpdate update = update_state(state, pair, ctx_.limits);
            state = update.state;
            if (update.stop) return stop(*update.stop);

            no_code_reprompt = false;
            if (*kind == FeedbackKind::error) {
                const Execution& failed = before.outcome.verdict == Verdict::err ? before : after;
                message = build_feedback_prompt(*kind, failed.log.combined());
            } else {
                message = build_feedback_prompt(*kind);
            }
            checkpoint();
        }
    }

    Execution execute(IterationRecord& it, TreeVersion version) {
        Execution ex = ctx_.runner->execute(entry_, version, *it.extracted_code);
        ex.log.version = version;
        const fs::path rel = log_root_ / std::to_string(it.ordinal);
        write_execution_log(path_.parent_path() / rel, ex.log, ex.outcome);
        const std::string log_rel = (rel / (std::string(to_string(version)) + ".log")).generic_string();
        if (ex.test_class) it.test_class = ex.test_class;
        it.class_name_deviation = it.class_name_deviation || ex.class_name_deviation;
        if (version == TreeVersion::before) {
            it.before_outcome = ex.outcome;
            it.before_log = log_rel;
        } else {
            it.after_outcome = ex.outcome;
            it.after_log = log_rel;
        }
        return ex;
    }

    void finish_pair() {
        record_.best_iteration = select_best_generation(record_.iterations);
        record_.final_pair = OutcomePair{};
        if (record_.best_iteration) {
            record_.final_pair = *record_.iterations.at(*record_.best_iteration - 1).pair();
        }
    }

    void checkpoint() {
        finish_pair();
        save_run_record(path_, record_);
        if (ctx_.on_iteration) ctx_.on_iteration(record_);
    }

    void stop(TerminationReason reason) {
        record_.termination_reason = reason;
        record_.status = RunStatus::complete;
        checkpoint();
    }

    const VulnEntry& entry_;
    LoopContext& ctx_;
    Conversation conv_;
    RunRecord record_;
    fs::path path_;
    fs::path log_root_;
};

} // namespace

RunRecord run_entry(const VulnEntry& entry, ContextLevel level, PromptVariant config,
                    LoopContext& context) {
    return Loop(entry, level, config, context).run();
}

} // namespace vwt
