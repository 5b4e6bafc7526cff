#include "vwt/llm_client.hpp"

#include "vwt/error.hpp"
#include "vwt/java_syntax.hpp"
#include "vwt/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <regex>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt {

// --- Conversation ----------------------------------------------------------

Conversation::Conversation(std::string id, std::string model_name,
                           std::map<std::string, std::string> sampling_params)
    : id_(std::move(id)),
      model_name_(std::move(model_name)),
      sampling_params_(std::move(sampling_params)) {}

void Conversation::append_sent(std::string text) {
    if (awaiting_response()) {
        throw PreconditionError("conversation '" + id_ + "' is waiting for a response");
    }
    messages_.push_back({Direction::sent, std::move(text), std::chrono::system_clock::now()});
}

void Conversation::append_received(std::string text) {
    if (!awaiting_response()) {
        throw PreconditionError("conversation '" + id_ + "' has no pending prompt");
    }
    messages_.push_back({Direction::received, std::move(text), std::chrono::system_clock::now()});
}

std::string_view to_string(TranscriptMode mode) {
    switch (mode) {
    case TranscriptMode::live: return "live";
    case TranscriptMode::record: return "record";
    case TranscriptMode::replay: return "replay";
    }
    return "?";
}

std::optional<TranscriptMode> parse_transcript_mode(std::string_view text) {
    for (auto m : {TranscriptMode::live, TranscriptMode::record, TranscriptMode::replay}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

// --- TranscriptStore -------------------------------------------------------

namespace {

json exchange_json(const TranscriptExchange& x) {
    return json{{"ordinal", x.ordinal},
                {"sent", x.sent},
                {"received", x.received},
                {"model", x.model},
                {"params", x.params}};
}

TranscriptExchange exchange_from_json(const json& j) {
    TranscriptExchange x;
    x.ordinal = j.at("ordinal").get<std::size_t>();
    x.sent = j.at("sent").get<std::string>();
    x.received = j.at("received").get<std::string>();
    x.model = j.value("model", "");
    if (auto it = j.find("params"); it != j.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) x.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return x;
}

} // namespace

TranscriptStore::TranscriptStore(TranscriptMode mode, fs::path location, bool strict)
    : mode_(mode), location_(std::move(location)), strict_(strict) {}

fs::path TranscriptStore::path_for(const std::string& conversation_id) const {
    std::string name = conversation_id;
    std::replace(name.begin(), name.end(), '/', '_');
    return location_ / (name + ".jsonl");
}

bool TranscriptStore::exists(const std::string& conversation_id) const {
    std::error_code ec;
    return fs::is_regular_file(path_for(conversation_id), ec);
}

std::vector<TranscriptExchange> TranscriptStore::load(const std::string& conversation_id) const {
    std::vector<TranscriptExchange> out;
    if (!exists(conversation_id)) return out;
    const std::string content = fsio::read_file(path_for(conversation_id));
    std::size_t line_no = 0;
    for (auto line : text::split_lines(content)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(exchange_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path_for(conversation_id).string() + ": " + e.what(), line_no, 1);
        }
    }
    return out;
}

std::optional<TranscriptExchange> TranscriptStore::lookup(const std::string& conversation_id,
                                                          std::size_t ordinal) const {
    std::lock_guard lock(mutex_);
    for (auto& x : load(conversation_id)) {
        if (x.ordinal == ordinal) return std::move(x);
    }
    return std::nullopt;
}

void TranscriptStore::put(const std::string& conversation_id, const TranscriptExchange& exchange) {
    std::lock_guard lock(mutex_);
    auto existing = load(conversation_id);
    std::string out;
    for (const auto& x : existing) {
        if (x.ordinal >= exchange.ordinal) continue;
        out += exchange_json(x).dump() + "\n";
    }
    out += exchange_json(exchange).dump() + "\n";
    fsio::write_file_atomic(path_for(conversation_id), out);
}

// --- send ------------------------------------------------------------------

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
    // attempt is 1-based; no delay before the first one
    if (attempt <= 1) return std::chrono::milliseconds(0);
    double d = static_cast<double>(initial_delay.count());
    for (int i = 2; i < attempt; ++i) d *= multiplier;
    d = std::min(d, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds(static_cast<long long>(d));
}

namespace {

std::string call_with_retries(ChatProvider& provider, const Conversation& conv, const RetryPolicy& retry) {
    const int attempts = std::max(1, retry.max_attempts);
    for (int attempt = 1;; ++attempt) {
        auto delay = retry.delay_before(attempt);
        if (delay.count() > 0) {
            if (retry.sleep) {
                retry.sleep(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
        }
        try {
            return provider.complete(conv);
        } catch (const ProviderError& e) {
            if (!e.transient() || attempt >= attempts) throw;
        }
    }
}

} // namespace

std::string send(Conversation& conv, const PromptMessage& message, TranscriptStore& store,
                 ChatProvider* provider, const RetryPolicy& retry) {
    if (conv.awaiting_response()) {
        throw PreconditionError("conversation '" + conv.id() + "' is waiting for a response");
    }
    const std::size_t ordinal = conv.next_ordinal();

    if (store.mode() == TranscriptMode::replay) {
        auto recorded = store.lookup(conv.id(), ordinal);
        if (!recorded) throw ReplayMissError(conv.id(), ordinal, "no recorded exchange");
        if (store.strict() && recorded->sent != message.text) {
            throw ReplayMissError(conv.id(), ordinal, "recorded prompt differs from the prompt sent");
        }
        conv.append_sent(message.text);
        conv.append_received(recorded->received);
        return recorded->received;
    }

    if (store.mode() == TranscriptMode::record) {
        auto recorded = store.lookup(conv.id(), ordinal);
        if (recorded && recorded->sent == message.text) {
            conv.append_sent(message.text);
            conv.append_received(recorded->received);
            return recorded->received;
        }
    }

    if (provider == nullptr) throw PreconditionError("no chat provider configured");
    conv.append_sent(message.text);
    std::string reply = call_with_retries(*provider, conv, retry);
    if (store.mode() == TranscriptMode::record) {
        store.put(conv.id(), TranscriptExchange{ordinal, message.text, reply, conv.model_name(),
                                                conv.sampling_params()});
    }
    conv.append_received(reply);
    return reply;
}

// --- extract_code ----------------------------------------------------------

namespace {

bool is_fence_line(std::string_view line) {
    std::string_view t = text::trim(line);
    return t.rfind("```", 0) == 0 || t.rfind("~~~", 0) == 0;
}

// Info string of a fence line, lowercased first word.
std::string fence_info(std::string_view line) {
    std::string_view t = text::trim(line);
    t.remove_prefix(t.find_first_not_of(t.front()) == std::string_view::npos
                        ? t.size()
                        : t.find_first_not_of(t.front()));
    t = text::trim(t);
    std::string word(t.substr(0, t.find_first_of(" \t{")));
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return word;
}

// Any line starting with ``` or ~~~ opens or closes a block, whatever its
// indentation or info string, so no fence line can end up in the code.
std::optional<std::string> fenced_block(std::string_view response) {
    const auto lines = text::split_lines(response);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!is_fence_line(lines[i])) continue;
        const std::string info = fence_info(lines[i]);
        std::size_t j = i + 1;
        std::vector<std::string> body;
        while (j < lines.size() && !is_fence_line(lines[j])) body.emplace_back(lines[j++]);
        const std::string code = text::join(body, "\n");
        if ((info.empty() || info == "java") && !text::trim(code).empty()) return code + "\n";
        i = j;
    }
    return std::nullopt;
}

const std::regex& declaration_line() {
    static const std::regex re(
        R"(^[ \t]*(package[ \t]+[\w.]+[ \t]*;|import[ \t]+(static[ \t]+)?[\w.*]+[ \t]*;|(@\w+(\([^)]*\))?[ \t]+)*((public|protected|private|abstract|final|static|sealed|strictfp)[ \t]+)*(class|interface|enum|record)[ \t]+\w+))");
    return re;
}

std::optional<std::size_t> balanced_end(std::string_view s, std::size_t start) {
    java::LexResult lexed;
    try {
        lexed = java::lex(s.substr(start), java::LexMode::lenient);
    } catch (const Error&) {
        return std::nullopt;
    }
    int depth = 0;
    bool opened = false;
    for (const auto& t : lexed.tokens) {
        if (t.kind != java::TokenKind::punct) continue;
        const char c = s[start + t.begin];
        if (c == '{') {
            ++depth;
            opened = true;
        } else if (c == '}') {
            if (--depth < 0) return std::nullopt;
            if (depth == 0 && opened) return start + t.end;
        }
    }
    return std::nullopt;
}

std::optional<std::string> declaration_region(std::string_view response) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    std::size_t line_start = 0;
    while (line_start < response.size()) {
        std::size_t line_end = response.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = response.size();
        const std::string line(response.substr(line_start, line_end - line_start));
        if (std::regex_search(line, declaration_line())) {
            if (auto end = balanced_end(response, line_start)) {
                const std::size_t len = *end - line_start;
                if (!best || len > best->second - best->first) best = {line_start, *end};
            }
        }
        line_start = line_end + 1;
    }
    if (!best) return std::nullopt;
    return std::string(response.substr(best->first, best->second - best->first)) + "\n";
}

} // namespace

std::optional<std::string> extract_code(std::string_view response) {
    if (auto block = fenced_block(response)) return block;
    // fence lines of skipped blocks must not leak into the fallback region
    std::string unfenced;
    for (auto line : text::split_lines(response)) {
        if (!is_fence_line(line)) unfenced.append(line);
        unfenced.push_back('\n');
    }
    return declaration_region(unfenced);
}

// --- ScriptedProvider ------------------------------------------------------

ScriptedProvider::ScriptedProvider(std::map<std::string, std::vector<std::string>> answers)
    : answers_(std::move(answers)) {}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(fsio::read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(path.string() + ": expected an object of answer lists");
    std::map<std::string, std::vector<std::string>> answers;
    for (const auto& [key, list] : doc.items()) {
        if (!list.is_array()) throw ParseError(path.string() + ": '" + key + "' must be an array");
        for (const auto& a : list) {
            if (!a.is_string()) throw ParseError(path.string() + ": answers must be strings");
            answers[key].push_back(a.get<std::string>());
        }
    }
    return std::make_unique<ScriptedProvider>(std::move(answers));
}

std::string ScriptedProvider::complete(const Conversation& conversation) {
    std::lock_guard lock(mutex_);
    ++calls_;
    auto it = answers_.find(conversation.id());
    if (it == answers_.end()) it = answers_.find(conversation.id().substr(0, conversation.id().find('.')));
    if (it == answers_.end()) {
        throw ProviderError("no scripted answers for '" + conversation.id() + "'", false);
    }
    const std::size_t index = conversation.next_ordinal() - 1;
    if (index >= it->second.size()) {
        throw ProviderError("scripted answers for '" + conversation.id() + "' exhausted", false);
    }
    return it->second[index];
}

std::size_t ScriptedProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

} // namespace vwt
