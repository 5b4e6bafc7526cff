#pragma once

#include "vwt/prompt.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace vwt {

enum class Direction { sent, received };

struct ConversationMessage {
    Direction direction = Direction::sent;
    std::string text;
    std::chrono::system_clock::time_point timestamp;
};

/// Ordered exchange with one model. Messages alternate sent/received,
/// starting with sent, and are never removed.
class Conversation {
public:
    Conversation(std::string id, std::string model_name,
                 std::map<std::string, std::string> sampling_params = {});

    const std::string& id() const { return id_; }
    const std::string& model_name() const { return model_name_; }
    const std::map<std::string, std::string>& sampling_params() const { return sampling_params_; }
    const std::vector<ConversationMessage>& messages() const { return messages_; }

    /// 1-based ordinal of the next exchange.
    std::size_t next_ordinal() const { return messages_.size() / 2 + 1; }
    bool awaiting_response() const { return messages_.size() % 2 == 1; }

    /// Throw PreconditionError when the append would break alternation.
    void append_sent(std::string text);
    void append_received(std::string text);

private:
    std::string id_;
    std::string model_name_;
    std::map<std::string, std::string> sampling_params_;
    std::vector<ConversationMessage> messages_;
};

enum class TranscriptMode { live, record, replay };

std::string_view to_string(TranscriptMode mode);
std::optional<TranscriptMode> parse_transcript_mode(std::string_view text);

struct TranscriptExchange {
    std::size_t ordinal = 0;
    std::string sent;
    std::string received;
    std::string model;
    std::map<std::string, std::string> params;
};

/// One JSON-lines file per conversation under `location`:
/// `<location>/<conversation id>.jsonl`. Every append rewrites the file
/// through a temporary, so readers see whole exchanges only.
class TranscriptStore {
public:
    TranscriptStore(TranscriptMode mode, std::filesystem::path location, bool strict = false);

    TranscriptMode mode() const { return mode_; }
    const std::filesystem::path& location() const { return location_; }
    /// Replay (and record-mode reuse) also require the sent text to match.
    bool strict() const { return strict_; }

    std::filesystem::path path_for(const std::string& conversation_id) const;
    bool exists(const std::string& conversation_id) const;
    /// Throws ParseError on a malformed line.
    std::vector<TranscriptExchange> load(const std::string& conversation_id) const;
    std::optional<TranscriptExchange> lookup(const std::string& conversation_id,
                                             std::size_t ordinal) const;
    /// Keeps exchanges with a smaller ordinal and appends `exchange`.
    void put(const std::string& conversation_id, const TranscriptExchange& exchange);

private:
    TranscriptMode mode_;
    std::filesystem::path location_;
    bool strict_;
    mutable std::mutex mutex_;
};

/// A chat-completion backend. `complete` receives the whole conversation,
/// whose last message is the pending prompt, and returns the reply text.
/// Throws ProviderError.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const Conversation& conversation) = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_delay{1000};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{30000};
    /// Replaced in tests to avoid real waiting.
    std::function<void(std::chrono::milliseconds)> sleep;

    std::chrono::milliseconds delay_before(int attempt) const;
};

/// Sends `message` and returns the reply, appending both to `conversation`.
/// Replay mode never calls the provider and throws ReplayMissError when the
/// store holds no exchange for this position. Record mode reuses a stored
/// exchange for the position (so interrupted runs resume without new calls)
/// and otherwise persists the fresh exchange before returning. Transient
/// provider errors are retried per `retry`, then rethrown.
std::string send(Conversation& conversation, const PromptMessage& message, TranscriptStore& store,
                 ChatProvider* provider, const RetryPolicy& retry = {});

/// Source code inside an LLM answer: the interior of the first fenced block
/// tagged java (or untagged); failing that, the longest brace-balanced region
/// that starts at a package, import or type declaration line.
std::optional<std::string> extract_code(std::string_view response);

/// Canned answers keyed by conversation id, falling back to the entry id
/// (the id up to its first '.'). Exchange n receives answer n; running out
/// is a non-transient ProviderError.
class ScriptedProvider : public ChatProvider {
public:
    explicit ScriptedProvider(std::map<std::string, std::vector<std::string>> answers);
    /// JSON object: id -> array of answer strings.
    static std::unique_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);

    std::string complete(const Conversation& conversation) override;
    std::size_t calls() const;

private:
    std::map<std::string, std::vector<std::string>> answers_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
};

struct HttpProviderSettings {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4-turbo";
    /// Read from this environment variable; never logged.
    std::string api_key_env = "VWTGEN_API_KEY";
    std::chrono::seconds timeout{300};
};

/// OpenAI-style chat-completions endpoint over HTTP(S). Sampling
/// parameters of the conversation are forwarded verbatim; none are set by
/// default.
std::unique_ptr<ChatProvider> make_http_provider(const HttpProviderSettings& settings);

} // namespace vwt
