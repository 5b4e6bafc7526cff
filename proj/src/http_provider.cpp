#include "vwt/error.hpp"
#include "vwt/llm_client.hpp"

#include <nlohmann/json.hpp>

#include <httplib.h>

#include <cstdlib>

using nlohmann::json;

namespace vwt {

namespace {

json parameter_value(const std::string& raw) {
    // numbers and booleans go out typed, anything else as a string
    try {
        json v = json::parse(raw);
        if (v.is_number() || v.is_boolean()) return v;
    } catch (const json::exception&) {
    }
    return raw;
}

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderSettings settings) : settings_(std::move(settings)) {
        const char* key = std::getenv(settings_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw PreconditionError("environment variable " + settings_.api_key_env +
                                    " must hold the provider API key");
        }
        api_key_ = key;
    }

    std::string complete(const Conversation& conversation) override {
        json messages = json::array();
        for (const auto& m : conversation.messages()) {
            messages.push_back({{"role", m.direction == Direction::sent ? "user" : "assistant"},
                                {"content", m.text}});
        }
        json body{{"model", conversation.model_name().empty() ? settings_.model
                                                               : conversation.model_name()},
                  {"messages", messages}};
        for (const auto& [k, v] : conversation.sampling_params()) body[k] = parameter_value(v);

        httplib::Client client(settings_.base_url);
        client.set_connection_timeout(std::chrono::seconds(30));
        client.set_read_timeout(settings_.timeout);
        client.set_write_timeout(std::chrono::seconds(60));
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(settings_.path, headers, body.dump(), "application/json");
        if (!res) {
            throw ProviderError("request to " + settings_.base_url + " failed: " +
                                    httplib::to_string(res.error()),
                                true);
        }
        if (res->status == 429 || res->status >= 500) {
            throw ProviderError("provider returned HTTP " + std::to_string(res->status), true);
        }
        if (res->status != 200) {
            throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " +
                                    res->body.substr(0, 500),
                                false);
        }
        try {
            json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw ProviderError(std::string("unexpected provider response: ") + e.what(), false);
        }
    }

private:
    HttpProviderSettings settings_;
    std::string api_key_;
};

} // namespace

std::unique_ptr<ChatProvider> make_http_provider(const HttpProviderSettings& settings) {
    return std::make_unique<HttpChatProvider>(settings);
}

} // namespace vwt
