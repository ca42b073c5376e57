#include "seqa/chat.hpp"

#include "http_util.hpp"
#include "seqa/errors.hpp"

#include <fmt/format.h>

namespace seqa {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "?";
}

json to_json(const Conversation& conversation) {
    json out = json::array();
    for (const auto& m : conversation) out.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return out;
}

std::string prompt_hash(const Conversation& conversation) {
    return text::hex64(text::fnv1a64(to_json(conversation).dump()));
}

ReplayChatProvider::ReplayChatProvider(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

ReplayChatProvider ReplayChatProvider::from_file(const std::filesystem::path& path) {
    std::vector<TranscriptEntry> entries;
    std::size_t line = 0;
    for (const auto& row : jsonl::read_file(path)) {
        ++line;
        const auto where = fmt::format("{}:{}", path.string(), line);
        if (!row.is_object() || !row.contains("response") || !row["response"].is_string())
            throw SchemaError(where, fmt::format("{}: transcript entry needs a string 'response'", where));
        TranscriptEntry e;
        e.response = row["response"].get<std::string>();
        if (row.contains("expect_prompt_hash") && !row["expect_prompt_hash"].is_null()) {
            if (!row["expect_prompt_hash"].is_string())
                throw SchemaError(where, fmt::format("{}: 'expect_prompt_hash' must be a string", where));
            e.expect_prompt_hash = row["expect_prompt_hash"].get<std::string>();
        }
        entries.push_back(std::move(e));
    }
    return ReplayChatProvider(std::move(entries));
}

ChatMessage ReplayChatProvider::complete(const Conversation& conversation, const ChatParams&) {
    std::lock_guard lock(mutex_);
    seen_.push_back(conversation);
    if (next_ >= entries_.size())
        throw TranscriptExhausted(fmt::format("replay transcript exhausted after {} responses", entries_.size()));
    const auto& entry = entries_[next_];
    if (entry.expect_prompt_hash) {
        const auto actual = prompt_hash(conversation);
        if (actual != *entry.expect_prompt_hash)
            throw ProviderError(std::to_string(next_), fmt::format("transcript entry {} expects prompt hash {} but saw {}",
                                                                   next_, *entry.expect_prompt_hash, actual));
    }
    ++next_;
    return {Role::Assistant, entry.response};
}

std::size_t ReplayChatProvider::consumed() const {
    std::lock_guard lock(mutex_);
    return next_;
}

std::size_t ReplayChatProvider::remaining() const {
    std::lock_guard lock(mutex_);
    return entries_.size() - next_;
}

std::vector<Conversation> ReplayChatProvider::seen() const {
    std::lock_guard lock(mutex_);
    return seen_;
}

void ReplayChatProvider::write_recording(const std::filesystem::path& path) const {
    std::vector<json> rows;
    for (const auto& conv : seen()) rows.push_back({{"prompt_hash", prompt_hash(conv)}, {"messages", to_json(conv)}});
    jsonl::write_file(path, rows);
}

HttpChatProvider::HttpChatProvider(HttpChatConfig config) : config_(std::move(config)) {
    http::parse_url(config_.endpoint);
}

ChatMessage HttpChatProvider::complete(const Conversation& conversation, const ChatParams& params) {
    json body = {{"model", params.model_id},
                 {"messages", to_json(conversation)},
                 {"temperature", params.temperature},
                 {"seed", params.seed}};
    std::map<std::string, std::string> headers;
    if (const auto key = http::bearer_from_env(config_.api_key_env); !key.empty())
        headers["Authorization"] = "Bearer " + key;

    std::size_t request_no = 0;
    {
        std::lock_guard lock(mutex_);
        request_no = ++request_counter_;
    }
    if (config_.debug_dir)
        write_text_file(*config_.debug_dir / fmt::format("chat-{:05}-request.json", request_no), body.dump(2));

    const auto res = http::post_json_with_retry(config_.endpoint, body, headers, config_.timeout_seconds,
                                                config_.max_retries, config_.initial_backoff_ms);
    if (config_.debug_dir)
        write_text_file(*config_.debug_dir / fmt::format("chat-{:05}-response.json", request_no), res.body);
    if (!res.transport_error.empty())
        throw ProviderError(config_.endpoint, fmt::format("chat request failed: {}", res.transport_error));
    if (res.status != 200)
        throw ProviderError(config_.endpoint, fmt::format("chat endpoint returned HTTP {}", res.status));

    json reply;
    try {
        reply = json::parse(res.body);
    } catch (const json::parse_error& e) {
        throw ProviderError(config_.endpoint, fmt::format("chat response is not JSON: {}", e.what()));
    }
    const auto choices = reply.find("choices");
    if (choices == reply.end() || !choices->is_array() || choices->empty())
        throw ProviderError(config_.endpoint, "chat response has no choices");
    const auto& message = (*choices)[0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string())
        throw ProviderError(config_.endpoint, "chat response has no message content");
    return {Role::Assistant, message["content"].get<std::string>()};
}

}  // namespace seqa
