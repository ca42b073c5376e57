#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqa/text.hpp"

namespace seqa {

enum class Role { System, User, Assistant };
std::string_view to_string(Role r);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

using Conversation = std::vector<ChatMessage>;

struct ChatParams {
    std::string model_id = "replay";
    double temperature = 0.7;
    std::int64_t seed = 0;
};

json to_json(const Conversation& conversation);
/// Hex FNV-1a of the serialized conversation; what replay transcripts pin.
std::string prompt_hash(const Conversation& conversation);

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatMessage complete(const Conversation& conversation, const ChatParams& params) = 0;
};

struct TranscriptEntry {
    std::optional<std::string> expect_prompt_hash;
    std::string response;
};

/// Serves scripted responses in order; throws TranscriptExhausted past the
/// end and ProviderError when a pinned prompt hash does not match.
class ReplayChatProvider : public ChatProvider {
public:
    explicit ReplayChatProvider(std::vector<TranscriptEntry> entries);
    static ReplayChatProvider from_file(const std::filesystem::path& path);

    ChatMessage complete(const Conversation& conversation, const ChatParams& params) override;

    std::size_t consumed() const;
    std::size_t remaining() const;
    /// Every conversation this provider was asked to complete, in order.
    std::vector<Conversation> seen() const;
    /// JSONL of {prompt_hash, messages}.
    void write_recording(const std::filesystem::path& path) const;

private:
    mutable std::mutex mutex_;
    std::vector<TranscriptEntry> entries_;
    std::size_t next_ = 0;
    std::vector<Conversation> seen_;
};

struct HttpChatConfig {
    /// Full URL of an OpenAI-compatible chat completions endpoint.
    std::string endpoint;
    /// Name of the environment variable holding the bearer token.
    std::string api_key_env = "SEQA_CHAT_API_KEY";
    int max_retries = 3;
    int timeout_seconds = 120;
    int initial_backoff_ms = 500;
    /// When set, request/response bodies are written here.
    std::optional<std::filesystem::path> debug_dir;
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpChatConfig config);
    ChatMessage complete(const Conversation& conversation, const ChatParams& params) override;

private:
    HttpChatConfig config_;
    std::mutex mutex_;
    std::size_t request_counter_ = 0;
};

}  // namespace seqa
