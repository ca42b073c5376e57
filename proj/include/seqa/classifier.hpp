#pragma once

#include <string>
#include <string_view>

#include "seqa/chat.hpp"

namespace seqa {

/// Query classifier used for the contextual check and the dataset
/// categorization axes.
class Classifier {
public:
    virtual ~Classifier() = default;
    /// Situational (needs a collective judgement over several object states)
    /// versus simple.
    virtual bool is_situational(std::string_view query) = 0;
    /// Temporal (needs knowledge of past states) versus spatial.
    virtual bool is_temporal(std::string_view query) = 0;
};

std::string situational_classifier_prompt(std::string_view query);
std::string temporal_classifier_prompt(std::string_view query);

/// Classifier backed by a chat model; each call is a fresh two-message
/// conversation whose reply's first word is the label.
class LlmClassifier : public Classifier {
public:
    LlmClassifier(ChatProvider& chat, ChatParams params) : chat_(chat), params_(std::move(params)) {}

    bool is_situational(std::string_view query) override;
    bool is_temporal(std::string_view query) override;

private:
    std::string ask(const std::string& prompt);

    ChatProvider& chat_;
    ChatParams params_;
};

}  // namespace seqa
