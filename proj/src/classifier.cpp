#include "seqa/classifier.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

namespace seqa {

namespace {

constexpr std::string_view kClassifierSystem =
    "You label household questions asked to a home robot. Reply with a single word.";

constexpr std::string_view kSituationalTemplate = R"(A question is SITUATIONAL when it asks whether a place or the household is in a certain condition, names no specific object, and can only be answered by checking several objects and agreeing on what their states should be. A question is SIMPLE when it asks directly about a named object or one of its properties.

Examples:
"Is the kitchen ready for meal preparation?" -> situational
"Is the house ready for sleeptime?" -> situational
"What is the color of the sofa?" -> simple
"Is the microwave open?" -> simple

Question: "{}"
Answer "situational" or "simple".)";

constexpr std::string_view kTemporalTemplate = R"(A question is SPATIAL when it can be answered from the current states and positions of objects alone. A question is TEMPORAL when answering it needs knowledge of how the environment was earlier, for example what someone did today.

Examples:
"Is the kitchen ready for cooking?" -> spatial
"Is the bathroom ready for a shower?" -> spatial
"Was someone sleeping in the bedroom today?" -> temporal
"Has anyone cooked breakfast this morning?" -> temporal

Question: "{}"
Answer "spatial" or "temporal".)";

std::string first_word(std::string_view reply) {
    std::string word;
    for (unsigned char c : reply) {
        if (std::isalpha(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (!word.empty()) {
            break;
        }
    }
    return word;
}

}  // namespace

std::string situational_classifier_prompt(std::string_view query) {
    return fmt::format(fmt::runtime(kSituationalTemplate), query);
}

std::string temporal_classifier_prompt(std::string_view query) {
    return fmt::format(fmt::runtime(kTemporalTemplate), query);
}

std::string LlmClassifier::ask(const std::string& prompt) {
    const Conversation conv{{Role::System, std::string(kClassifierSystem)}, {Role::User, prompt}};
    return first_word(chat_.complete(conv, params_).content);
}

bool LlmClassifier::is_situational(std::string_view query) {
    const auto word = ask(situational_classifier_prompt(query));
    if (word == "situational" || word == "yes") return true;
    if (word == "simple" || word == "no") return false;
    throw ProviderError(std::string(query), fmt::format("unrecognized situational label '{}'", word));
}

bool LlmClassifier::is_temporal(std::string_view query) {
    const auto word = ask(temporal_classifier_prompt(query));
    if (word == "temporal") return true;
    if (word == "spatial") return false;
    throw ProviderError(std::string(query), fmt::format("unrecognized temporal label '{}'", word));
}

}  // namespace seqa
