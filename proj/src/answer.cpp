#include "seqa/answer.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

namespace seqa {

std::string_view to_string(AnswerValue v) {
    switch (v) {
        case AnswerValue::Yes: return "Yes";
        case AnswerValue::No: return "No";
        case AnswerValue::CannotAnswer: return "CannotAnswer";
    }
    return "?";
}

std::optional<AnswerValue> parse_answer_value(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    if (v == "yes") return AnswerValue::Yes;
    if (v == "no") return AnswerValue::No;
    if (v == "cannotanswer" || v == "cannot answer" || v == "cannot_answer" || v == "cannot")
        return AnswerValue::CannotAnswer;
    return std::nullopt;
}

AnswerValue aggregate_votes(const VoteCounts& votes) {
    if (votes.cannot > 0) return AnswerValue::CannotAnswer;
    if (votes.yes == votes.no)
        throw InvariantError(fmt::format("tied vote {} yes / {} no has no majority", votes.yes, votes.no));
    return votes.yes > votes.no ? AnswerValue::Yes : AnswerValue::No;
}

json to_json(const GroundTruthLabel& g) {
    return {{"task_id", g.task_id},
            {"label", to_string(g.label)},
            {"votes", {{"yes", g.votes.yes}, {"no", g.votes.no}, {"cannot", g.votes.cannot}}}};
}

GroundTruthLabel ground_truth_from_json(const json& j) {
    GroundTruthLabel g;
    try {
        g.task_id = j.at("task_id").get<std::string>();
        const auto label = j.at("label").get<std::string>();
        const auto v = parse_answer_value(label);
        if (!v) throw SchemaError(g.task_id, fmt::format("unknown label '{}' for {}", label, g.task_id));
        g.label = *v;
        if (const auto it = j.find("votes"); it != j.end() && !it->is_null()) {
            g.votes.yes = it->value("yes", std::size_t{0});
            g.votes.no = it->value("no", std::size_t{0});
            g.votes.cannot = it->value("cannot", std::size_t{0});
        }
    } catch (const json::exception& e) {
        throw SchemaError(g.task_id, fmt::format("ground truth rows need task_id and label ({})", e.what()));
    }
    return g;
}

std::vector<GroundTruthLabel> read_ground_truth(const std::filesystem::path& path) {
    std::vector<GroundTruthLabel> out;
    std::size_t line = 0;
    for (const auto& row : jsonl::read_file(path)) {
        ++line;
        try {
            out.push_back(ground_truth_from_json(row));
        } catch (const SchemaError& e) {
            throw SchemaError(fmt::format("{}:{}", path.string(), line), e.what());
        }
    }
    return out;
}

void write_ground_truth(const std::filesystem::path& path, const std::vector<GroundTruthLabel>& labels) {
    std::vector<json> rows;
    rows.reserve(labels.size());
    for (const auto& g : labels) rows.push_back(to_json(g));
    jsonl::write_file(path, rows);
}

}  // namespace seqa
