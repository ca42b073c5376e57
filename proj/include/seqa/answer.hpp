#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqa/text.hpp"

namespace seqa {

enum class AnswerValue { Yes, No, CannotAnswer };

/// "Yes", "No", "CannotAnswer".
std::string_view to_string(AnswerValue v);
/// Case-insensitive; also "cannot answer", "cannot_answer", "cannot".
std::optional<AnswerValue> parse_answer_value(std::string_view s);

struct Answer {
    AnswerValue value = AnswerValue::CannotAnswer;
    std::optional<std::string> reasoning;
    /// Set when the value was forced, e.g. "unparseable".
    std::optional<std::string> note;

    bool operator==(const Answer&) const = default;
};

struct VoteCounts {
    std::size_t yes = 0;
    std::size_t no = 0;
    std::size_t cannot = 0;

    std::size_t total() const { return yes + no + cannot; }
    bool operator==(const VoteCounts&) const = default;
};

struct GroundTruthLabel {
    std::string task_id;
    AnswerValue label = AnswerValue::CannotAnswer;
    VoteCounts votes;

    std::size_t annotator_count() const { return votes.total(); }
    bool operator==(const GroundTruthLabel&) const = default;
};

/// CannotAnswer as soon as one vote says so; otherwise the strict Yes/No
/// majority. A Yes/No tie (even vote count) is an InvariantError.
AnswerValue aggregate_votes(const VoteCounts& votes);

/// Ground-truth rows: {task_id, label, votes: {yes, no, cannot}}. `votes`
/// is optional on read.
json to_json(const GroundTruthLabel& g);
GroundTruthLabel ground_truth_from_json(const json& j);
std::vector<GroundTruthLabel> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const std::vector<GroundTruthLabel>& labels);

}  // namespace seqa
