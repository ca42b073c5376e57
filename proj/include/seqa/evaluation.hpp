#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqa/answer.hpp"
#include "seqa/chat.hpp"
#include "seqa/datapoint.hpp"
#include "seqa/scene_graph.hpp"

namespace seqa {

/// Answers situational datapoints against some fixed context.
class Answerer {
public:
    virtual ~Answerer() = default;
    virtual Answer answer(const SituationalDatapoint& d) = 0;
};

/// Yes iff every consensus state and relation holds in `graph`.
Answer oracle_answer(const SituationalDatapoint& d, const SceneGraph& graph);

class SceneOracle : public Answerer {
public:
    explicit SceneOracle(const SceneGraph& graph) : graph_(graph) {}
    Answer answer(const SituationalDatapoint& d) override { return oracle_answer(d, graph_); }

private:
    const SceneGraph& graph_;
};

/// First alphabetic token decides: yes / no / cannot. Anything else throws
/// UnparseableAnswerError.
AnswerValue normalize_answer(std::string_view response);

/// "<query>\nObject-States: [...]\nObject-Relationships: [...]"
std::string query_and_object_data(const SituationalDatapoint& d);
std::string llm_answer_prompt(const SituationalDatapoint& d, const SceneGraph& graph);
std::string reasoning_prompt(const SituationalDatapoint& d, AnswerValue answer);

struct LlmAnswererOptions {
    bool with_reasoning = false;
    /// Show the model the scene with the datapoint's consensus applied.
    bool apply_consensus = true;
};

/// Answer of a chat model given the serialized scene graph; optional
/// follow-up in the same conversation asks for a short justification.
class LlmAnswerer : public Answerer {
public:
    LlmAnswerer(ChatProvider& chat, ChatParams params, const SceneGraph& graph, LlmAnswererOptions options = {})
        : chat_(chat), params_(std::move(params)), graph_(graph), options_(options) {}
    Answer answer(const SituationalDatapoint& d) override;

private:
    ChatProvider& chat_;
    ChatParams params_;
    const SceneGraph& graph_;
    LlmAnswererOptions options_;
};

enum class PredictionLevel { Query, Room, Object };
std::string_view to_string(PredictionLevel l);
std::optional<PredictionLevel> parse_prediction_level(std::string_view s);

/// One recorded model output: a whole-query answer, or the answer for one
/// room / object unit (image) of a datapoint.
struct UnitPrediction {
    std::string datapoint_id;
    std::string unit_id;
    PredictionLevel level = PredictionLevel::Query;
    AnswerValue answer = AnswerValue::CannotAnswer;
};

/// Rows {datapoint_id, unit_id, level: "query"|"room"|"object", answer}.
std::vector<UnitPrediction> read_predictions(const std::filesystem::path& path);

/// Serves the query-level rows of a prediction file.
class RecordedAnswerer : public Answerer {
public:
    explicit RecordedAnswerer(const std::vector<UnitPrediction>& predictions);
    Answer answer(const SituationalDatapoint& d) override;

private:
    std::map<std::string, AnswerValue> by_id_;
};

/// Answers every datapoint, fanning out over at most `workers` threads.
/// Results keep input order. The first error is rethrown.
std::vector<Answer> answer_all(Answerer& answerer, const std::vector<SituationalDatapoint>& datapoints,
                               std::size_t workers = 1);

int joint(int room_success, int object_success);

struct BinaryScores {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    /// Units whose ground truth is CannotAnswer; not scored.
    std::size_t excluded = 0;

    std::size_t scored() const { return tp + fp + fn + tn; }
    /// Fractions in [0, 1]. Accuracy of an empty set is 0. F1 with no
    /// positives anywhere (tp + fp + fn == 0) is 1.
    double accuracy() const;
    double precision() const;
    double recall() const;
    double f1() const;
    /// Scores one pair, Yes = positive. Predicted CannotAnswer counts as
    /// the wrong answer.
    void add(AnswerValue predicted, AnswerValue truth);
};

struct SuccessFlags {
    double accuracy_room = 0.0;
    double accuracy_object = 0.0;
    double f1_room = 0.0;
    double f1_object = 0.0;
    std::size_t room_units = 0;
    std::size_t object_units = 0;

    static constexpr double kThreshold = 0.5;
    int room_by_accuracy() const { return accuracy_room >= kThreshold ? 1 : 0; }
    int object_by_accuracy() const { return accuracy_object >= kThreshold ? 1 : 0; }
    int room_by_f1() const { return f1_room >= kThreshold ? 1 : 0; }
    int object_by_f1() const { return f1_object >= kThreshold ? 1 : 0; }
};

struct UnitScores {
    std::map<std::string, SuccessFlags> flags;  // by datapoint id
    BinaryScores pooled_room;
    BinaryScores pooled_object;
};

/// Per-datapoint room/object scores from unit predictions. A unit's ground
/// truth is the label of "<datapoint_id>/<unit_id>" when present, else the
/// datapoint's own label; missing both is an IdMismatchError.
UnitScores score_units(const std::vector<UnitPrediction>& predictions,
                       const std::map<std::string, GroundTruthLabel>& ground_truth);

struct ReportRow {
    std::string datapoint_id;
    Answer prediction;
    AnswerValue ground_truth = AnswerValue::CannotAnswer;
    /// Unset when the ground truth is CannotAnswer.
    std::optional<bool> match;
    std::optional<SuccessFlags> flags;
};

struct LevelAggregate {
    double per_query_mean_accuracy = 0.0;
    double per_query_mean_f1 = 0.0;
    double pooled_accuracy = 0.0;
    double pooled_f1 = 0.0;
};

struct EvalReport {
    std::vector<ReportRow> rows;  // sorted by datapoint id
    std::size_t total = 0;
    std::size_t matches = 0;
    std::size_t mismatches = 0;
    std::size_t excluded = 0;  // ground truth CannotAnswer
    std::size_t predicted_cannot_answer = 0;
    BinaryScores confusion;
    // Percentages in [0, 100].
    double agreement_pct = 0.0;
    double accuracy_pct = 0.0;
    double precision_pct = 0.0;
    double recall_pct = 0.0;
    double f1_pct = 0.0;
    double cannot_answer_pct = 0.0;
    double answerability_pct = 0.0;
    std::optional<LevelAggregate> room;
    std::optional<LevelAggregate> object;
    std::optional<double> joint_accuracy_pct;
    std::optional<double> joint_f1_pct;
    json config;
};

/// Pairs predictions with query-level ground truth. Ids must match exactly
/// (IdMismatchError) and be unique (DuplicateIdError).
EvalReport compute_report(const std::vector<std::pair<std::string, Answer>>& predictions,
                          const std::vector<GroundTruthLabel>& ground_truth,
                          const std::optional<UnitScores>& units = std::nullopt, json config = json::object());

json to_json(const EvalReport& r);
/// Aligned plain-text table: Room / Object / Joint rows by Accuracy / F1,
/// followed by the agreement summary.
std::string render_table(const EvalReport& r);

}  // namespace seqa
