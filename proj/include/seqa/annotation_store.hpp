#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seqa/answer.hpp"
#include "seqa/datapoint.hpp"

namespace seqa {

enum class TaskMode { Situational, Consensus };
std::string_view to_string(TaskMode m);
std::optional<TaskMode> parse_task_mode(std::string_view s);

struct AnnotationTask {
    std::string task_id;
    TaskMode mode = TaskMode::Situational;
    std::string query;
    /// Shown alongside situational queries.
    std::vector<ConsensusState> states;
    std::vector<ConsensusRelation> relations;
    /// Source datapoint of a consensus task.
    std::string parent_id;
    /// Reserved for image references; never filled by this tool.
    std::vector<std::string> image_refs;
};

json to_json(const AnnotationTask& t);

struct StudyConfig {
    std::size_t annotators_per_task = 5;
    /// situational : consensus task ratio. 1:0 is a plain validation study.
    std::size_t situational_share = 1;
    std::size_t consensus_share = 0;

    void validate() const;
};

json to_json(const StudyConfig& c);

/// Every situational task (when its share is nonzero) plus
/// floor(|S| * c / s) consensus tasks taken in decomposition order. Consensus
/// task ids are "<datapoint_id>/<class>".
std::vector<AnnotationTask> build_tasks(const std::vector<SituationalDatapoint>& datapoints, const StudyConfig& config);

struct AnnotationRecord {
    std::string worker_id;
    std::string task_id;
    TaskMode mode = TaskMode::Situational;
    AnswerValue response = AnswerValue::CannotAnswer;
    std::string timestamp;
};

json to_json(const AnnotationRecord& r);
AnnotationRecord annotation_from_json(const json& j);

struct ModeSummary {
    std::size_t tasks = 0;
    std::size_t completed = 0;
    std::size_t cannot_answer = 0;
    double cannot_answer_pct = 0.0;
    /// Mean share of votes on a completed task that agree with its most
    /// common response.
    double agreement_pct = 0.0;
};

struct StudySummary {
    std::size_t tasks = 0;
    std::size_t completed = 0;
    std::size_t annotations = 0;
    bool complete = false;
    /// Completed tasks labelled Yes or No, over completed tasks.
    double answerability_pct = 0.0;
    std::map<TaskMode, ModeSummary> modes;
};

json to_json(const StudySummary& s);

/// Immutable view handed to readers.
struct StoreSnapshot {
    std::vector<std::size_t> counts;  // by task index
    std::vector<GroundTruthLabel> labels;  // completed tasks, task order
    StudySummary summary;
    json progress;
};

/// Task queue plus append-only annotation log. Writers serialize on one
/// mutex; readers take the latest snapshot without touching the writer lock.
class AnnotationStore {
public:
    using Clock = std::function<std::string()>;

    /// Replays `log_path` when it exists, then appends to it. Without a log
    /// path everything stays in memory.
    AnnotationStore(std::vector<AnnotationTask> tasks, StudyConfig config,
                    std::optional<std::filesystem::path> log_path = std::nullopt, Clock clock = {});

    const std::vector<AnnotationTask>& tasks() const { return tasks_; }
    const StudyConfig& config() const { return config_; }

    /// Unfinished task this worker has not annotated: fewest annotations
    /// first, ties by task id.
    std::optional<AnnotationTask> next_task(const std::string& worker_id) const;

    /// UnknownTaskError, DuplicateAnnotationError, TaskCompleteError.
    AnnotationRecord submit(const std::string& worker_id, const std::string& task_id, AnswerValue response);

    /// IncompleteTaskError until the task has all its annotations.
    GroundTruthLabel aggregate(const std::string& task_id) const;

    std::shared_ptr<const StoreSnapshot> snapshot() const;
    std::vector<AnnotationRecord> records() const;
    std::size_t worker_done(const std::string& worker_id) const;

private:
    struct TaskState {
        VoteCounts votes;
        std::set<std::string> workers;
    };

    std::size_t index_of(const std::string& task_id) const;
    void apply(const AnnotationRecord& r);
    void publish();
    GroundTruthLabel label_of(std::size_t index) const;

    std::vector<AnnotationTask> tasks_;
    StudyConfig config_;
    Clock clock_;
    std::map<std::string, std::size_t> index_;
    std::vector<TaskState> state_;
    std::vector<AnnotationRecord> records_;
    std::map<std::string, std::size_t> done_by_worker_;
    std::optional<std::filesystem::path> log_path_;
    std::ofstream log_;

    mutable std::mutex write_mutex_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const StoreSnapshot> snapshot_;
};

/// ISO-8601 UTC, second precision.
std::string utc_timestamp();

}  // namespace seqa
