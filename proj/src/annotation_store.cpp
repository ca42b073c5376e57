#include "seqa/annotation_store.hpp"

#include "seqa/decomposition.hpp"
#include "seqa/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>

namespace seqa {

std::string_view to_string(TaskMode m) { return m == TaskMode::Situational ? "situational" : "consensus"; }

std::optional<TaskMode> parse_task_mode(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    if (v == "situational") return TaskMode::Situational;
    if (v == "consensus") return TaskMode::Consensus;
    return std::nullopt;
}

json to_json(const AnnotationTask& t) {
    json states = json::array();
    for (const auto& s : t.states) states.push_back({s.class_name, to_string(s.value)});
    json relations = json::array();
    for (const auto& r : t.relations) relations.push_back({r.subject, to_string(r.relation), r.target});
    json j = {{"task_id", t.task_id},
              {"mode", to_string(t.mode)},
              {"query", t.query},
              {"states", states},
              {"relations", relations},
              {"image_refs", t.image_refs}};
    if (!t.parent_id.empty()) j["parent_id"] = t.parent_id;
    return j;
}

void StudyConfig::validate() const {
    if (annotators_per_task == 0 || annotators_per_task % 2 == 0)
        throw ConfigError("annotators_per_task",
                          fmt::format("annotators per task must be odd, got {}", annotators_per_task));
    if (situational_share == 0 && consensus_share == 0)
        throw ConfigError("mode_mix", "mode mix 0:0 selects no tasks");
}

json to_json(const StudyConfig& c) {
    return {{"annotators_per_task", c.annotators_per_task},
            {"mode_mix", fmt::format("{}:{}", c.situational_share, c.consensus_share)}};
}

std::vector<AnnotationTask> build_tasks(const std::vector<SituationalDatapoint>& datapoints, const StudyConfig& config) {
    config.validate();
    std::vector<AnnotationTask> tasks;
    if (config.situational_share > 0) {
        for (const auto& d : datapoints) {
            AnnotationTask t;
            t.task_id = d.id;
            t.mode = TaskMode::Situational;
            t.query = d.query;
            t.states = d.states;
            t.relations = d.relations;
            tasks.push_back(std::move(t));
        }
    }
    if (config.consensus_share == 0) return tasks;

    std::vector<AnnotationTask> consensus;
    for (const auto& d : datapoints) {
        for (const auto& q : decompose(d)) {
            AnnotationTask t;
            t.task_id = fmt::format("{}/{}", q.parent_id, q.class_name);
            t.mode = TaskMode::Consensus;
            t.query = q.text;
            t.parent_id = q.parent_id;
            consensus.push_back(std::move(t));
        }
    }
    std::size_t take = consensus.size();
    if (config.situational_share > 0)
        take = std::min(take, datapoints.size() * config.consensus_share / config.situational_share);
    std::set<std::string> ids;
    for (const auto& t : tasks) ids.insert(t.task_id);
    for (std::size_t i = 0; i < take; ++i) {
        // A datapoint may list a class twice (two domains); keep the first.
        if (!ids.insert(consensus[i].task_id).second) continue;
        tasks.push_back(std::move(consensus[i]));
    }
    return tasks;
}

json to_json(const AnnotationRecord& r) {
    return {{"worker_id", r.worker_id},
            {"task_id", r.task_id},
            {"mode", to_string(r.mode)},
            {"response", to_string(r.response)},
            {"timestamp", r.timestamp}};
}

AnnotationRecord annotation_from_json(const json& j) {
    AnnotationRecord r;
    try {
        r.worker_id = j.at("worker_id").get<std::string>();
        r.task_id = j.at("task_id").get<std::string>();
        const auto response = j.at("response").get<std::string>();
        const auto v = parse_answer_value(response);
        if (!v) throw SchemaError(r.task_id, fmt::format("unknown response '{}'", response));
        r.response = *v;
        if (const auto it = j.find("mode"); it != j.end()) {
            const auto m = parse_task_mode(it->get<std::string>());
            if (!m) throw SchemaError(r.task_id, fmt::format("unknown mode '{}'", it->get<std::string>()));
            r.mode = *m;
        }
        r.timestamp = j.value("timestamp", std::string());
    } catch (const json::exception& e) {
        throw SchemaError(r.task_id, fmt::format("annotation needs worker_id, task_id, response ({})", e.what()));
    }
    if (r.worker_id.empty()) throw SchemaError("worker_id", "worker_id must not be empty");
    return r;
}

json to_json(const StudySummary& s) {
    json modes = json::object();
    std::vector<std::pair<double, std::string>> order;
    for (const auto& [mode, m] : s.modes) {
        modes[std::string(to_string(mode))] = {{"tasks", m.tasks},
                                               {"completed", m.completed},
                                               {"cannot_answer", m.cannot_answer},
                                               {"cannot_answer_pct", m.cannot_answer_pct},
                                               {"agreement_pct", m.agreement_pct}};
        if (m.completed > 0) order.emplace_back(m.cannot_answer_pct, std::string(to_string(mode)));
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    json ranked = json::array();
    for (const auto& [pct, name] : order) ranked.push_back(name);
    return {{"tasks", s.tasks},
            {"completed", s.completed},
            {"annotations", s.annotations},
            {"complete", s.complete},
            {"answerability_pct", s.answerability_pct},
            {"modes", modes},
            {"modes_by_cannot_answer", ranked}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks, StudyConfig config,
                                 std::optional<std::filesystem::path> log_path, Clock clock)
    : tasks_(std::move(tasks)), config_(config), clock_(clock ? std::move(clock) : Clock(utc_timestamp)),
      log_path_(std::move(log_path)) {
    config_.validate();
    for (std::size_t i = 0; i < tasks_.size(); ++i)
        if (!index_.emplace(tasks_[i].task_id, i).second)
            throw DuplicateIdError(tasks_[i].task_id, fmt::format("task '{}' listed twice", tasks_[i].task_id));
    state_.resize(tasks_.size());

    if (log_path_) {
        if (std::filesystem::exists(*log_path_)) {
            std::size_t line = 0;
            for (const auto& row : jsonl::read_file(*log_path_)) {
                ++line;
                const auto where = fmt::format("{}:{}", log_path_->string(), line);
                AnnotationRecord r;
                try {
                    r = annotation_from_json(row);
                    index_of(r.task_id);
                } catch (const Error& e) {
                    throw SchemaError(where, fmt::format("{}: {}", where, e.what()));
                }
                const auto& st = state_[index_.at(r.task_id)];
                if (st.workers.contains(r.worker_id))
                    throw SchemaError(where, fmt::format("{}: {} annotated {} twice", where, r.worker_id, r.task_id));
                if (st.votes.total() >= config_.annotators_per_task)
                    throw SchemaError(where, fmt::format("{}: {} is over-annotated", where, r.task_id));
                apply(r);
            }
        }
        if (log_path_->has_parent_path()) std::filesystem::create_directories(log_path_->parent_path());
        log_.open(*log_path_, std::ios::app | std::ios::binary);
        if (!log_) throw IoError(log_path_->string(), fmt::format("cannot append to {}", log_path_->string()));
    }
    publish();
}

std::size_t AnnotationStore::index_of(const std::string& task_id) const {
    const auto it = index_.find(task_id);
    if (it == index_.end()) throw UnknownTaskError(task_id, fmt::format("no task '{}'", task_id));
    return it->second;
}

void AnnotationStore::apply(const AnnotationRecord& r) {
    auto& st = state_[index_.at(r.task_id)];
    st.workers.insert(r.worker_id);
    switch (r.response) {
        case AnswerValue::Yes: ++st.votes.yes; break;
        case AnswerValue::No: ++st.votes.no; break;
        case AnswerValue::CannotAnswer: ++st.votes.cannot; break;
    }
    ++done_by_worker_[r.worker_id];
    records_.push_back(r);
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& worker_id) const {
    std::lock_guard lock(write_mutex_);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const auto& st = state_[i];
        if (st.votes.total() >= config_.annotators_per_task || st.workers.contains(worker_id)) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto count = st.votes.total();
        const auto best_count = state_[*best].votes.total();
        if (count < best_count || (count == best_count && tasks_[i].task_id < tasks_[*best].task_id)) best = i;
    }
    if (!best) return std::nullopt;
    return tasks_[*best];
}

AnnotationRecord AnnotationStore::submit(const std::string& worker_id, const std::string& task_id,
                                         AnswerValue response) {
    if (worker_id.empty()) throw SchemaError("worker_id", "worker_id must not be empty");
    std::lock_guard lock(write_mutex_);
    const auto i = index_of(task_id);
    const auto& st = state_[i];
    if (st.workers.contains(worker_id))
        throw DuplicateAnnotationError(task_id, fmt::format("{} already annotated {}", worker_id, task_id));
    if (st.votes.total() >= config_.annotators_per_task)
        throw TaskCompleteError(task_id, fmt::format("{} already has {} annotations", task_id, st.votes.total()));

    AnnotationRecord r{worker_id, task_id, tasks_[i].mode, response, clock_()};
    if (log_.is_open()) {
        log_ << to_json(r).dump() << '\n';
        log_.flush();
        if (!log_) throw IoError(log_path_->string(), "failed to append annotation");
    }
    apply(r);
    publish();
    return r;
}

GroundTruthLabel AnnotationStore::label_of(std::size_t index) const {
    const auto& votes = state_[index].votes;
    return {tasks_[index].task_id, aggregate_votes(votes), votes};
}

GroundTruthLabel AnnotationStore::aggregate(const std::string& task_id) const {
    std::lock_guard lock(write_mutex_);
    const auto i = index_of(task_id);
    const auto have = state_[i].votes.total();
    if (have < config_.annotators_per_task)
        throw IncompleteTaskError(task_id, fmt::format("{} has {} of {} annotations", task_id, have,
                                                       config_.annotators_per_task));
    return label_of(i);
}

void AnnotationStore::publish() {
    auto snap = std::make_shared<StoreSnapshot>();
    auto& s = snap->summary;
    s.tasks = tasks_.size();
    s.annotations = records_.size();
    std::map<TaskMode, double> agreement_sum;
    std::size_t answerable = 0;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const auto& votes = state_[i].votes;
        snap->counts.push_back(votes.total());
        auto& mode = s.modes[tasks_[i].mode];
        ++mode.tasks;
        if (votes.total() < config_.annotators_per_task) continue;
        auto label = label_of(i);
        ++s.completed;
        ++mode.completed;
        if (label.label == AnswerValue::CannotAnswer) ++mode.cannot_answer;
        else ++answerable;
        const auto top = std::max({votes.yes, votes.no, votes.cannot});
        agreement_sum[tasks_[i].mode] += static_cast<double>(top) / static_cast<double>(votes.total());
        snap->labels.push_back(std::move(label));
    }
    for (auto& [mode, m] : s.modes) {
        if (m.completed == 0) continue;
        m.cannot_answer_pct = 100.0 * static_cast<double>(m.cannot_answer) / static_cast<double>(m.completed);
        m.agreement_pct = 100.0 * agreement_sum[mode] / static_cast<double>(m.completed);
    }
    s.complete = s.completed == s.tasks;
    if (s.completed > 0)
        s.answerability_pct = 100.0 * static_cast<double>(answerable) / static_cast<double>(s.completed);
    snap->progress = {{"tasks", s.tasks},
                      {"completed", s.completed},
                      {"annotations", s.annotations},
                      {"annotations_required", s.tasks * config_.annotators_per_task},
                      {"complete", s.complete}};

    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(snap);
}

std::shared_ptr<const StoreSnapshot> AnnotationStore::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

std::vector<AnnotationRecord> AnnotationStore::records() const {
    std::lock_guard lock(write_mutex_);
    return records_;
}

std::size_t AnnotationStore::worker_done(const std::string& worker_id) const {
    std::lock_guard lock(write_mutex_);
    const auto it = done_by_worker_.find(worker_id);
    return it == done_by_worker_.end() ? 0 : it->second;
}

}  // namespace seqa
