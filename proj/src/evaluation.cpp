#include "seqa/evaluation.hpp"

#include "seqa/errors.hpp"
#include "seqa/prompts.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

namespace seqa {

Answer oracle_answer(const SituationalDatapoint& d, const SceneGraph& graph) {
    for (const auto& s : d.states)
        if (!query_state(graph, s.class_name, s.value)) return {AnswerValue::No, std::nullopt, std::nullopt};
    for (const auto& r : d.relations)
        if (!relation_holds(graph, r)) return {AnswerValue::No, std::nullopt, std::nullopt};
    return {AnswerValue::Yes, std::nullopt, std::nullopt};
}

AnswerValue normalize_answer(std::string_view response) {
    for (const auto& tok : text::word_tokens(response)) {
        if (std::none_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isalpha(c); })) continue;
        if (tok == "yes") return AnswerValue::Yes;
        if (tok == "no") return AnswerValue::No;
        if (tok == "cannot") return AnswerValue::CannotAnswer;
        break;
    }
    const auto head = std::string(response.substr(0, std::min<std::size_t>(response.size(), 60)));
    throw UnparseableAnswerError(fmt::format("no Yes/No verdict at the start of \"{}\"", head));
}

std::string query_and_object_data(const SituationalDatapoint& d) {
    return fmt::format("Query: {}\nObject-States: {}\nObject-Relationships: {}", d.query, format_states(d.states),
                       format_relations(d.relations));
}

std::string llm_answer_prompt(const SituationalDatapoint& d, const SceneGraph& graph) {
    return fmt::format(
        "Here is the scene graph of a household as JSON. It lists every object with its states and every "
        "relationship between objects.\n{}\n\nQuestion: {}\nStart your reply with Yes or No.",
        graph.to_json().dump(), d.query);
}

std::string reasoning_prompt(const SituationalDatapoint& d, AnswerValue answer) {
    return fmt::format(
        "{}\nYour answer is: {}.\nCan you provide a brief reason for your answer focusing only on the object "
        "states and relationships provided?",
        query_and_object_data(d), to_string(answer));
}

Answer LlmAnswerer::answer(const SituationalDatapoint& d) {
    std::optional<SceneGraph> modified;
    if (options_.apply_consensus) modified = apply_consensus(graph_, d.states, d.relations);
    const SceneGraph& graph = modified ? *modified : graph_;

    Conversation conversation{{Role::System, "You answer questions about a household using its scene graph."},
                              {Role::User, llm_answer_prompt(d, graph)}};
    const auto reply = chat_.complete(conversation, params_);
    Answer out;
    try {
        out.value = normalize_answer(reply.content);
    } catch (const UnparseableAnswerError&) {
        out.value = AnswerValue::CannotAnswer;
        out.note = "unparseable";
        return out;
    }
    if (options_.with_reasoning && out.value != AnswerValue::CannotAnswer) {
        conversation.push_back({Role::Assistant, reply.content});
        conversation.push_back({Role::User, reasoning_prompt(d, out.value)});
        out.reasoning = chat_.complete(conversation, params_).content;
    }
    return out;
}

std::string_view to_string(PredictionLevel l) {
    switch (l) {
        case PredictionLevel::Query: return "query";
        case PredictionLevel::Room: return "room";
        case PredictionLevel::Object: return "object";
    }
    return "?";
}

std::optional<PredictionLevel> parse_prediction_level(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    if (v == "query") return PredictionLevel::Query;
    if (v == "room") return PredictionLevel::Room;
    if (v == "object") return PredictionLevel::Object;
    return std::nullopt;
}

std::vector<UnitPrediction> read_predictions(const std::filesystem::path& path) {
    std::vector<UnitPrediction> out;
    std::size_t line = 0;
    for (const auto& row : jsonl::read_file(path)) {
        ++line;
        const auto where = fmt::format("{}:{}", path.string(), line);
        UnitPrediction p;
        try {
            p.datapoint_id = row.at("datapoint_id").get<std::string>();
            p.unit_id = row.value("unit_id", std::string());
            const auto level = row.value("level", std::string("query"));
            const auto answer = row.at("answer").get<std::string>();
            const auto l = parse_prediction_level(level);
            if (!l) throw SchemaError(where, fmt::format("{}: unknown level '{}'", where, level));
            const auto a = parse_answer_value(answer);
            if (!a) throw SchemaError(where, fmt::format("{}: unknown answer '{}'", where, answer));
            p.level = *l;
            p.answer = *a;
        } catch (const json::exception& e) {
            throw SchemaError(where, fmt::format("{}: prediction rows need datapoint_id and answer ({})", where,
                                                 e.what()));
        }
        out.push_back(std::move(p));
    }
    return out;
}

RecordedAnswerer::RecordedAnswerer(const std::vector<UnitPrediction>& predictions) {
    for (const auto& p : predictions) {
        if (p.level != PredictionLevel::Query) continue;
        if (!by_id_.emplace(p.datapoint_id, p.answer).second)
            throw DuplicateIdError(p.datapoint_id, fmt::format("two query-level predictions for {}", p.datapoint_id));
    }
}

Answer RecordedAnswerer::answer(const SituationalDatapoint& d) {
    const auto it = by_id_.find(d.id);
    if (it == by_id_.end())
        throw UnknownObjectError(d.id, fmt::format("no recorded query-level prediction for {}", d.id));
    return {it->second, std::nullopt, std::nullopt};
}

std::vector<Answer> answer_all(Answerer& answerer, const std::vector<SituationalDatapoint>& datapoints,
                               std::size_t workers) {
    std::vector<Answer> out(datapoints.size());
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, datapoints.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < datapoints.size(); ++i) out[i] = answerer.answer(datapoints[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const auto i = next.fetch_add(1);
                if (i >= datapoints.size() || failed) return;
                try {
                    out[i] = answerer.answer(datapoints[i]);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed = true;
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

int joint(int room_success, int object_success) { return (room_success != 0 || object_success != 0) ? 1 : 0; }

double BinaryScores::accuracy() const {
    return scored() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(scored());
}

double BinaryScores::precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double BinaryScores::recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double BinaryScores::f1() const {
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

void BinaryScores::add(AnswerValue predicted, AnswerValue truth) {
    if (truth == AnswerValue::CannotAnswer) {
        ++excluded;
        return;
    }
    const bool actual_yes = truth == AnswerValue::Yes;
    const bool predicted_yes = predicted == AnswerValue::Yes;
    // A CannotAnswer prediction is wrong either way: a missed Yes or a
    // spurious disagreement on a No.
    if (predicted == AnswerValue::CannotAnswer) {
        if (actual_yes) ++fn;
        else ++fp;
        return;
    }
    if (actual_yes && predicted_yes) ++tp;
    else if (actual_yes) ++fn;
    else if (predicted_yes) ++fp;
    else ++tn;
}

UnitScores score_units(const std::vector<UnitPrediction>& predictions,
                       const std::map<std::string, GroundTruthLabel>& ground_truth) {
    UnitScores out;
    std::map<std::string, std::pair<BinaryScores, BinaryScores>> per_query;
    std::set<std::tuple<std::string, std::string, PredictionLevel>> seen;
    for (const auto& p : predictions) {
        if (p.level == PredictionLevel::Query) continue;
        if (!seen.emplace(p.datapoint_id, p.unit_id, p.level).second)
            throw DuplicateIdError(p.datapoint_id, fmt::format("duplicate {} prediction for {}/{}", to_string(p.level),
                                                               p.datapoint_id, p.unit_id));
        auto gt = ground_truth.find(p.datapoint_id + "/" + p.unit_id);
        if (gt == ground_truth.end()) gt = ground_truth.find(p.datapoint_id);
        if (gt == ground_truth.end()) throw IdMismatchError({p.datapoint_id + "/" + p.unit_id}, {});
        auto& [room, object] = per_query[p.datapoint_id];
        if (p.level == PredictionLevel::Room) {
            room.add(p.answer, gt->second.label);
            out.pooled_room.add(p.answer, gt->second.label);
        } else {
            object.add(p.answer, gt->second.label);
            out.pooled_object.add(p.answer, gt->second.label);
        }
    }
    for (const auto& [id, scores] : per_query) {
        const auto& [room, object] = scores;
        SuccessFlags f;
        f.room_units = room.scored();
        f.object_units = object.scored();
        if (f.room_units > 0) {
            f.accuracy_room = room.accuracy();
            f.f1_room = room.f1();
        }
        if (f.object_units > 0) {
            f.accuracy_object = object.accuracy();
            f.f1_object = object.f1();
        }
        out.flags.emplace(id, f);
    }
    return out;
}

namespace {

double pct(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

template <typename Key>
std::vector<std::string> duplicates(const std::vector<Key>& ids) {
    std::set<std::string> seen, dup;
    for (const auto& id : ids)
        if (!seen.insert(id).second) dup.insert(id);
    return {dup.begin(), dup.end()};
}

json to_json(const Answer& a) {
    json j = {{"value", to_string(a.value)}};
    if (a.reasoning) j["reasoning"] = *a.reasoning;
    if (a.note) j["note"] = *a.note;
    return j;
}

json to_json(const SuccessFlags& f) {
    return {{"accuracy_room", f.accuracy_room},
            {"accuracy_object", f.accuracy_object},
            {"f1_room", f.f1_room},
            {"f1_object", f.f1_object},
            {"room_units", f.room_units},
            {"object_units", f.object_units},
            {"R_accuracy", f.room_by_accuracy()},
            {"O_accuracy", f.object_by_accuracy()},
            {"R_f1", f.room_by_f1()},
            {"O_f1", f.object_by_f1()}};
}

json to_json(const std::optional<LevelAggregate>& a) {
    if (!a) return nullptr;
    return {{"per_query_mean", {{"accuracy", a->per_query_mean_accuracy}, {"f1", a->per_query_mean_f1}}},
            {"pooled", {{"accuracy", a->pooled_accuracy}, {"f1", a->pooled_f1}}}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

EvalReport compute_report(const std::vector<std::pair<std::string, Answer>>& predictions,
                          const std::vector<GroundTruthLabel>& ground_truth, const std::optional<UnitScores>& units,
                          json config) {
    std::vector<std::string> pred_ids, gt_ids;
    for (const auto& [id, a] : predictions) pred_ids.push_back(id);
    for (const auto& g : ground_truth) gt_ids.push_back(g.task_id);
    if (const auto dup = duplicates(pred_ids); !dup.empty())
        throw DuplicateIdError(dup.front(), fmt::format("duplicate prediction ids: {}", fmt::join(dup, ", ")));
    if (const auto dup = duplicates(gt_ids); !dup.empty())
        throw DuplicateIdError(dup.front(), fmt::format("duplicate ground-truth ids: {}", fmt::join(dup, ", ")));

    std::map<std::string, const Answer*> by_id;
    for (const auto& [id, a] : predictions) by_id.emplace(id, &a);
    std::map<std::string, AnswerValue> truth;
    for (const auto& g : ground_truth) truth.emplace(g.task_id, g.label);

    std::vector<std::string> missing, extra;
    for (const auto& [id, v] : truth)
        if (!by_id.contains(id)) missing.push_back(id);
    for (const auto& [id, a] : by_id)
        if (!truth.contains(id)) extra.push_back(id);
    if (!missing.empty() || !extra.empty()) throw IdMismatchError(std::move(missing), std::move(extra));

    EvalReport r;
    r.config = std::move(config);
    r.total = truth.size();
    for (const auto& [id, gt] : truth) {
        ReportRow row;
        row.datapoint_id = id;
        row.prediction = *by_id.at(id);
        row.ground_truth = gt;
        if (row.prediction.value == AnswerValue::CannotAnswer) ++r.predicted_cannot_answer;
        r.confusion.add(row.prediction.value, gt);
        if (gt == AnswerValue::CannotAnswer) {
            ++r.excluded;
        } else {
            row.match = row.prediction.value == gt;
            ++(*row.match ? r.matches : r.mismatches);
        }
        if (units)
            if (const auto it = units->flags.find(id); it != units->flags.end()) row.flags = it->second;
        r.rows.push_back(std::move(row));
    }

    r.agreement_pct = pct(r.matches, r.matches + r.mismatches);
    r.accuracy_pct = 100.0 * r.confusion.accuracy();
    r.precision_pct = 100.0 * r.confusion.precision();
    r.recall_pct = 100.0 * r.confusion.recall();
    r.f1_pct = 100.0 * r.confusion.f1();
    r.cannot_answer_pct = pct(r.excluded, r.total);
    r.answerability_pct = r.total == 0 ? 0.0 : 100.0 - r.cannot_answer_pct;

    if (units) {
        LevelAggregate room, object;
        std::size_t flagged = 0, joint_acc = 0, joint_f1 = 0;
        for (const auto& row : r.rows) {
            if (!row.flags) continue;
            const auto& f = *row.flags;
            ++flagged;
            room.per_query_mean_accuracy += f.accuracy_room;
            room.per_query_mean_f1 += f.f1_room;
            object.per_query_mean_accuracy += f.accuracy_object;
            object.per_query_mean_f1 += f.f1_object;
            joint_acc += joint(f.room_by_accuracy(), f.object_by_accuracy());
            joint_f1 += joint(f.room_by_f1(), f.object_by_f1());
        }
        if (flagged > 0) {
            for (auto* a : {&room, &object}) {
                a->per_query_mean_accuracy = 100.0 * a->per_query_mean_accuracy / static_cast<double>(flagged);
                a->per_query_mean_f1 = 100.0 * a->per_query_mean_f1 / static_cast<double>(flagged);
            }
            room.pooled_accuracy = 100.0 * units->pooled_room.accuracy();
            room.pooled_f1 = 100.0 * units->pooled_room.f1();
            object.pooled_accuracy = 100.0 * units->pooled_object.accuracy();
            object.pooled_f1 = 100.0 * units->pooled_object.f1();
            r.room = room;
            r.object = object;
            r.joint_accuracy_pct = pct(joint_acc, flagged);
            r.joint_f1_pct = pct(joint_f1, flagged);
        }
    }
    return r;
}

json to_json(const EvalReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j = {{"datapoint_id", row.datapoint_id},
                  {"prediction", to_json(row.prediction)},
                  {"ground_truth", to_string(row.ground_truth)},
                  {"match", row.match ? json(*row.match) : json(nullptr)}};
        if (row.flags) j["flags"] = to_json(*row.flags);
        rows.push_back(std::move(j));
    }
    return {{"rows", rows},
            {"counts",
             {{"total", r.total},
              {"matches", r.matches},
              {"mismatches", r.mismatches},
              {"excluded", r.excluded},
              {"predicted_cannot_answer", r.predicted_cannot_answer}}},
            {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}}},
            {"agreement", r.agreement_pct},
            {"accuracy", r.accuracy_pct},
            {"precision", r.precision_pct},
            {"recall", r.recall_pct},
            {"f1", r.f1_pct},
            {"cannot_answer", r.cannot_answer_pct},
            {"answerability", r.answerability_pct},
            {"room", to_json(r.room)},
            {"object", to_json(r.object)},
            {"joint_accuracy", optional_number(r.joint_accuracy_pct)},
            {"joint_f1", optional_number(r.joint_f1_pct)},
            {"config", r.config}};
}

std::string render_table(const EvalReport& r) {
    const auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string("-"); };
    std::string out = fmt::format("{:<16}{:>14}{:>10}\n", "", "Accuracy (%)", "F1 (%)");
    const auto line = [&](std::string_view label, std::optional<double> acc, std::optional<double> f1) {
        out += fmt::format("{:<16}{:>14}{:>10}\n", label, cell(acc), cell(f1));
    };
    const auto level = [&](std::string_view name, const std::optional<LevelAggregate>& a) {
        line(fmt::format("{} (mean)", name), a ? std::optional(a->per_query_mean_accuracy) : std::nullopt,
             a ? std::optional(a->per_query_mean_f1) : std::nullopt);
        line(fmt::format("{} (pooled)", name), a ? std::optional(a->pooled_accuracy) : std::nullopt,
             a ? std::optional(a->pooled_f1) : std::nullopt);
    };
    level("Room", r.room);
    level("Object", r.object);
    line("Joint", r.joint_accuracy_pct, r.joint_f1_pct);
    line("Query", r.accuracy_pct, r.f1_pct);
    out += fmt::format("\nagreement      {:.2f}% ({} of {} Yes/No ground truths)\n", r.agreement_pct, r.matches,
                       r.matches + r.mismatches);
    out += fmt::format("cannot answer  {:.2f}% of ground truths ({} of {})\n", r.cannot_answer_pct, r.excluded, r.total);
    out += fmt::format("answerability  {:.2f}%\n", r.answerability_pct);
    return out;
}

}  // namespace seqa
