#include "seqa/datapoint.hpp"

#include "seqa/classifier.hpp"
#include "seqa/errors.hpp"

#include <fmt/format.h>

namespace seqa {

std::string_view to_string(RoomCategory c) {
    switch (c) {
        case RoomCategory::Kitchen: return "kitchen";
        case RoomCategory::LivingRoom: return "livingroom";
        case RoomCategory::Bedroom: return "bedroom";
        case RoomCategory::Bathroom: return "bathroom";
        case RoomCategory::MultiRoom: return "multi-room";
        case RoomCategory::NoRoom: return "no-room";
    }
    return "?";
}

std::optional<RoomCategory> parse_room_category(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "multi-room" || t == "multiroom" || t == "multi room") return RoomCategory::MultiRoom;
    if (t == "no-room" || t == "noroom" || t == "no room") return RoomCategory::NoRoom;
    if (const auto r = parse_room(t)) {
        switch (*r) {
            case Room::Kitchen: return RoomCategory::Kitchen;
            case Room::LivingRoom: return RoomCategory::LivingRoom;
            case Room::Bedroom: return RoomCategory::Bedroom;
            case Room::Bathroom: return RoomCategory::Bathroom;
        }
    }
    return std::nullopt;
}

std::string_view to_string(SituationalLabel l) {
    switch (l) {
        case SituationalLabel::Yes: return "yes";
        case SituationalLabel::No: return "no";
        case SituationalLabel::Deferred: return "deferred";
    }
    return "?";
}

std::optional<SituationalLabel> parse_situational_label(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "yes") return SituationalLabel::Yes;
    if (t == "no") return SituationalLabel::No;
    if (t == "deferred") return SituationalLabel::Deferred;
    return std::nullopt;
}

std::string_view to_string(TemporalLabel l) {
    switch (l) {
        case TemporalLabel::Spatial: return "spatial";
        case TemporalLabel::Temporal: return "temporal";
        case TemporalLabel::Deferred: return "deferred";
    }
    return "?";
}

std::optional<TemporalLabel> parse_temporal_label(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "spatial") return TemporalLabel::Spatial;
    if (t == "temporal") return TemporalLabel::Temporal;
    if (t == "deferred") return TemporalLabel::Deferred;
    return std::nullopt;
}

std::string_view to_string(Contextual c) {
    switch (c) {
        case Contextual::Pass: return "pass";
        case Contextual::Fail: return "fail";
        case Contextual::Deferred: return "deferred";
    }
    return "?";
}

json to_json(const SituationalDatapoint& d) {
    json states = json::array();
    for (const auto& s : d.states) states.push_back({s.class_name, to_string(s.value)});
    json relations = json::array();
    for (const auto& r : d.relations) relations.push_back({r.subject, to_string(r.relation), r.target});
    json prov = {{"batch_index", d.provenance.batch_index},
                 {"iteration", d.provenance.iteration},
                 {"model_id", d.provenance.model_id},
                 {"regeneration_count", d.provenance.regeneration_count},
                 {"temperature", d.provenance.temperature},
                 {"seed", d.provenance.seed}};
    json labels = nullptr;
    if (d.labels) {
        labels = {{"room", to_string(d.labels->room)},
                  {"situational", to_string(d.labels->situational)},
                  {"temporal", to_string(d.labels->temporal)}};
    }
    return {{"id", d.id}, {"query", d.query}, {"states", states}, {"relations", relations},
            {"provenance", prov}, {"labels", labels}};
}

namespace {

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    try {
        return obj[key].get<T>();
    } catch (const json::exception&) {
        throw SchemaError(where, fmt::format("{}: field '{}' has the wrong type", where, key));
    }
}

}  // namespace

SituationalDatapoint datapoint_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("datapoint", "datapoint record must be an object");
    SituationalDatapoint d;
    if (!j.contains("id") || !j["id"].is_string()) throw SchemaError("datapoint", "datapoint missing string 'id'");
    d.id = j["id"].get<std::string>();
    const auto where = fmt::format("datapoint '{}'", d.id);
    if (!j.contains("query") || !j["query"].is_string()) throw SchemaError(d.id, where + ": missing string 'query'");
    d.query = j["query"].get<std::string>();

    if (!j.contains("states") || !j["states"].is_array()) throw SchemaError(d.id, where + ": 'states' must be an array");
    for (const auto& s : j["states"]) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_string() || !s[1].is_string())
            throw SchemaError(d.id, where + ": states entries must be [class, state]");
        const auto value = parse_state(s[1].get<std::string>());
        if (!value) throw SchemaError(d.id, fmt::format("{}: unknown state '{}'", where, s[1].get<std::string>()));
        d.states.push_back({s[0].get<std::string>(), *value});
    }
    if (j.contains("relations") && !j["relations"].is_null()) {
        if (!j["relations"].is_array()) throw SchemaError(d.id, where + ": 'relations' must be an array");
        for (const auto& r : j["relations"]) {
            if (!r.is_array() || r.size() != 3 || !r[0].is_string() || !r[1].is_string() || !r[2].is_string())
                throw SchemaError(d.id, where + ": relations entries must be [subject, relation, target]");
            const auto rel = parse_relation(r[1].get<std::string>());
            if (!rel) throw SchemaError(d.id, fmt::format("{}: unknown relation '{}'", where, r[1].get<std::string>()));
            d.relations.push_back({r[0].get<std::string>(), *rel, r[2].get<std::string>()});
        }
    }
    if (j.contains("provenance") && j["provenance"].is_object()) {
        const auto& p = j["provenance"];
        d.provenance.batch_index = get_or<std::int64_t>(p, "batch_index", 0, where);
        d.provenance.iteration = get_or<std::int64_t>(p, "iteration", 0, where);
        d.provenance.model_id = get_or<std::string>(p, "model_id", "", where);
        d.provenance.regeneration_count = get_or<std::int64_t>(p, "regeneration_count", 0, where);
        d.provenance.temperature = get_or<double>(p, "temperature", 0.0, where);
        d.provenance.seed = get_or<std::int64_t>(p, "seed", 0, where);
    }
    if (j.contains("labels") && j["labels"].is_object()) {
        const auto& l = j["labels"];
        CategoryLabels labels;
        const auto room = parse_room_category(get_or<std::string>(l, "room", "no-room", where));
        const auto sit = parse_situational_label(get_or<std::string>(l, "situational", "deferred", where));
        const auto tmp = parse_temporal_label(get_or<std::string>(l, "temporal", "deferred", where));
        if (!room || !sit || !tmp) throw SchemaError(d.id, where + ": unrecognized label value");
        labels.room = *room;
        labels.situational = *sit;
        labels.temporal = *tmp;
        d.labels = labels;
    }
    return d;
}

std::vector<SituationalDatapoint> read_datapoints(const std::filesystem::path& path) {
    std::vector<SituationalDatapoint> out;
    std::set<std::string> seen;
    for (const auto& row : jsonl::read_file(path)) {
        auto d = datapoint_from_json(row);
        if (!seen.insert(d.id).second) throw DuplicateIdError(d.id, fmt::format("duplicate datapoint id '{}'", d.id));
        out.push_back(std::move(d));
    }
    return out;
}

void write_datapoints(const std::filesystem::path& path, const std::vector<SituationalDatapoint>& datapoints) {
    std::vector<json> rows;
    rows.reserve(datapoints.size());
    for (const auto& d : datapoints) rows.push_back(to_json(d));
    jsonl::write_file(path, rows);
}

Blocklist::Blocklist(std::set<std::string> words) {
    for (const auto& w : words) words_.insert(text::to_lower(w));
    words_.insert("object");
}

Blocklist Blocklist::from_scene(const SceneGraph& scene, const std::vector<std::string>& synonyms) {
    auto words = scene.vocabulary();
    words.insert(synonyms.begin(), synonyms.end());
    return Blocklist(std::move(words));
}

std::optional<std::string> Blocklist::match(std::string_view token) const {
    const auto t = text::to_lower(token);
    if (words_.contains(t)) return t;
    if (t.size() > 1 && t.ends_with('s')) {
        if (auto stem = t.substr(0, t.size() - 1); words_.contains(stem)) return stem;
    }
    if (t.size() > 2 && t.ends_with("es")) {
        if (auto stem = t.substr(0, t.size() - 2); words_.contains(stem)) return stem;
    }
    return std::nullopt;
}

bool check_abstraction(std::string_view query, const Blocklist& blocklist) {
    for (const auto& tok : text::word_tokens(query))
        if (blocklist.match(tok)) return false;
    return true;
}

bool check_binary(std::string_view query, const std::set<std::string>& auxiliaries) {
    const auto q = text::trim(query);
    if (q.empty() || q.back() != '?') return false;
    const auto tokens = text::word_tokens(q);
    return !tokens.empty() && auxiliaries.contains(tokens.front());
}

Contextual check_contextual(std::string_view query, Classifier* classifier) {
    if (classifier == nullptr) return Contextual::Deferred;
    return classifier->is_situational(query) ? Contextual::Pass : Contextual::Fail;
}

ValidityVerdict validate(const SituationalDatapoint& d, const SceneGraph& scene, const Blocklist& blocklist,
                         Classifier* classifier, const std::set<std::string>& auxiliaries) {
    ValidityVerdict v;

    v.abstraction_ok = true;
    for (const auto& tok : text::word_tokens(d.query)) {
        if (const auto hit = blocklist.match(tok)) {
            v.abstraction_ok = false;
            v.reasons.push_back(fmt::format("abstraction: query references '{}'", *hit));
        }
    }

    v.binary_ok = check_binary(d.query, auxiliaries);
    if (!v.binary_ok) v.reasons.emplace_back("binary: query is not a yes/no question ending in '?'");

    try {
        v.contextual = check_contextual(d.query, classifier);
    } catch (const ProviderError& e) {
        throw ProviderError(d.id, fmt::format("datapoint '{}': {}", d.id, e.what()));
    }
    if (v.contextual == Contextual::Fail) v.reasons.emplace_back("contextual: classifier judged the query not situational");

    v.structure_ok = true;
    const auto fail = [&](std::string reason) {
        v.structure_ok = false;
        v.reasons.push_back(std::move(reason));
    };
    if (text::trim(d.query).empty()) fail("empty query");
    if (d.states.empty()) fail("no consensus states");
    for (const auto& s : d.states) {
        if (s.class_name != text::to_lower(s.class_name) || s.class_name.empty()) {
            fail(fmt::format("class '{}' is not a lowercase vocabulary token", s.class_name));
            continue;
        }
        const auto objects = scene.objects_of_class(s.class_name);
        if (objects.empty()) {
            if (s.value != StateValue::None) fail(fmt::format("unknown class {}", s.class_name));
            continue;
        }
        const auto domain = domain_of(s.value);
        const bool has = std::any_of(objects.begin(), objects.end(), [&](const ObjectNode* o) { return o->has_domain(domain); });
        if (!has) fail(fmt::format("domain mismatch: {} cannot be {}", s.class_name, to_string(s.value)));
    }
    for (const auto& r : d.relations) {
        const bool subject_known = scene.has_class(r.subject);
        const bool target_room = parse_room(r.target).has_value() && !scene.has_class(r.target);
        const bool target_known = target_room || scene.has_class(r.target);
        if (!subject_known) fail(fmt::format("unknown class {}", r.subject));
        if (!target_known) fail(fmt::format("unknown class {}", r.target));
        if (!subject_known || !target_known) continue;
        const auto tclass = target_room ? std::string(to_string(*parse_room(r.target))) : r.target;
        if (r.subject == r.target) fail(fmt::format("self relation on {}", r.subject));
        else if (!scene.is_feasible(r.subject, r.relation, tclass))
            fail(fmt::format("infeasible relation {} {} {}", r.subject, to_string(r.relation), tclass));
    }
    return v;
}

json to_json(const ValidityVerdict& v, std::string_view id) {
    return {{"id", id},
            {"accept", v.accepted()},
            {"abstraction_ok", v.abstraction_ok},
            {"binary_ok", v.binary_ok},
            {"contextual", to_string(v.contextual)},
            {"structure_ok", v.structure_ok},
            {"reasons", v.reasons}};
}

}  // namespace seqa
