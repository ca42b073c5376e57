#include "seqa/scene_graph.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <tuple>

namespace seqa {

StateDomain domain_of(StateValue v) {
    switch (v) {
        case StateValue::On:
        case StateValue::Off:
            return StateDomain::OnOff;
        case StateValue::Open:
        case StateValue::Closed:
            return StateDomain::OpenClosed;
        case StateValue::Present:
        case StateValue::None:
            return StateDomain::PresentNone;
    }
    return StateDomain::OnOff;
}

std::pair<StateValue, StateValue> values_of(StateDomain d) {
    switch (d) {
        case StateDomain::OnOff:
            return {StateValue::On, StateValue::Off};
        case StateDomain::OpenClosed:
            return {StateValue::Open, StateValue::Closed};
        case StateDomain::PresentNone:
            return {StateValue::Present, StateValue::None};
    }
    return {StateValue::On, StateValue::Off};
}

StateValue opposite(StateValue v) {
    const auto [a, b] = values_of(domain_of(v));
    return v == a ? b : a;
}

std::string_view to_string(StateValue v) {
    switch (v) {
        case StateValue::On: return "ON";
        case StateValue::Off: return "OFF";
        case StateValue::Open: return "OPEN";
        case StateValue::Closed: return "CLOSED";
        case StateValue::Present: return "PRESENT";
        case StateValue::None: return "NONE";
    }
    return "?";
}

std::optional<StateValue> parse_state(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "on") return StateValue::On;
    if (t == "off") return StateValue::Off;
    if (t == "open") return StateValue::Open;
    if (t == "closed") return StateValue::Closed;
    if (t == "present") return StateValue::Present;
    if (t == "none" || t == "absent") return StateValue::None;
    return std::nullopt;
}

std::string_view to_string(StateDomain d) {
    switch (d) {
        case StateDomain::OnOff: return "OnOff";
        case StateDomain::OpenClosed: return "OpenClosed";
        case StateDomain::PresentNone: return "PresentNone";
    }
    return "?";
}

std::optional<StateDomain> parse_domain(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "onoff") return StateDomain::OnOff;
    if (t == "openclosed") return StateDomain::OpenClosed;
    if (t == "presentnone") return StateDomain::PresentNone;
    return std::nullopt;
}

std::string_view to_string(Room r) {
    switch (r) {
        case Room::Kitchen: return "kitchen";
        case Room::LivingRoom: return "livingroom";
        case Room::Bedroom: return "bedroom";
        case Room::Bathroom: return "bathroom";
    }
    return "?";
}

std::optional<Room> parse_room(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "kitchen") return Room::Kitchen;
    if (t == "livingroom" || t == "living room" || t == "living_room") return Room::LivingRoom;
    if (t == "bedroom") return Room::Bedroom;
    if (t == "bathroom") return Room::Bathroom;
    return std::nullopt;
}

std::string_view to_string(Relation r) { return r == Relation::Inside ? "INSIDE" : "ON"; }

std::optional<Relation> parse_relation(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "inside") return Relation::Inside;
    if (t == "on") return Relation::On;
    return std::nullopt;
}

std::optional<StateValue> ObjectNode::state(StateDomain d) const {
    const auto it = states.find(d);
    if (it == states.end()) return std::nullopt;
    return it->second;
}

namespace {

bool is_canonical_room(std::string_view s) {
    const auto r = parse_room(s);
    return r && to_string(*r) == s;
}

bool valid_class_token(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return !std::isspace(c) && !std::isupper(c) && std::isprint(c);
    });
}

}  // namespace

SceneGraph::SceneGraph(std::vector<ObjectNode> objects, std::vector<Relationship> relationships,
                       std::vector<FeasibilityRule> rules) {
    for (auto& obj : objects) {
        if (obj.id.empty()) throw InvariantError("", "object with empty id");
        if (is_canonical_room(obj.id) || parse_room(obj.id))
            throw InvariantError(obj.id, fmt::format("object id '{}' collides with a room name", obj.id));
        const auto id = obj.id;
        if (!objects_.emplace(id, std::move(obj)).second)
            throw InvariantError(id, fmt::format("duplicate object id '{}'", id));
    }
    for (auto& rel : relationships) {
        if (auto room = parse_room(rel.target); room && !objects_.contains(rel.target))
            rel.target = std::string(to_string(*room));
        relationships_.insert(std::move(rel));
    }
    rules_.insert(rules.begin(), rules.end());
    validate();
}

void SceneGraph::validate() const {
    for (const auto& [id, obj] : objects_) {
        if (!valid_class_token(obj.class_name))
            throw InvariantError(id, fmt::format("object '{}' has invalid class name '{}'", id, obj.class_name));
    }
    for (const auto& rel : relationships_) {
        if (!objects_.contains(rel.subject))
            throw InvariantError(rel.subject, fmt::format("relationship subject '{}' does not exist", rel.subject));
        if (!objects_.contains(rel.target) && !is_canonical_room(rel.target))
            throw InvariantError(rel.target, fmt::format("relationship target '{}' does not exist", rel.target));
        if (rel.subject == rel.target)
            throw InvariantError(rel.subject, fmt::format("self relationship on '{}'", rel.subject));
        const auto& subject_class = objects_.at(rel.subject).class_name;
        const auto tclass = target_class(rel.target);
        if (!is_feasible(subject_class, rel.relation, tclass))
            throw InvariantError(rel.subject, fmt::format("forbidden relation ({}, {}, {})", subject_class,
                                                          to_string(rel.relation), tclass));
    }
    for (const auto& [id, obj] : objects_) {
        if (!obj.room && !obj.unplaced && rooms_of(id).empty())
            throw InvariantError(id, fmt::format("object '{}' is not placed in any room", id));
    }
}

std::string SceneGraph::target_class(const std::string& target) const {
    if (const auto it = objects_.find(target); it != objects_.end()) return it->second.class_name;
    return target;
}

std::set<std::string> SceneGraph::vocabulary() const {
    std::set<std::string> out;
    for (const auto& [id, obj] : objects_) out.insert(obj.class_name);
    return out;
}

bool SceneGraph::has_class(std::string_view class_name) const {
    return std::any_of(objects_.begin(), objects_.end(),
                       [&](const auto& kv) { return kv.second.class_name == class_name; });
}

std::vector<const ObjectNode*> SceneGraph::objects_of_class(std::string_view class_name) const {
    std::vector<const ObjectNode*> out;
    for (const auto& [id, obj] : objects_)
        if (obj.class_name == class_name) out.push_back(&obj);
    return out;
}

const ObjectNode* SceneGraph::find(std::string_view id) const {
    const auto it = objects_.find(std::string(id));
    return it == objects_.end() ? nullptr : &it->second;
}

bool SceneGraph::is_feasible(std::string_view subject_class, Relation rel, std::string_view target_class) const {
    return !rules_.contains(FeasibilityRule{std::string(subject_class), rel, std::string(target_class)});
}

std::set<Room> SceneGraph::rooms_of(std::string_view object_id) const {
    std::set<Room> rooms;
    std::set<std::string> visited;
    std::vector<std::string> stack{std::string(object_id)};
    while (!stack.empty()) {
        auto id = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert(id).second) continue;
        const auto* obj = find(id);
        if (!obj) continue;
        if (obj->room) {
            rooms.insert(*obj->room);
            continue;
        }
        for (const auto& rel : relationships_) {
            if (rel.subject != id) continue;
            if (auto room = parse_room(rel.target); room && !objects_.contains(rel.target))
                rooms.insert(*room);
            else
                stack.push_back(rel.target);
        }
    }
    return rooms;
}

json SceneGraph::to_json() const {
    json objects = json::array();
    for (const auto& [id, obj] : objects_) {
        json domains = json::array();
        json states = json::array();
        for (const auto& [d, v] : obj.states) {
            domains.push_back(to_string(d));
            states.push_back(to_string(v));
        }
        json o = {{"id", id},
                  {"class", obj.class_name},
                  {"domains", domains},
                  {"states", states},
                  {"room", obj.room ? json(to_string(*obj.room)) : json(nullptr)}};
        if (obj.unplaced) o["unplaced"] = true;
        objects.push_back(std::move(o));
    }
    json rels = json::array();
    for (const auto& r : relationships_)
        rels.push_back({{"subject", r.subject}, {"relation", to_string(r.relation)}, {"target", r.target}});
    json doc = {{"objects", objects}, {"relationships", rels}};
    if (!rules_.empty()) {
        json deny = json::array();
        for (const auto& r : rules_)
            deny.push_back(
                {{"subject", r.subject_class}, {"relation", to_string(r.relation)}, {"target", r.target_class}});
        doc["feasibility_denylist"] = deny;
    }
    return doc;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(where, fmt::format("{}: missing key '{}'", where, key));
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) throw SchemaError(where, fmt::format("{}: '{}' must be a string", where, key));
    return v.get<std::string>();
}

Relation require_relation(const std::string& s, const std::string& where) {
    const auto r = parse_relation(s);
    if (!r) throw SchemaError(where, fmt::format("{}: unknown relation '{}'", where, s));
    return *r;
}

/// Triples may be written as {subject, relation, target} or [s, r, t].
std::tuple<std::string, std::string, std::string> read_triple(const json& j, const std::string& where) {
    if (j.is_array()) {
        if (j.size() != 3 || !j[0].is_string() || !j[1].is_string() || !j[2].is_string())
            throw SchemaError(where, fmt::format("{}: expected [subject, relation, target]", where));
        return {j[0].get<std::string>(), j[1].get<std::string>(), j[2].get<std::string>()};
    }
    return {require_string(j, "subject", where), require_string(j, "relation", where),
            require_string(j, "target", where)};
}

}  // namespace

SceneGraph load_scene(const json& doc) {
    if (!doc.is_object()) throw SchemaError("scene", "scene document must be a JSON object");
    const auto& objs = require(doc, "objects", "scene");
    const auto& rels = require(doc, "relationships", "scene");
    if (!objs.is_array()) throw SchemaError("objects", "'objects' must be an array");
    if (!rels.is_array()) throw SchemaError("relationships", "'relationships' must be an array");

    std::vector<ObjectNode> objects;
    for (std::size_t i = 0; i < objs.size(); ++i) {
        const auto& o = objs[i];
        auto where = fmt::format("objects[{}]", i);
        ObjectNode node;
        node.id = require_string(o, "id", where);
        where = fmt::format("object '{}'", node.id);
        node.class_name = require_string(o, "class", where);
        const auto& domains = require(o, "domains", where);
        const auto& states = require(o, "states", where);
        if (!domains.is_array() || !states.is_array())
            throw SchemaError(node.id, fmt::format("{}: 'domains' and 'states' must be arrays", where));
        std::set<StateDomain> declared;
        for (const auto& d : domains) {
            const auto parsed = d.is_string() ? parse_domain(d.get<std::string>()) : std::nullopt;
            if (!parsed) throw SchemaError(node.id, fmt::format("{}: unknown domain {}", where, d.dump()));
            if (!declared.insert(*parsed).second)
                throw InvariantError(node.id, fmt::format("{}: domain {} declared twice", where, d.dump()));
        }
        for (const auto& s : states) {
            const auto parsed = s.is_string() ? parse_state(s.get<std::string>()) : std::nullopt;
            if (!parsed) throw SchemaError(node.id, fmt::format("{}: unknown state {}", where, s.dump()));
            const auto d = domain_of(*parsed);
            if (!declared.contains(d))
                throw InvariantError(node.id, fmt::format("{}: state {} outside declared domains", where,
                                                          to_string(*parsed)));
            if (!node.states.emplace(d, *parsed).second)
                throw InvariantError(node.id, fmt::format("{}: two states for domain {}", where, to_string(d)));
        }
        for (const auto d : declared)
            if (!node.states.contains(d))
                throw InvariantError(node.id, fmt::format("{}: no state for domain {}", where, to_string(d)));
        const auto& room = require(o, "room", where);
        if (room.is_string()) {
            node.room = parse_room(room.get<std::string>());
            if (!node.room) throw SchemaError(node.id, fmt::format("{}: unknown room {}", where, room.dump()));
        } else if (!room.is_null()) {
            throw SchemaError(node.id, fmt::format("{}: 'room' must be a string or null", where));
        }
        if (o.contains("unplaced")) {
            if (!o["unplaced"].is_boolean())
                throw SchemaError(node.id, fmt::format("{}: 'unplaced' must be a boolean", where));
            node.unplaced = o["unplaced"].get<bool>();
        }
        objects.push_back(std::move(node));
    }

    std::vector<Relationship> relationships;
    for (std::size_t i = 0; i < rels.size(); ++i) {
        const auto where = fmt::format("relationships[{}]", i);
        auto [s, r, t] = read_triple(rels[i], where);
        relationships.push_back({std::move(s), require_relation(r, where), std::move(t)});
    }

    std::vector<FeasibilityRule> rules;
    if (doc.contains("feasibility_denylist")) {
        const auto& deny = doc["feasibility_denylist"];
        if (!deny.is_array()) throw SchemaError("feasibility_denylist", "'feasibility_denylist' must be an array");
        for (std::size_t i = 0; i < deny.size(); ++i) {
            const auto where = fmt::format("feasibility_denylist[{}]", i);
            auto [s, r, t] = read_triple(deny[i], where);
            if (auto room = parse_room(t)) t = std::string(to_string(*room));
            rules.push_back({std::move(s), require_relation(r, where), std::move(t)});
        }
    }
    return SceneGraph(std::move(objects), std::move(relationships), std::move(rules));
}

SceneGraph load_scene_file(const std::filesystem::path& path) {
    const auto content = read_text_file(path);
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string(), e.what());
    }
    return load_scene(doc);
}

SceneGraph apply_consensus(const SceneGraph& graph, std::span<const ConsensusState> states,
                           std::span<const ConsensusRelation> relations) {
    std::vector<ObjectNode> objects;
    objects.reserve(graph.objects().size());
    for (const auto& [id, obj] : graph.objects()) objects.push_back(obj);
    std::vector<Relationship> rels(graph.relationships().begin(), graph.relationships().end());
    std::vector<FeasibilityRule> rules(graph.feasibility_rules().begin(), graph.feasibility_rules().end());

    for (const auto& st : states) {
        const auto domain = domain_of(st.value);
        bool matched = false;
        for (auto& obj : objects) {
            if (obj.class_name != st.class_name) continue;
            matched = true;
            if (!obj.has_domain(domain))
                throw DomainMismatchError(st.class_name, fmt::format("'{}' has no {} domain (requested {})",
                                                                     st.class_name, to_string(domain),
                                                                     to_string(st.value)));
            obj.states[domain] = st.value;
        }
        // An absent PresentNone object already reads as NONE.
        if (!matched && st.value != StateValue::None)
            throw UnknownObjectError(st.class_name, fmt::format("no object of class '{}'", st.class_name));
    }

    for (const auto& cr : relations) {
        const auto subjects = graph.objects_of_class(cr.subject);
        if (subjects.empty())
            throw UnknownObjectError(cr.subject, fmt::format("no object of class '{}'", cr.subject));
        std::string target;
        std::string target_class;
        if (const auto room = parse_room(cr.target); room && !graph.has_class(cr.target)) {
            target = std::string(to_string(*room));
            target_class = target;
        } else {
            const auto targets = graph.objects_of_class(cr.target);
            if (targets.empty())
                throw UnknownObjectError(cr.target, fmt::format("no object of class '{}'", cr.target));
            target = targets.front()->id;
            target_class = cr.target;
        }
        if (!graph.is_feasible(cr.subject, cr.relation, target_class))
            throw InfeasibleRelationError(cr.subject, fmt::format("({}, {}, {}) is not a feasible relation",
                                                                  cr.subject, to_string(cr.relation), target_class));
        for (const auto* subject : subjects) {
            if (subject->id == target)
                throw InfeasibleRelationError(cr.subject, fmt::format("'{}' cannot relate to itself", cr.subject));
            rels.push_back({subject->id, cr.relation, target});
        }
    }
    return SceneGraph(std::move(objects), std::move(rels), std::move(rules));
}

bool query_state(const SceneGraph& graph, std::string_view class_name, StateValue expected) {
    const auto domain = domain_of(expected);
    const auto objects = graph.objects_of_class(class_name);
    if (objects.empty()) return expected == StateValue::None;
    return std::any_of(objects.begin(), objects.end(),
                       [&](const ObjectNode* o) { return o->state(domain) == expected; });
}

bool relation_holds(const SceneGraph& graph, const ConsensusRelation& cr) {
    const auto subjects = graph.objects_of_class(cr.subject);
    const auto room = graph.has_class(cr.target) ? std::nullopt : parse_room(cr.target);
    for (const auto* s : subjects) {
        if (room) {
            if (graph.relationships().contains(Relationship{s->id, cr.relation, std::string(to_string(*room))}))
                return true;
            if (cr.relation == Relation::Inside && graph.rooms_of(s->id).contains(*room)) return true;
            continue;
        }
        for (const auto* t : graph.objects_of_class(cr.target))
            if (graph.relationships().contains(Relationship{s->id, cr.relation, t->id})) return true;
    }
    return false;
}

}  // namespace seqa
