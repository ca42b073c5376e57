#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqa/text.hpp"

namespace seqa {

enum class StateDomain { OnOff, OpenClosed, PresentNone };
enum class StateValue { On, Off, Open, Closed, Present, None };
enum class Room { Kitchen, LivingRoom, Bedroom, Bathroom };
enum class Relation { Inside, On };

inline constexpr Room kAllRooms[] = {Room::Kitchen, Room::LivingRoom, Room::Bedroom, Room::Bathroom};

StateDomain domain_of(StateValue v);
std::pair<StateValue, StateValue> values_of(StateDomain d);
StateValue opposite(StateValue v);

/// "ON", "OFF", "OPEN", "CLOSED", "PRESENT", "NONE".
std::string_view to_string(StateValue v);
/// Case-insensitive; also accepts "absent" for NONE.
std::optional<StateValue> parse_state(std::string_view s);

std::string_view to_string(StateDomain d);
std::optional<StateDomain> parse_domain(std::string_view s);

/// Canonical room tokens: kitchen, livingroom, bedroom, bathroom.
std::string_view to_string(Room r);
/// Accepts canonical tokens case-insensitively plus "living room" / "living_room".
std::optional<Room> parse_room(std::string_view s);

std::string_view to_string(Relation r);
std::optional<Relation> parse_relation(std::string_view s);

struct ObjectNode {
    std::string id;
    std::string class_name;
    /// Keys are exactly the declared domains.
    std::map<StateDomain, StateValue> states;
    std::optional<Room> room;
    bool unplaced = false;

    bool has_domain(StateDomain d) const { return states.contains(d); }
    std::optional<StateValue> state(StateDomain d) const;

    auto operator<=>(const ObjectNode&) const = default;
};

/// Scene-level edge. `target` is an object id or a canonical room token.
struct Relationship {
    std::string subject;
    Relation relation = Relation::Inside;
    std::string target;

    auto operator<=>(const Relationship&) const = default;
};

/// Forbidden (subject class, relation, target class-or-room) triple.
struct FeasibilityRule {
    std::string subject_class;
    Relation relation = Relation::Inside;
    std::string target_class;

    auto operator<=>(const FeasibilityRule&) const = default;
};

/// A requested object state, addressed by class.
struct ConsensusState {
    std::string class_name;
    StateValue value = StateValue::On;

    auto operator<=>(const ConsensusState&) const = default;
};

/// A requested relation, addressed by class (target may also be a room).
struct ConsensusRelation {
    std::string subject;
    Relation relation = Relation::Inside;
    std::string target;

    auto operator<=>(const ConsensusRelation&) const = default;
};

/// Immutable household world model. Every constructor path validates the
/// invariants and throws InvariantError naming the offending entity.
class SceneGraph {
public:
    SceneGraph(std::vector<ObjectNode> objects, std::vector<Relationship> relationships,
               std::vector<FeasibilityRule> rules);

    const std::map<std::string, ObjectNode>& objects() const { return objects_; }
    const std::set<Relationship>& relationships() const { return relationships_; }
    const std::set<FeasibilityRule>& feasibility_rules() const { return rules_; }

    /// Distinct class names, sorted.
    std::set<std::string> vocabulary() const;
    bool has_class(std::string_view class_name) const;
    /// Objects of a class in id order.
    std::vector<const ObjectNode*> objects_of_class(std::string_view class_name) const;
    const ObjectNode* find(std::string_view id) const;

    bool is_feasible(std::string_view subject_class, Relation rel, std::string_view target_class) const;

    /// Rooms an object resolves to: its own room, else every room reachable
    /// through outgoing relationship chains.
    std::set<Room> rooms_of(std::string_view object_id) const;

    json to_json() const;

    bool operator==(const SceneGraph& other) const = default;

private:
    void validate() const;
    /// Class name for an object id, or the room token itself.
    std::string target_class(const std::string& target) const;

    std::map<std::string, ObjectNode> objects_;
    std::set<Relationship> relationships_;
    std::set<FeasibilityRule> rules_;
};

/// Parses and validates a scene document (SchemaError / InvariantError).
SceneGraph load_scene(const json& document);
SceneGraph load_scene_file(const std::filesystem::path& path);

/// Returns a copy with the requested states and relations applied. States
/// apply to every object of the class; a relation links every subject-class
/// object to the lowest-id target-class object (or the room).
SceneGraph apply_consensus(const SceneGraph& graph, std::span<const ConsensusState> states,
                           std::span<const ConsensusRelation> relations);

/// Existential: some object of the class holds `expected`. An absent class
/// reads as NONE.
bool query_state(const SceneGraph& graph, std::string_view class_name, StateValue expected);

/// True when some subject-class object carries the relation. A room target
/// with INSIDE is also satisfied by room resolution.
bool relation_holds(const SceneGraph& graph, const ConsensusRelation& relation);

}  // namespace seqa
