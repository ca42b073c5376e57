#include <doctest.h>

#include "seqa/errors.hpp"
#include "seqa/scene_graph.hpp"
#include "test_support.hpp"

using namespace seqa;
using testing::house;

namespace {

json tiny_scene() {
    return json::parse(R"({
      "objects": [
        {"id": "lamp_1", "class": "lamp", "domains": ["OnOff"], "states": ["OFF"], "room": "bedroom"},
        {"id": "desk_1", "class": "desk", "domains": [], "states": [], "room": "bedroom"},
        {"id": "cup_1", "class": "cup", "domains": ["PresentNone"], "states": ["PRESENT"], "room": null}
      ],
      "relationships": [{"subject": "cup_1", "relation": "ON", "target": "desk_1"}],
      "feasibility_denylist": [["desk", "INSIDE", "cup"]]
    })");
}

}  // namespace

TEST_SUITE("scene_graph") {

TEST_CASE("fixture scene loads") {
    const auto& g = house();
    CHECK(g.objects().size() == 32);
    CHECK(g.has_class("lightswitch"));
    CHECK(g.objects_of_class("lightswitch").size() == 2);
    CHECK_FALSE(g.is_feasible("computer", Relation::Inside, "fridge"));
    CHECK(g.is_feasible("apple", Relation::Inside, "fridge"));
}

TEST_CASE("rooms resolve through relationship chains") {
    const auto& g = house();
    CHECK(g.rooms_of("apple_1") == std::set<Room>{Room::Kitchen});
    CHECK(g.rooms_of("toothbrush_1") == std::set<Room>{Room::Bathroom});
    CHECK(g.rooms_of("tv_1") == std::set<Room>{Room::LivingRoom});
}

TEST_CASE("invariant violations name the entity") {
    auto doc = tiny_scene();
    SUBCASE("state outside declared domain") {
        doc["objects"][0]["states"] = {"OPEN"};
        CHECK_THROWS_AS(load_scene(doc), InvariantError);
    }
    SUBCASE("dangling relationship") {
        doc["relationships"][0]["target"] = "shelf_9";
        try {
            load_scene(doc);
            FAIL("expected InvariantError");
        } catch (const InvariantError& e) {
            CHECK(e.entity() == "shelf_9");
        }
    }
    SUBCASE("unplaced object") {
        doc["relationships"] = json::array();
        CHECK_THROWS_AS(load_scene(doc), InvariantError);
        doc["objects"][2]["unplaced"] = true;
        CHECK_NOTHROW(load_scene(doc));
    }
    SUBCASE("denylisted edge in the scene itself") {
        doc["objects"][2]["room"] = "bedroom";
        doc["relationships"] = json::parse(R"([{"subject": "desk_1", "relation": "INSIDE", "target": "cup_1"}])");
        CHECK_THROWS_AS(load_scene(doc), InvariantError);
    }
    SUBCASE("unknown state token is a schema error") {
        doc["objects"][0]["states"] = {"BLUE"};
        CHECK_THROWS_AS(load_scene(doc), SchemaError);
    }
}

TEST_CASE("to_json round trips") {
    const auto& g = house();
    CHECK(load_scene(g.to_json()) == g);
}

TEST_CASE("apply_consensus sets every object of the class") {
    const auto& g = house();
    const std::vector<ConsensusState> states = {{"lightswitch", StateValue::On}};
    const auto applied = apply_consensus(g, states, {});
    for (const auto* o : applied.objects_of_class("lightswitch"))
        CHECK(o->state(StateDomain::OnOff) == StateValue::On);
    // the input is untouched
    CHECK_FALSE(query_state(g, "lightswitch", StateValue::On));
}

TEST_CASE("apply_consensus rejects bad requests") {
    const auto& g = house();
    const std::vector<ConsensusState> wrong_domain = {{"tv", StateValue::Open}};
    CHECK_THROWS_AS(apply_consensus(g, wrong_domain, {}), DomainMismatchError);
    const std::vector<ConsensusState> unknown = {{"piano", StateValue::On}};
    CHECK_THROWS_AS(apply_consensus(g, unknown, {}), UnknownObjectError);
    const std::vector<ConsensusRelation> denied = {{"computer", Relation::Inside, "fridge"}};
    CHECK_THROWS_AS(apply_consensus(g, {}, denied), InfeasibleRelationError);
}

TEST_CASE("absent class reads as NONE") {
    const auto& g = house();
    CHECK(query_state(g, "piano", StateValue::None));
    CHECK_FALSE(query_state(g, "piano", StateValue::Present));
    const std::vector<ConsensusState> none = {{"piano", StateValue::None}};
    CHECK_NOTHROW(apply_consensus(g, none, {}));
}

TEST_CASE("relation_holds for objects and rooms") {
    const auto& g = house();
    CHECK(relation_holds(g, {"computer", Relation::On, "desk"}));
    CHECK_FALSE(relation_holds(g, {"computer", Relation::On, "bed"}));
    CHECK(relation_holds(g, {"tv", Relation::Inside, "livingroom"}));
    CHECK(relation_holds(g, {"tv", Relation::Inside, "living room"}));
    CHECK(relation_holds(g, {"toothbrush", Relation::Inside, "bathroom"}));
    CHECK_FALSE(relation_holds(g, {"tv", Relation::Inside, "kitchen"}));
}

}

TEST_SUITE("scene_graph") {

TEST_CASE("apply_consensus is idempotent and isolated") {
    const auto& g = house();
    const std::vector<ConsensusState> states = {{"fridge", StateValue::Open}, {"towels", StateValue::Present}};
    const std::vector<ConsensusRelation> rels = {{"apple", Relation::On, "kitchentable"}};
    const auto once = apply_consensus(g, states, rels);
    CHECK(apply_consensus(once, states, rels) == once);
    CHECK(query_state(once, "fridge", StateValue::Open));
    CHECK(query_state(once, "towels", StateValue::Present));
    for (const auto& [id, obj] : g.objects()) {
        if (obj.class_name == "fridge" || obj.class_name == "towels") continue;
        CHECK(once.objects().at(id) == obj);
    }
}

}
