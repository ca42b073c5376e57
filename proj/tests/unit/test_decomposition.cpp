#include <doctest.h>

#include "seqa/decomposition.hpp"
#include "seqa/errors.hpp"
#include "test_support.hpp"

using namespace seqa;

namespace {

const std::vector<SituationalDatapoint>& fixtures() {
    static const auto dps = read_datapoints(testing::fixture("datapoints.jsonl"));
    return dps;
}

bool to_lower_copy_has_no_room(const std::string& q) {
    const auto lower = text::to_lower(q);
    for (const auto* room : {"living room", "livingroom", "kitchen ", "kitchen?", "bedroom", "bathroom"})
        if (lower.find(room) != std::string::npos) return false;
    return true;
}

}  // namespace

TEST_SUITE("decomposition") {

TEST_CASE("one consensus query per state") {
    const auto& d = fixtures()[2];
    REQUIRE(d.query == "Was someone working in the bedroom?");
    const auto qs = decompose(d);
    REQUIRE(qs.size() == 2);
    CHECK(qs[0].text == "Is the computer On?");
    CHECK(qs[1].text == "Is the lightswitch On?");
    CHECK(qs[0].parent_id == "q00003");
    CHECK(qs[1].expected == StateValue::On);
}

TEST_CASE("surface forms") {
    CHECK(surface_form(StateValue::None) == "Absent");
    CHECK(surface_form(StateValue::Closed) == "Closed");
    SituationalDatapoint d;
    d.states = {{"towels", StateValue::None}, {"fridge", StateValue::Open}};
    const auto qs = decompose(d);
    CHECK(qs[0].text == "Is the towels Absent?");
    CHECK(qs[1].text == "Is the fridge Open?");
}

TEST_CASE("room mentions become this place") {
    CHECK(genericize_room("Is the living room prepared for a movie night?") ==
          "Is this place prepared for a movie night?");
    CHECK(genericize_room("Is the kitchen ready for cooking?") == "Is this place ready for cooking?");
    CHECK(genericize_room("Kitchen clean?") == "This place clean?");
    CHECK(genericize_room("Is the livingroom or the BEDROOM warm?") == "Is this place or this place warm?");
    CHECK(genericize_room("Is my living_room tidy?") == "Is this place tidy?");
    CHECK(genericize_room("Was someone sleeping?") == "Was someone sleeping?");
    // class tokens that merely start with a room name are left alone
    CHECK(genericize_room("Is the kitchentable set?") == "Is the kitchentable set?");
    CHECK(genericize_room("Is the bathroomcabinet shut?") == "Is the bathroomcabinet shut?");
}

TEST_CASE("genericize is idempotent over the fixtures") {
    for (const auto& d : fixtures()) {
        const auto once = genericize_room(d.query);
        CAPTURE(d.query);
        CHECK(genericize_room(once) == once);
        CHECK(to_lower_copy_has_no_room(once));
    }
}

TEST_CASE("jsonl round trip") {
    testing::TempDir dir;
    std::vector<ConsensusQuery> all;
    for (const auto& d : fixtures())
        for (auto& q : decompose(d)) all.push_back(std::move(q));
    write_consensus_queries(dir / "c.jsonl", all);
    CHECK(read_consensus_queries(dir / "c.jsonl") == all);
    CHECK(to_json(all[0]) == json::parse(R"({"parent_id":"q00001","class":"lightswitch","state":"ON","text":"Is the lightswitch On?"})"));
    write_text_file(dir / "bad.jsonl", R"({"parent_id":"a","class":"tv"})");
    CHECK_THROWS_AS(read_consensus_queries(dir / "bad.jsonl"), SchemaError);
}

}
