#include <doctest.h>

#include "seqa/classifier.hpp"
#include "seqa/datapoint.hpp"
#include "seqa/errors.hpp"
#include "test_support.hpp"

using namespace seqa;
using testing::house;

namespace {

SituationalDatapoint dp(std::string query, std::vector<ConsensusState> states,
                        std::vector<ConsensusRelation> relations = {}) {
    SituationalDatapoint d;
    d.id = "t1";
    d.query = std::move(query);
    d.states = std::move(states);
    d.relations = std::move(relations);
    return d;
}

const Blocklist& blocklist() {
    static const Blocklist b = Blocklist::from_scene(house(), {"table", "chair"});
    return b;
}

}  // namespace

TEST_SUITE("datapoint") {

TEST_CASE("blocklist holds vocabulary, synonyms and 'object'") {
    const auto& b = blocklist();
    CHECK(b.contains("sofa"));
    CHECK(b.contains("object"));
    CHECK(b.contains("table"));
    CHECK_FALSE(b.contains("kitchen"));
    CHECK(b.match("towels") == std::optional<std::string>("towels"));
    CHECK(b.match("Sofas") == std::optional<std::string>("sofa"));
    CHECK(b.match("dinner") == std::nullopt);
}

TEST_CASE("abstraction and binary checks") {
    CHECK_FALSE(check_abstraction("Is the sofa blue?", blocklist()));
    CHECK(check_abstraction("Is the dining area set up for dinner?", blocklist()));
    CHECK_FALSE(check_binary("What is the color of the car?"));
    CHECK_FALSE(check_binary("Is the kitchen ready"));
    CHECK(check_binary("Was someone working in the bedroom?"));
    CHECK(check_binary("  Should we leave?  "));
}

TEST_CASE("validate collects every reason") {
    const auto v = validate(dp("what about the sofa", {{"tv", StateValue::Open}}), house(), blocklist(), nullptr);
    CHECK_FALSE(v.accepted());
    CHECK_FALSE(v.abstraction_ok);
    CHECK_FALSE(v.binary_ok);
    CHECK_FALSE(v.structure_ok);
    CHECK(v.contextual == Contextual::Deferred);
    CHECK(v.reasons.size() == 3);
}

TEST_CASE("structural checks") {
    const auto ok = [](const SituationalDatapoint& d) { return validate(d, house(), blocklist(), nullptr).accepted(); };
    CHECK(ok(dp("Is the dining area set up for dinner?", {{"plate", StateValue::Present}},
                {{"plate", Relation::On, "kitchentable"}})));
    CHECK_FALSE(ok(dp("Is dinner ready?", {})));
    CHECK_FALSE(ok(dp("Is dinner ready?", {{"piano", StateValue::On}})));
    CHECK(ok(dp("Is dinner ready?", {{"piano", StateValue::None}})));
    CHECK_FALSE(ok(dp("Is dinner ready?", {{"Plate", StateValue::Present}})));
    CHECK_FALSE(ok(dp("Is dinner ready?", {{"plate", StateValue::Present}}, {{"computer", Relation::Inside, "fridge"}})));
    CHECK_FALSE(ok(dp("Is dinner ready?", {{"plate", StateValue::Present}}, {{"plate", Relation::On, "plate"}})));
    CHECK(ok(dp("Is dinner ready?", {{"plate", StateValue::Present}}, {{"plate", Relation::Inside, "living room"}})));
}

TEST_CASE("contextual check uses the classifier") {
    auto chat = testing::replay({"simple", "Situational."});
    LlmClassifier classifier(chat, {});
    const auto d = dp("Is the house ready for sleeptime?", {{"tv", StateValue::Off}});
    const auto first = validate(d, house(), blocklist(), &classifier);
    CHECK(first.contextual == Contextual::Fail);
    CHECK_FALSE(first.accepted());
    CHECK(validate(d, house(), blocklist(), &classifier).accepted());
}

TEST_CASE("classifier provider failure names the datapoint") {
    auto chat = testing::replay({"perhaps"});
    LlmClassifier classifier(chat, {});
    try {
        validate(dp("Is the house ready?", {{"tv", StateValue::Off}}), house(), blocklist(), &classifier);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.entity() == "t1");
    }
}

TEST_CASE("fixture datapoints all validate") {
    const auto dps = read_datapoints(testing::fixture("datapoints.jsonl"));
    REQUIRE(dps.size() == 20);
    for (const auto& d : dps) {
        CAPTURE(d.id);
        CHECK(validate(d, house(), blocklist(), nullptr).accepted());
    }
}

TEST_CASE("jsonl round trip preserves records") {
    testing::TempDir dir;
    auto dps = read_datapoints(testing::fixture("datapoints.jsonl"));
    dps[0].labels = CategoryLabels{RoomCategory::Bathroom, SituationalLabel::Yes, TemporalLabel::Spatial};
    write_datapoints(dir / "d.jsonl", dps);
    CHECK(read_datapoints(dir / "d.jsonl") == dps);
}

TEST_CASE("duplicate ids and malformed rows are rejected") {
    testing::TempDir dir;
    const auto row = R"({"id":"a","query":"Is it?","states":[["tv","ON"]],"relations":[]})";
    write_text_file(dir / "dup.jsonl", std::string(row) + "\n" + row + "\n");
    CHECK_THROWS_AS(read_datapoints(dir / "dup.jsonl"), DuplicateIdError);
    CHECK_THROWS_AS(datapoint_from_json(json::parse(R"({"id":"a","query":"Is it?","states":[["tv","BLUE"]]})")),
                    SchemaError);
    CHECK_THROWS_AS(datapoint_from_json(json::parse(R"({"id":"a","states":[]})")), SchemaError);
}

}
