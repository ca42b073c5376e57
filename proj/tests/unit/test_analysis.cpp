#include <doctest.h>

#include "seqa/analysis.hpp"
#include "seqa/classifier.hpp"
#include "seqa/errors.hpp"
#include "test_support.hpp"

using namespace seqa;
using testing::house;

namespace {

SituationalDatapoint dp(std::string query, std::vector<ConsensusState> states,
                        std::vector<ConsensusRelation> relations = {}) {
    SituationalDatapoint d;
    d.id = "x";
    d.query = std::move(query);
    d.states = std::move(states);
    d.relations = std::move(relations);
    return d;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("room mentions") {
    CHECK(rooms_mentioned("Is the living room tidy?") == std::set<Room>{Room::LivingRoom});
    CHECK(rooms_mentioned("Kitchen and BATHROOM clean?") == std::set<Room>{Room::Kitchen, Room::Bathroom});
    CHECK(rooms_mentioned("Is the kitchentable set?").empty());
}

TEST_CASE("room categories") {
    CHECK(categorize_room(dp("Is the kitchen ready for cooking?", {{"stove", StateValue::On}}), house()) ==
          RoomCategory::Kitchen);
    // sleeptime touches bedroom and living room objects
    CHECK(categorize_room(dp("Is the house ready for sleeptime?",
                             {{"tv", StateValue::Off}, {"curtains", StateValue::Closed}}),
                          house()) == RoomCategory::MultiRoom);
    // no room word; toothbrush resolves through the cabinet
    CHECK(categorize_room(dp("Is it time to brush teeth?", {{"toothbrush", StateValue::Present}},
                             {{"toothbrush", Relation::Inside, "bathroomcabinet"}}),
                          house()) == RoomCategory::Bathroom);
    CHECK(categorize_room(dp("Is it snack time?", {{"unicorn", StateValue::None}}), house()) == RoomCategory::NoRoom);
    // a named room wins over object rooms
    CHECK(categorize_room(dp("Is the bedroom cosy?", {{"tv", StateValue::Off}}), house()) == RoomCategory::Bedroom);
    // two named rooms fall back to the objects
    CHECK(categorize_room(dp("Is the kitchen or bedroom warm?", {{"stove", StateValue::On}}), house()) ==
          RoomCategory::Kitchen);
    CHECK(categorize_room(dp("Is it snack time?", {{"apple", StateValue::Present}},
                             {{"apple", Relation::Inside, "livingroom"}}),
                          house()) == RoomCategory::MultiRoom);
}

TEST_CASE("classification with a replay classifier") {
    auto chat = testing::replay({"temporal", "Spatial.", "situational"});
    LlmClassifier c(chat, {});
    CHECK(classify_temporal(dp("Was someone sleeping in the bedroom today?", {}), &c) == TemporalLabel::Temporal);
    CHECK(classify_temporal(dp("Is the kitchen ready for cooking?", {}), &c) == TemporalLabel::Spatial);
    CHECK(classify_situational(dp("Is the kitchen ready for cooking?", {}), &c) == SituationalLabel::Yes);
    CHECK(classify_temporal(dp("q", {}), nullptr) == TemporalLabel::Deferred);
    CHECK(classify_situational(dp("q", {}), nullptr) == SituationalLabel::Deferred);
    const auto seen = chat.seen();
    CHECK(seen[0][1].content.find("Question: \"Was someone sleeping in the bedroom today?\"") != std::string::npos);
}

TEST_CASE("length statistics") {
    const auto s = length_stats({"Is it on?"});
    CHECK(s.words[0] == 3);
    CHECK(s.chars[0] == 8);
    CHECK(length_stats({"Is it on?"}, {false, 10, 2}).chars[0] == 9);
    CHECK(median({3, 7}) == 5.0);
    CHECK(median({9, 1, 4}) == 4.0);
    CHECK_THROWS_AS(length_stats({}), EmptyInputError);

    const auto h = length_stats({"a b c d e f g h i j k l?", "Is it on?", "Yes?"}, {true, 5, 4});
    CHECK(h.word_histogram.width == 4);
    CHECK(h.word_histogram.counts == std::vector<std::size_t>{2, 0, 0, 1});
    CHECK(h.median_words == 3.0);
}

TEST_CASE("stats report over labelled fixtures") {
    auto dps = read_datapoints(testing::fixture("datapoints.jsonl"));
    label_datapoints(dps, house(), nullptr);
    std::vector<std::string> queries;
    for (const auto& d : dps) queries.push_back(d.query);
    const auto report = stats_report(dps, length_stats(queries), false);
    double total = 0;
    for (const auto& [k, v] : report["room_distribution"].items()) total += v.get<double>();
    CHECK(total == doctest::Approx(100.0));
    CHECK(report["room_distribution"].size() == 6);
    CHECK(report["temporal_pct"].is_null());
    CHECK(report["label_sources"]["temporal"] == "deferred");
    CHECK(report["counts"]["datapoints"] == 20);
    CHECK(dps[11].labels->room == RoomCategory::Kitchen);

    dps[0].labels.reset();
    CHECK_THROWS_AS(stats_report(dps, length_stats(queries), false), InvariantError);
}

TEST_CASE("embedding export rows") {
    auto dps = read_datapoints(testing::fixture("datapoints.jsonl"));
    dps.resize(2);
    HashedBagOfWordsEmbedder emb(16);
    const auto rows = embedding_export(dps, emb);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["id"] == "q00001");
    CHECK(rows[0]["vector"].size() == 16);
    CHECK(rows[0]["labels"].is_null());
}

}
