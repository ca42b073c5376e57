#include <doctest.h>

#include "seqa/errors.hpp"
#include "seqa/prompts.hpp"
#include "test_support.hpp"

using namespace seqa;
using testing::house;

TEST_SUITE("prompts") {

TEST_CASE("render_template fills known slots only") {
    CHECK(render_template("{A} and {B} and {A}", {{"A", "x"}}) == "x and {B} and x");
    CHECK(render_template("{\"json\": 1} {X}", {{"X", "5"}}) == "{\"json\": 1} 5");
    CHECK(render_template("dangling {X", {{"X", "5"}}) == "dangling {X");
}

TEST_CASE("default prompts carry the published instructions") {
    const auto p = PromptBundle::defaults();
    const auto user = render_user_prompt(p, 10);
    CHECK(user.find("can you generate 10 potential questions") != std::string::npos);
    CHECK(user.find("The output should be lines of the form [Question, Object-State Pairs, Relationships].") !=
          std::string::npos);
    CHECK(user.find("Get creative with the potential scenarios!") != std::string::npos);
    CHECK(user.find("The query must have a Yes/No answer.") != std::string::npos);
    CHECK(render_regen_prompt(p, 40, 5, {"Is it late?", "Is it early?"}) ==
          "40% of the questions are similar to what you've already generated earlier! Try again, give me 5 more.\n"
          "QUERIES:\nIs it late?\nIs it early?\n");
}

TEST_CASE("system prompt lists scene and representatives") {
    const auto sys = render_system_prompt(PromptBundle::defaults(), house(), {"Is the house ready for sleeptime?"});
    CHECK(sys.find("tv: [ON, OFF]") != std::string::npos);
    CHECK(sys.find("microwave: [ON, OFF, OPEN, CLOSED]") != std::string::npos);
    CHECK(sys.find("kitchentable: []") != std::string::npos);
    CHECK(sys.find("apple INSIDE fridge") != std::string::npos);
    CHECK(sys.find("tv INSIDE livingroom") != std::string::npos);
    CHECK(sys.find("GENERATED_QUERIES :-\nIs the house ready for sleeptime?\n") != std::string::npos);
    CHECK(sys.find("{OBJ_") == std::string::npos);
}

TEST_CASE("relationship lines are deduplicated by class") {
    const auto rel = obj_rel_dict(house());
    std::size_t count = 0;
    for (std::size_t pos = 0; (pos = rel.find("lightswitch INSIDE", pos)) != std::string::npos; ++pos) ++count;
    CHECK(count == 2);  // bedroom and bathroom
}

TEST_CASE("prompt overrides from file") {
    testing::TempDir dir;
    write_text_file(dir / "p.json", R"({"regen": "again {Y}"})");
    const auto p = PromptBundle::from_file(dir / "p.json");
    CHECK(p.regen_template == "again {Y}");
    CHECK(p.user_template == PromptBundle::defaults().user_template);
    write_text_file(dir / "bad.json", R"({"regen": 3})");
    CHECK_THROWS_AS(PromptBundle::from_file(dir / "bad.json"), SchemaError);
}

TEST_CASE("state and relation formatting") {
    CHECK(format_states({{"lightswitch", StateValue::On}, {"towels", StateValue::Present}}) ==
          "[lightswitch: [ON], towels: [PRESENT]]");
    CHECK(format_relations({{"towels", Relation::Inside, "bathroom"}}) == "[towels INSIDE bathroom]");
    CHECK(format_relations({}) == "[]");
}

}
