#include <doctest.h>

#include "seqa/errors.hpp"
#include "seqa/text.hpp"

using namespace seqa;

TEST_SUITE("text") {

TEST_CASE("word tokens lowercase and split on punctuation") {
    CHECK(text::word_tokens("Is the TV on? (living-room)") ==
          std::vector<std::string>{"is", "the", "tv", "on", "living", "room"});
    CHECK(text::word_tokens("  ").empty());
}

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(text::hex64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

TEST_CASE("format_number trims zeros") {
    CHECK(text::format_number(30.0) == "30");
    CHECK(text::format_number(100.0 / 3.0) == "33.33");
    CHECK(text::format_number(2.5) == "2.5");
    CHECK(text::format_number(-0.001) == "0");
}

TEST_CASE("utf8 length counts code points") {
    CHECK(text::utf8_length("abc") == 3);
    CHECK(text::utf8_length("caf\xc3\xa9") == 4);
}

TEST_CASE("jsonl skips blank lines and names the bad line") {
    const auto rows = jsonl::parse("{\"a\":1}\n\n{\"a\":2}\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1]["a"] == 2);
    try {
        jsonl::parse("{\"a\":1}\n{oops\n", "data.jsonl");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.entity() == "data.jsonl:2");
    }
}

}
