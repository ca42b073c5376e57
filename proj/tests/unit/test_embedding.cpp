#include <doctest.h>

#include <cmath>

#include "seqa/embedding.hpp"
#include "seqa/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace seqa;

TEST_SUITE("embedding") {

TEST_CASE("hashed embedder is unit norm and deterministic") {
    HashedBagOfWordsEmbedder e(64);
    const auto a = e.embed_one("Is the kitchen ready for cooking?");
    CHECK(a.size() == 64);
    CHECK(dot(a, a) == doctest::Approx(1.0));
    CHECK(e.embed_one("Is the kitchen ready for cooking?") == a);
    // punctuation and case do not matter
    CHECK(e.embed_one("is THE kitchen ready, for cooking") == a);
    CHECK(HashedBagOfWordsEmbedder(64, 7).embed_one("Is the kitchen ready for cooking?") != a);
}

TEST_CASE("identical texts are maximally similar, disjoint ones are not") {
    HashedBagOfWordsEmbedder e;
    const auto a = e.embed_one("Is the bathroom ready for a shower?");
    const auto b = e.embed_one("Is the bathroom ready for a shower?");
    const auto c = e.embed_one("Was someone sleeping upstairs today?");
    CHECK(cosine(a, b) == doctest::Approx(1.0));
    CHECK(cosine(a, c) < 0.5);
    CHECK(e.embed_one("").size() == 256);
}

TEST_CASE("cosine matches the direct formula") {
    std::mt19937 rng(3);
    std::normal_distribution<double> n;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> a(5), b(5);
        for (auto& x : a) x = n(rng);
        for (auto& x : b) x = n(rng);
        CHECK(cosine(a, b) == doctest::Approx(1.0 - oracle::cos_dist(a, b)).epsilon(1e-12));
    }
    CHECK(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}) == 0.0);
}

TEST_CASE("query database rejects duplicates and bad dimensions") {
    QueryDatabase db(3);
    db.insert("a", "x", {1, 0, 0});
    CHECK_THROWS_AS(db.insert("a", "y", {0, 1, 0}), DuplicateIdError);
    CHECK_THROWS_AS(db.insert("b", "y", {0, 1}), DimensionMismatchError);
    CHECK_THROWS(db.set_representatives({"zz"}));
    db.set_representatives({"a"});
    CHECK(db.representatives() == std::vector<std::string>{"a"});
}

TEST_CASE("max similarity and batch percentage") {
    QueryDatabase db(2);
    db.insert("a", "x", {1, 0});
    const std::vector<Embedding> batch = {{1, 0}, {0, 1}, {0.96, 0.28}, {0.6, 0.8}};
    const auto r = max_similarity(batch, db, 0.9, 30);
    REQUIRE(r.per_query_max_sim.size() == 4);
    CHECK(r.per_query_max_sim[1] == doctest::Approx(0.0));
    CHECK(r.similar_count() == 2);
    CHECK(r.batch_percent_similar == doctest::Approx(50.0));
    CHECK(r.exceeds_batch_threshold());
    // exactly tau is not "similar"
    CHECK(max_similarity({{0.9, std::sqrt(1 - 0.81)}}, db, 0.9, 30).similar_count() == 0);
    CHECK(max_similarity({{1, 0}}, QueryDatabase(2), 0.9, 30).per_query_max_sim[0] == -1.0);
}

TEST_CASE("embedding cache serves exact texts only") {
    testing::TempDir dir;
    jsonl::write_file(dir / "cache.jsonl", {json{{"id", "a"}, {"text", "hello"}, {"vector", {3.0, 4.0}}}});
    CachedEmbeddingProvider cache(dir / "cache.jsonl");
    CHECK(cache.dimension() == 2);
    const auto v = cache.embed({"hello"});
    CHECK(v[0][0] == doctest::Approx(0.6));
    CHECK_THROWS_AS(cache.embed({"goodbye"}), ProviderError);
}

}
