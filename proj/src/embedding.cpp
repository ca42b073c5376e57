#include "seqa/embedding.hpp"

#include "http_util.hpp"
#include "seqa/clustering.hpp"
#include "seqa/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace seqa {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    const auto n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

void normalize(Embedding& v) {
    const double norm = std::sqrt(dot(v, v));
    if (norm == 0.0) return;
    for (auto& x : v) x /= norm;
}

HashedBagOfWordsEmbedder::HashedBagOfWordsEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw ConfigError("dimension", "embedding dimension must be positive");
}

Embedding HashedBagOfWordsEmbedder::embed_one(std::string_view text) const {
    Embedding v(dimension_, 0.0);
    auto tokens = text::word_tokens(text);
    if (tokens.empty()) tokens.emplace_back();
    for (const auto& tok : tokens) {
        const auto h = text::fnv1a64(tok) ^ (seed_ * 0x9E3779B97F4A7C15ULL);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        v[(h >> 1) % dimension_] += sign;
    }
    normalize(v);
    if (dot(v, v) == 0.0) v[0] = 1.0;  // every token cancelled out
    return v;
}

std::vector<Embedding> HashedBagOfWordsEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

CachedEmbeddingProvider::CachedEmbeddingProvider(const std::filesystem::path& cache_file) {
    for (auto& e : read_embedding_cache(cache_file)) {
        if (dimension_ == 0) dimension_ = e.vector.size();
        if (e.vector.size() != dimension_)
            throw DimensionMismatchError(e.id, fmt::format("cache entry '{}' has dimension {} (expected {})", e.id,
                                                           e.vector.size(), dimension_));
        normalize(e.vector);
        by_text_.emplace(e.text, std::move(e.vector));
    }
}

std::vector<Embedding> CachedEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        const auto it = by_text_.find(t);
        if (it == by_text_.end()) throw ProviderError(t, fmt::format("no cached embedding for \"{}\"", t));
        out.push_back(it->second);
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config) : config_(std::move(config)) {
    http::parse_url(config_.endpoint);
    if (config_.dimension == 0) throw ConfigError("dimension", "remote embedding provider needs a dimension");
}

std::vector<Embedding> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    json body = {{"input", texts}, {"model", config_.model}};
    std::map<std::string, std::string> headers;
    if (const auto key = http::bearer_from_env(config_.api_key_env); !key.empty())
        headers["Authorization"] = "Bearer " + key;
    const auto res = http::post_json_with_retry(config_.endpoint, body, headers, config_.timeout_seconds,
                                                config_.max_retries, config_.initial_backoff_ms);
    if (!res.transport_error.empty())
        throw ProviderError(config_.endpoint, fmt::format("embedding request failed: {}", res.transport_error));
    if (res.status != 200)
        throw ProviderError(config_.endpoint, fmt::format("embedding endpoint returned HTTP {}", res.status));
    json reply;
    try {
        reply = json::parse(res.body);
    } catch (const json::parse_error& e) {
        throw ProviderError(config_.endpoint, fmt::format("embedding response is not JSON: {}", e.what()));
    }
    if (!reply.contains("data") || !reply["data"].is_array() || reply["data"].size() != texts.size())
        throw ProviderError(config_.endpoint, "embedding response must carry one 'data' item per input");

    std::vector<Embedding> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto& item = reply["data"][i];
        // Servers may reorder; honour an explicit index when given.
        const auto idx = item.value("index", i);
        if (idx >= texts.size() || !item.contains("embedding"))
            throw ProviderError(config_.endpoint, "malformed embedding item");
        auto v = item["embedding"].get<Embedding>();
        if (v.size() != config_.dimension)
            throw DimensionMismatchError(config_.endpoint, fmt::format("embedding has dimension {} (expected {})",
                                                                       v.size(), config_.dimension));
        normalize(v);
        out[idx] = std::move(v);
    }
    return out;
}

void QueryDatabase::insert(std::string id, std::string text, Embedding embedding) {
    if (index_.contains(id)) throw DuplicateIdError(id, fmt::format("query id '{}' already in the database", id));
    if (dimension_ == 0) dimension_ = embedding.size();
    if (embedding.size() != dimension_)
        throw DimensionMismatchError(id, fmt::format("embedding for '{}' has dimension {} (expected {})", id,
                                                     embedding.size(), dimension_));
    index_.emplace(id, entries_.size());
    entries_.push_back({std::move(id), std::move(text), std::move(embedding)});
}

const EmbeddingEntry& QueryDatabase::at(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw UnknownObjectError(id, fmt::format("no query '{}' in the database", id));
    return entries_[it->second];
}

void QueryDatabase::set_representatives(std::vector<std::string> ids) {
    for (const auto& id : ids)
        if (!index_.contains(id))
            throw InvariantError(id, fmt::format("representative '{}' is not a database entry", id));
    representatives_ = std::move(ids);
}

std::size_t SimilarityReport::similar_count() const {
    return static_cast<std::size_t>(std::count_if(per_query_max_sim.begin(), per_query_max_sim.end(),
                                                  [&](double s) { return s > threshold_tau; }));
}

json to_json(const SimilarityReport& r) {
    return {{"per_query_max_sim", r.per_query_max_sim},
            {"batch_percent_similar", r.batch_percent_similar},
            {"threshold_tau", r.threshold_tau},
            {"batch_threshold_x", r.batch_threshold_x}};
}

SimilarityReport max_similarity(const std::vector<Embedding>& batch, const QueryDatabase& db, double tau,
                                double batch_threshold_x) {
    SimilarityReport report;
    report.threshold_tau = tau;
    report.batch_threshold_x = batch_threshold_x;
    report.per_query_max_sim.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!db.empty() && batch[i].size() != db.dimension())
            throw DimensionMismatchError(std::to_string(i), fmt::format("batch vector {} has dimension {} (db has {})",
                                                                        i, batch[i].size(), db.dimension()));
        double best = -1.0;
        for (const auto& e : db.entries()) best = std::max(best, cosine(batch[i], e.vector));
        report.per_query_max_sim.push_back(best);
    }
    if (!batch.empty())
        report.batch_percent_similar = 100.0 * static_cast<double>(report.similar_count()) / static_cast<double>(batch.size());
    return report;
}

std::vector<std::string> cluster_representatives(const QueryDatabase& db, std::size_t k) {
    if (db.empty() || k == 0) return {};
    std::vector<Embedding> points;
    points.reserve(db.size());
    for (const auto& e : db.entries()) points.push_back(e.vector);
    const auto clustering = average_linkage(points, k);

    std::vector<std::vector<std::size_t>> members(clustering.cluster_count);
    for (std::size_t i = 0; i < points.size(); ++i) members[clustering.labels[i]].push_back(i);

    std::vector<std::string> reps;
    reps.reserve(members.size());
    const auto dim = db.dimension();
    for (const auto& group : members) {
        Embedding mean(dim, 0.0);
        for (const auto i : group)
            for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
        for (auto& x : mean) x /= static_cast<double>(group.size());

        const std::string* best_id = nullptr;
        double best_dist = 0.0;
        for (const auto i : group) {
            const double dist = 1.0 - cosine(points[i], mean);
            const auto& id = db.entries()[i].id;
            constexpr double kTieEps = 1e-12;
            if (!best_id || dist < best_dist - kTieEps || (std::abs(dist - best_dist) <= kTieEps && id < *best_id)) {
                best_id = &id;
                best_dist = dist;
            }
        }
        reps.push_back(*best_id);
    }
    return reps;
}

json to_json(const EmbeddingEntry& e) { return {{"id", e.id}, {"text", e.text}, {"vector", e.vector}}; }

std::vector<EmbeddingEntry> read_embedding_cache(const std::filesystem::path& path) {
    std::vector<EmbeddingEntry> out;
    std::size_t line = 0;
    for (const auto& row : jsonl::read_file(path)) {
        ++line;
        const auto where = fmt::format("{}:{}", path.string(), line);
        try {
            out.push_back({row.at("id").get<std::string>(), row.at("text").get<std::string>(),
                           row.at("vector").get<Embedding>()});
        } catch (const json::exception& e) {
            throw SchemaError(where, fmt::format("{}: embedding rows need id, text, vector ({})", where, e.what()));
        }
    }
    return out;
}

}  // namespace seqa
