#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqa/text.hpp"

namespace seqa {

using Embedding = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);
/// Scales to unit L2 norm in place; leaves zero vectors alone.
void normalize(Embedding& v);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    /// Unit-norm vectors, one per text, in input order.
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
};

/// Signed feature hashing over lowercase word tokens. Deterministic across
/// runs and platforms.
class HashedBagOfWordsEmbedder : public EmbeddingProvider {
public:
    explicit HashedBagOfWordsEmbedder(std::size_t dimension = 256, std::uint64_t seed = 0);
    std::size_t dimension() const override { return dimension_; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    Embedding embed_one(std::string_view text) const;

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Serves vectors from an embedding cache file, keyed by exact text.
/// Unknown texts raise ProviderError.
class CachedEmbeddingProvider : public EmbeddingProvider {
public:
    explicit CachedEmbeddingProvider(const std::filesystem::path& cache_file);
    std::size_t dimension() const override { return dimension_; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;

private:
    std::unordered_map<std::string, Embedding> by_text_;
    std::size_t dimension_ = 0;
};

struct HttpEmbeddingConfig {
    /// OpenAI-compatible embeddings endpoint: {"input": [...], "model": ...}.
    std::string endpoint;
    std::string model;
    std::string api_key_env = "SEQA_EMBED_API_KEY";
    std::size_t dimension = 0;
    int max_retries = 3;
    int timeout_seconds = 60;
    int initial_backoff_ms = 500;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
    std::size_t dimension() const override { return config_.dimension; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;

private:
    HttpEmbeddingConfig config_;
};

struct EmbeddingEntry {
    std::string id;
    std::string text;
    Embedding vector;
};

/// The growing situational query set with its embeddings.
class QueryDatabase {
public:
    explicit QueryDatabase(std::size_t dimension = 0) : dimension_(dimension) {}

    /// DuplicateIdError on a repeated id, DimensionMismatchError on a bad vector.
    void insert(std::string id, std::string text, Embedding embedding);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t dimension() const { return dimension_; }
    bool contains(const std::string& id) const { return index_.contains(id); }
    const std::vector<EmbeddingEntry>& entries() const { return entries_; }
    const EmbeddingEntry& at(const std::string& id) const;

    const std::vector<std::string>& representatives() const { return representatives_; }
    /// Must be a subset of the entry ids.
    void set_representatives(std::vector<std::string> ids);

private:
    std::size_t dimension_;
    std::vector<EmbeddingEntry> entries_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::string> representatives_;
};

struct SimilarityReport {
    std::vector<double> per_query_max_sim;
    double batch_percent_similar = 0.0;
    double threshold_tau = 0.0;
    double batch_threshold_x = 0.0;

    std::size_t similar_count() const;
    bool exceeds_batch_threshold() const { return batch_percent_similar > batch_threshold_x; }
};

json to_json(const SimilarityReport& r);

/// Max cosine of each batch vector against every db entry (-1 for an empty db).
SimilarityReport max_similarity(const std::vector<Embedding>& batch, const QueryDatabase& db, double tau,
                                double batch_threshold_x);

/// Average-linkage agglomerative clustering (1 - cosine) into min(k, |db|)
/// clusters; one representative per cluster, the member nearest the cluster
/// mean, ties to the lowest id. Ordered by each cluster's first entry.
std::vector<std::string> cluster_representatives(const QueryDatabase& db, std::size_t k);

/// Embedding cache / export rows: {id, text, vector[, labels]}.
json to_json(const EmbeddingEntry& e);
std::vector<EmbeddingEntry> read_embedding_cache(const std::filesystem::path& path);

}  // namespace seqa
