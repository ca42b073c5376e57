#pragma once

#include <cstddef>
#include <vector>

#include "seqa/embedding.hpp"

namespace seqa {

/// One agglomeration step. Leaves are 0..n-1; the cluster formed by merge t
/// has id n + t (scipy linkage convention).
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double distance = 0.0;
    std::size_t size = 0;
};

struct Clustering {
    std::vector<Merge> merges;
    /// Cluster label per point, 0..clusters-1, numbered by first member.
    std::vector<std::size_t> labels;
    std::size_t cluster_count = 0;
};

/// Pairwise 1 - cosine distances, row-major n x n.
std::vector<double> cosine_distance_matrix(const std::vector<Embedding>& points);

/// Average-linkage agglomeration, stopped once `target_clusters` remain.
/// The closest pair merges first; ties go to the pair with the smallest
/// (lower member index, higher member index).
Clustering average_linkage(const std::vector<Embedding>& points, std::size_t target_clusters);

}  // namespace seqa
