#include "seqa/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace seqa {

std::vector<double> cosine_distance_matrix(const std::vector<Embedding>& points) {
    const auto n = points.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 1.0 - cosine(points[i], points[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    return d;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

Clustering average_linkage(const std::vector<Embedding>& points, std::size_t target_clusters) {
    const auto n = points.size();
    Clustering out;
    if (n == 0) return out;
    target_clusters = std::clamp<std::size_t>(target_clusters, 1, n);

    auto dist = cosine_distance_matrix(points);
    const auto at = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };

    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> cluster_id(n);
    std::iota(cluster_id.begin(), cluster_id.end(), 0);
    std::vector<std::size_t> parent(cluster_id);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_dist(n, kInf);
    const auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nn_dist[i] = kInf;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            if (at(i, j) < nn_dist[i]) {
                nn_dist[i] = at(i, j);
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    std::size_t remaining = n;
    while (remaining > target_clusters) {
        // Slot index == lowest member index, so the first slot reaching the
        // minimum belongs to the lexicographically smallest closest pair.
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && (a == n || nn_dist[i] < nn_dist[a])) a = i;
        const std::size_t b = nn[a];
        const double d = nn_dist[a];

        const auto sa = static_cast<double>(size[a]);
        const auto sb = static_cast<double>(size[b]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            const double merged = (sa * at(a, k) + sb * at(b, k)) / (sa + sb);
            at(a, k) = merged;
            at(k, a) = merged;
        }
        out.merges.push_back({std::min(cluster_id[a], cluster_id[b]), std::max(cluster_id[a], cluster_id[b]), d,
                              size[a] + size[b]});
        cluster_id[a] = n + out.merges.size() - 1;
        size[a] += size[b];
        active[b] = false;
        parent[b] = a;
        --remaining;

        refresh(a);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) continue;
            if (nn[k] == a || nn[k] == b) {
                refresh(k);
            } else if (at(k, a) < nn_dist[k] || (at(k, a) == nn_dist[k] && a < nn[k])) {
                nn[k] = a;
                nn_dist[k] = at(k, a);
            }
        }
    }

    out.labels.assign(n, 0);
    std::vector<std::size_t> label_of_root(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = find_root(parent, i);
        if (label_of_root[root] == n) label_of_root[root] = out.cluster_count++;
        out.labels[i] = label_of_root[root];
    }
    return out;
}

}  // namespace seqa
