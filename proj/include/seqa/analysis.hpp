#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <vector>

#include "seqa/classifier.hpp"
#include "seqa/datapoint.hpp"
#include "seqa/embedding.hpp"

namespace seqa {

/// Rooms named in the text ("living room" and "livingroom" both count).
std::set<Room> rooms_mentioned(std::string_view query);

/// A single room named in the query wins; otherwise the rooms the consensus
/// objects resolve to decide (one room, multi-room, or no-room).
RoomCategory categorize_room(const SituationalDatapoint& d, const SceneGraph& scene);

SituationalLabel classify_situational(const SituationalDatapoint& d, Classifier* classifier);
TemporalLabel classify_temporal(const SituationalDatapoint& d, Classifier* classifier);

/// Fills `labels` on every datapoint.
void label_datapoints(std::vector<SituationalDatapoint>& datapoints, const SceneGraph& scene, Classifier* classifier);

struct LengthOptions {
    bool exclude_trailing_question_mark = true;
    std::size_t char_bucket_width = 10;
    std::size_t word_bucket_width = 2;
};

struct Histogram {
    std::size_t width = 1;
    /// counts[i] covers [i * width, (i + 1) * width).
    std::vector<std::size_t> counts;
};

struct LengthStats {
    std::vector<std::size_t> chars;
    std::vector<std::size_t> words;
    double median_chars = 0.0;
    double median_words = 0.0;
    Histogram char_histogram;
    Histogram word_histogram;
};

/// Characters are UTF-8 code points; words are whitespace-separated fields.
/// EmptyInputError on an empty set.
LengthStats length_stats(const std::vector<std::string>& queries, const LengthOptions& options = {});

double median(std::vector<std::size_t> values);

/// {room_distribution, situational_pct, spatial_pct, temporal_pct,
///  median_chars, median_words, histogram, counts, label_sources}
json stats_report(const std::vector<SituationalDatapoint>& labelled, const LengthStats& lengths, bool used_classifier);

/// Rows {id, text, vector, labels} in datapoint order.
std::vector<json> embedding_export(const std::vector<SituationalDatapoint>& datapoints, EmbeddingProvider& embedder);

}  // namespace seqa
